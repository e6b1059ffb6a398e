class Error(Exception):
    pass


class ValidationError(Error, ValueError):
    pass


class UnknownModelError(ValidationError, KeyError):
    def __str__(self):
        # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ''


class NonFiniteEvaluationError(Error):
    pass


class UnsupportedOperationError(Error):
    pass


class InvalidWeightError(ValidationError):
    pass


class MisconfiguredScenarioError(ValidationError):
    pass


class VarianceAssumptionError(ValidationError):
    pass


class BudgetError(ValidationError):
    pass
