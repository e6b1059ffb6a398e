import logging
import math
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

import requests

from psig_tools import exceptions
from psig_tools import utilities
from psig_tools.attribution import RULES
from psig_tools.density import Density, parse_density
from psig_tools.experiments import SPLITS
from psig_tools.model import Model, builtin_model
from psig_tools.pathgeom import PathSpec


logger = logging.getLogger(__name__)

SEED_ENVIRONMENT_VARIABLE = 'PSIG_TOOLS_SEED'

COMMANDS = ('attribute', 'variance', 'convergence', 'axioms', 'residual')
ESTIMATORS = ('ig', 'pwig', 'psig_det', 'psig_mc')
WEIGHTS = ('one', 'identity', 'cdf')


def _text(key: str, value: Any) -> str:
    return str(value).strip()


def _optional_path(key: str, value: Any) -> Optional[str]:
    value = str(value).strip()
    return value or None


def _vector(key: str, value: Any) -> Tuple[float, ...]:
    try:
        return tuple(utilities.parse_vector(value))
    except exceptions.ValidationError as err:
        raise exceptions.ValidationError('Invalid {}: {}'.format(key, err))


def _int_list(key: str, value: Any) -> Tuple[int, ...]:
    try:
        return tuple(utilities.parse_int_list(value))
    except exceptions.ValidationError as err:
        raise exceptions.ValidationError('Invalid {}: {}'.format(key, err))


def _integer(key: str, value: Any) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    try:
        return int(str(value).strip())
    except ValueError:
        pass
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise exceptions.ValidationError('{} must be an integer, got {!r}.'.format(key, value))
    if not math.isfinite(number) or number != int(number):
        raise exceptions.ValidationError('{} must be an integer, got {!r}.'.format(key, value))
    return int(number)


def _positive_integer(key: str, value: Any) -> int:
    number = _integer(key, value)
    if number < 1:
        raise exceptions.ValidationError('{} must be positive, got {}.'.format(key, number))
    return number


def _positive_real(key: str, value: Any) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise exceptions.ValidationError('{} must be a number, got {!r}.'.format(key, value))
    if not number > 0 or number == float('inf'):
        raise exceptions.ValidationError('{} must be positive, got {}.'.format(key, number))
    return number


_CONVERTERS = {
    'command': _text,
    'model': _text,
    'input': _vector,
    'baseline': _vector,
    'density': _text,
    'estimator': _text,
    'weight': _text,
    'rule': _text,
    'split': _text,
    'steps': _positive_integer,
    'trials': _positive_integer,
    'sigma': _positive_real,
    'budgets': _int_list,
    'mc_repeats': _positive_integer,
    'ground_truth_steps': _positive_integer,
    'inner_steps': _positive_integer,
    'n_baselines': _positive_integer,
    'workers': _positive_integer,
    'seed': _integer,
    'csv': _optional_path,
    'json': _optional_path,
    'svg': _optional_path,
}


@dataclass(frozen=True)
class RunConfig(object):
    """The fully resolved settings of one CLI run."""

    command: str = 'attribute'
    model: str = 'linear3'
    input: Tuple[float, ...] = (1.0, 1.0, 1.0)
    baseline: Tuple[float, ...] = (0.0, 0.0, 0.0)
    density: str = 'uniform'
    estimator: str = 'psig_det'
    weight: str = 'cdf'
    rule: str = 'right'
    split: str = 'fixed'
    steps: int = 100
    trials: int = 1000
    sigma: float = 1.0
    budgets: Tuple[int, ...] = (10, 100, 1000, 10000)
    mc_repeats: int = 20
    ground_truth_steps: int = 100000
    inner_steps: int = 10
    n_baselines: int = 1000
    workers: int = 1
    seed: int = 0
    csv: Optional[str] = None
    json: Optional[str] = None
    svg: Optional[str] = None

    @classmethod
    def harmonize(
        cls,
        flags: Mapping[str, Any] = None,
        config_file: str = None,
        environ: Mapping[str, str] = None,
    ) -> 'RunConfig':
        """Merge every settings source into one validated config.

        Precedence, highest first: explicit flags, the ``key = value`` config file, the
        ``PSIG_TOOLS_SEED`` environment variable (seed only), built-in defaults.

        Args:
            flags: Settings given on the command line; None values count as not given.
            config_file: Path or http(s) url of a ``key = value`` file.
            environ: Environment mapping, ``os.environ`` by default.

        Returns:
            The validated `RunConfig`.

        Raises:
            ValidationError: If the config file cannot be read, a key is unknown, a value does not parse,
                or the settings are inconsistent (e.g. the input length does not match the model dimension).
        """
        environ = os.environ if environ is None else environ
        values = {}  # type: Dict[str, Any]
        if environ.get(SEED_ENVIRONMENT_VARIABLE):
            values['seed'] = environ[SEED_ENVIRONMENT_VARIABLE]
        if config_file:
            try:
                entries = utilities.load_key_value_file(config_file)
            except requests.exceptions.RequestException:
                raise
            except OSError as err:
                raise exceptions.ValidationError(
                    'Cannot read the config file {}: {}'.format(config_file, err.strerror or err)
                )
            values.update(cls._checked(entries, config_file))
        explicit = {
            utilities.normalize_key(key): value
            for key, value in (flags or {}).items()
            if value is not None
        }
        values.update(cls._checked(explicit, 'flags'))
        config = cls(**{key: _CONVERTERS[key](key, value) for key, value in values.items()})
        config.validate()
        logger.info('Resolved run config: %s', config.as_dict())
        return config

    @staticmethod
    def _checked(entries: Mapping[str, Any], source: str) -> Dict[str, Any]:
        unknown = sorted(set(entries) - set(_CONVERTERS))
        if unknown:
            raise exceptions.ValidationError(
                'Unknown setting(s) in {}: {}.'.format(source, ', '.join(unknown))
            )
        return dict(entries)

    def validate(self) -> None:
        for key, allowed in (
            ('command', COMMANDS),
            ('estimator', ESTIMATORS),
            ('weight', WEIGHTS),
            ('rule', RULES),
            ('split', SPLITS),
        ):
            if getattr(self, key) not in allowed:
                raise exceptions.ValidationError(
                    'Invalid {} {!r}; choose from {}.'.format(
                        key, getattr(self, key), ', '.join(allowed)
                    )
                )
        if len(self.input) != len(self.baseline):
            raise exceptions.ValidationError(
                'input has {} coordinates but baseline has {}.'.format(
                    len(self.input), len(self.baseline)
                )
            )
        for model in self.resolve_models():
            if model.dim != len(self.input):
                raise exceptions.ValidationError(
                    'Model {} has dimension {} but input has {} coordinates.'.format(
                        model.name, model.dim, len(self.input)
                    )
                )
        self.resolve_density()

    def as_dict(self) -> Dict[str, Any]:
        return {
            key: list(value) if isinstance(value, tuple) else value
            for key, value in asdict(self).items()
        }

    def model_names(self) -> List[str]:
        return [name.strip() for name in self.model.split(',') if name.strip()]

    def resolve_models(self) -> List[Model]:
        names = self.model_names()
        if not names:
            raise exceptions.ValidationError('At least one model name is required.')
        return [builtin_model(name) for name in names]

    def resolve_density(self) -> Density:
        return parse_density(self.density)

    def path_spec(self) -> PathSpec:
        return PathSpec(self.input, self.baseline)

    def output_paths(self) -> List[str]:
        return [path for path in (self.csv, self.json, self.svg) if path]
