"""The commands behind the ``psig-tools`` CLI, one classmethod per sub-command.

Each command takes a resolved `RunConfig`, writes the requested CSV/JSON/SVG outputs and returns a
`RunOutcome` carrying the JSON-ready results and the human-readable summary printed to stdout.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, List, Sequence

from psig_tools import __version__
from psig_tools import attribution
from psig_tools import exceptions
from psig_tools import experiments
from psig_tools import utilities
from psig_tools.density import Density
from psig_tools.diag import loglog_plot
from psig_tools.run_config import RunConfig


logger = logging.getLogger(__name__)

DETERMINISTIC_LABEL = 'deterministic PS-IG'
MONTE_CARLO_LABEL = 'Monte Carlo PS-IG'


@dataclass
class RunOutcome(object):
    command: str
    results: Any
    summary: str


def _table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(h) for h in headers]] + [
        ['{:.6g}'.format(v) if isinstance(v, float) else str(v) for v in row] for row in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = [' | '.join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, '-+-'.join('-' * w for w in widths))
    return '\n'.join(lines)


def _weight_for(config: RunConfig, d: Density) -> attribution.WeightFn:
    if config.weight == 'one':
        return attribution.WeightFn.constant(1.0)
    if config.weight == 'identity':
        return attribution.WeightFn.identity()
    return attribution.WeightFn.from_density(d)


class PsigToolkit(object):
    @classmethod
    def _comment(cls, config: RunConfig) -> str:
        return utilities.metadata_line(__version__, config.seed, config.as_dict())

    @classmethod
    def _write_json(cls, config: RunConfig, results: Any) -> None:
        if config.json:
            utilities.write_json_summary(
                config.json, __version__, config.seed, config.as_dict(), results
            )

    @classmethod
    def attribute(cls, config: RunConfig) -> RunOutcome:
        """Attribute the input against the baseline with the configured estimator, per model.

        Args:
            config: Uses model (comma-separated names allowed), input, baseline, estimator, density,
                weight (for pwig), steps, rule, and n_baselines/inner_steps/seed for psig_mc.

        Returns:
            One attribution record per model.
        """
        path = config.path_spec()
        d = config.resolve_density()
        records = []
        for model in config.resolve_models():
            if config.estimator == 'ig':
                result = attribution.ig(model, path, config.steps, config.rule)
            elif config.estimator == 'pwig':
                weight = _weight_for(config, d)
                result = attribution.pwig(model, path, weight, config.steps, config.rule)
            elif config.estimator == 'psig_det':
                result = attribution.psig_det(model, path, d, config.steps, config.rule)
            else:
                result = attribution.psig_mc(
                    model,
                    path,
                    d,
                    config.n_baselines,
                    config.inner_steps,
                    config.seed,
                    config.rule,
                )
            records.append((model.name, result))

        if config.csv:
            rows = []
            for name, result in records:
                for feature, value in enumerate(result.values):
                    stderr = '' if result.stderr is None else result.stderr[feature]
                    rows.append(
                        [
                            name,
                            result.estimator,
                            result.density_or_weight,
                            result.steps,
                            feature,
                            value,
                            stderr,
                        ]
                    )
            utilities.write_csv(
                config.csv,
                ['model', 'estimator', 'density_or_weight', 'steps', 'feature', 'value', 'stderr'],
                rows,
                comment=cls._comment(config),
            )
        results = [dict(result.as_dict(), model=name) for name, result in records]
        cls._write_json(config, results)
        summary = _table(
            ['Model', 'Estimator', 'Attributions', 'Sum'],
            [
                [
                    name,
                    result.estimator,
                    '(' + ', '.join('{:.4f}'.format(v) for v in result.values) + ')',
                    '{:.4f}'.format(result.sum),
                ]
                for name, result in records
            ],
        )
        return RunOutcome('attribute', results, summary)

    @classmethod
    def variance(cls, config: RunConfig) -> RunOutcome:
        """The gradient-noise variance table: one row per model."""
        noise = experiments.NoiseModel(config.sigma, config.steps, config.seed)
        reports = experiments.variance_table(
            config.resolve_models(),
            config.path_spec(),
            config.resolve_density(),
            noise,
            config.trials,
            workers=config.workers,
        )
        if config.csv:
            utilities.write_variance_csv(config.csv, reports, comment=cls._comment(config))
        results = [report.as_dict() for report in reports]
        cls._write_json(config, results)
        summary = _table(
            ['Function', 'Var(IG)', 'Var(PS-IG)', 'Ratio', 'Predicted'],
            [
                [
                    report.model_name,
                    '{:.5f}'.format(report.var_ig),
                    '{:.5f}'.format(report.var_ps),
                    '{:.4f}'.format(report.ratio),
                    '{:.4f}'.format(report.predicted_ratio),
                ]
                for report in reports
            ],
        )
        return RunOutcome('variance', results, summary)

    @classmethod
    def convergence(cls, config: RunConfig) -> RunOutcome:
        """MSE of deterministic and Monte Carlo PS-IG against budgets of gradient evaluations."""
        models = config.resolve_models()
        if len(models) != 1:
            raise exceptions.ValidationError('convergence runs on exactly one model.')
        model = models[0]
        d = config.resolve_density()
        points = experiments.convergence_study(
            model,
            config.path_spec(),
            d,
            config.budgets,
            config.mc_repeats,
            config.ground_truth_steps,
            config.seed,
            inner_steps=config.inner_steps,
            split=config.split,
            workers=config.workers,
        )
        slope_det = slope_mc = None
        if len(points) >= 3:
            slope_det = experiments.fit_loglog_slope([(p.budget, p.mse_det) for p in points])
            slope_mc = experiments.fit_loglog_slope([(p.budget, p.mse_mc) for p in points])

        if config.csv:
            utilities.write_convergence_csv(config.csv, points, comment=cls._comment(config))
        if config.svg:
            loglog_plot.emit_svg_loglog(
                [
                    (DETERMINISTIC_LABEL, [(p.budget, p.mse_det) for p in points]),
                    (MONTE_CARLO_LABEL, [(p.budget, p.mse_mc) for p in points]),
                ],
                config.svg,
            )
        results = {
            'model': model.name,
            'density': d.descriptor,
            'split': config.split,
            'points': [point.as_dict() for point in points],
            'slope_det': slope_det,
            'slope_mc': slope_mc,
        }
        cls._write_json(config, results)
        summary = _table(
            ['Budget', 'MSE (deterministic)', 'MSE (Monte Carlo)', 'Baselines x steps'],
            [
                [
                    p.budget,
                    '{:.3e}'.format(p.mse_det),
                    '{:.3e}'.format(p.mse_mc),
                    '{} x {}'.format(p.n_baselines, p.inner_steps),
                ]
                for p in points
            ],
        )
        if slope_det is not None:
            summary += '\nlog-log slope: deterministic {:.3f}, Monte Carlo {:.3f}'.format(
                slope_det, slope_mc
            )
        return RunOutcome('convergence', results, summary)

    @classmethod
    def axioms(cls, config: RunConfig) -> RunOutcome:
        """Run the axiom scenarios with the configured density and grid size."""
        report = attribution.axiom_checks(config.resolve_density(), config.steps)
        rows = report.rows()
        if config.csv:
            utilities.write_csv(
                config.csv,
                ['axiom', 'result', 'discrepancy', 'tolerance'],
                rows,
                comment=cls._comment(config),
            )
        results = {
            'passed': report.passed,
            'checks': [asdict(outcome) for outcome in report],
        }
        cls._write_json(config, results)
        summary = _table(['Axiom', 'Result', 'Discrepancy', 'Tolerance'], rows)
        return RunOutcome('axioms', results, summary)

    @classmethod
    def residual(cls, config: RunConfig) -> RunOutcome:
        """Completeness residuals per model: direct, by parts, the closed form and the PS-IG gap."""
        path = config.path_spec()
        d = config.resolve_density()
        weight = _weight_for(config, d)
        m = config.steps
        records = []  # type: List[dict]
        for model in config.resolve_models():
            records.append(
                {
                    'model': model.name,
                    'weight': weight.descriptor,
                    'density': d.descriptor,
                    'steps': m,
                    'residual': attribution.completeness_residual(
                        model, path, weight, m, config.rule
                    ),
                    'residual_by_parts': attribution.completeness_residual_by_parts(
                        model, path, weight, m
                    ),
                    'expected_residual': attribution.psig_residual_expectation(
                        model, path, d, m
                    ),
                    'completeness_gap': attribution.expected_baseline_completeness_gap(
                        model, path, d, m
                    ),
                }
            )
        columns = [
            'model',
            'weight',
            'density',
            'steps',
            'residual',
            'residual_by_parts',
            'expected_residual',
            'completeness_gap',
        ]
        if config.csv:
            utilities.write_csv(
                config.csv,
                columns,
                [[record[c] for c in columns] for record in records],
                comment=cls._comment(config),
            )
        cls._write_json(config, records)
        summary = _table(
            ['Model', 'R(g)', 'R(g) by parts', 'E[F(b_s)] - F(x\')', 'PS-IG gap'],
            [
                [
                    r['model'],
                    r['residual'],
                    r['residual_by_parts'],
                    r['expected_residual'],
                    r['completeness_gap'],
                ]
                for r in records
            ],
        )
        return RunOutcome('residual', records, summary)
