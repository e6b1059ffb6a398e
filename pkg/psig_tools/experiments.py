"""Desk-scale experiments: gradient-noise variance study and estimator convergence study.

Every trial and Monte Carlo repeat draws from its own random substream derived from the run seed, so
reports are bit-identical between runs with the same seed and between sequential and threaded runs.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from psig_tools import exceptions
from psig_tools import utilities
from psig_tools.attribution import (
    WeightFn,
    attribute_from_gradients,
    grid_nodes,
    psig_det,
    psig_mc,
)
from psig_tools.density import Density, l2_norm_sq_of_cdf
from psig_tools.model import Model
from psig_tools.pathgeom import PathSpec, gamma


logger = logging.getLogger(__name__)

MIN_TRIALS = 100
PREDICTION_GRID = 10000
SPLITS = ('fixed', 'balanced')


@dataclass(frozen=True)
class NoiseModel(object):
    """I.i.d. N(0, sigma^2) noise added to every partial derivative at each of the m grid nodes."""

    sigma: float = 1.0
    grid_steps: int = 100
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise exceptions.ValidationError('sigma must be positive, got {}.'.format(self.sigma))
        if int(self.grid_steps) != self.grid_steps or self.grid_steps < 1:
            raise exceptions.ValidationError(
                'grid_steps must be a positive integer, got {}.'.format(self.grid_steps)
            )


@dataclass(frozen=True)
class VarianceReport(object):
    model_name: str
    density_name: str
    trials: int
    var_ig: float
    var_ps: float
    ratio: float
    predicted_ratio: float
    discrete_ratio: float
    sigma: float
    grid_steps: int
    feature: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConvergencePoint(object):
    """MSE of both estimators at one budget of gradient evaluations."""

    budget: int
    mse_det: float
    mse_mc: float
    n_baselines: int
    inner_steps: int

    def as_dict(self) -> dict:
        return asdict(self)


def _map(func: Callable, items: Iterable, workers: int) -> List:
    if workers is None or workers <= 1:
        return list(map(func, items))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def variance_study(
    model: Model,
    path: PathSpec,
    d: Density,
    noise: NoiseModel,
    trials: int,
    feature: int = 0,
    workers: int = 1,
) -> VarianceReport:
    """Empirical variance of IG and deterministic PS-IG under white gradient noise.

    Each trial perturbs the true gradients at the m grid nodes with i.i.d. N(0, sigma^2) noise and
    computes both estimators from the same noisy gradients; the attribution of `feature` is recorded.

    Args:
        model: The model whose gradients are perturbed.
        path: Input and baseline.
        d: A continuous sampling density.
        noise: Noise level, grid size and seed.
        trials: Number of trials, at least 100.
        feature: Index of the recorded feature.
        workers: Threads used to run trials.

    Returns:
        A `VarianceReport` with unbiased sample variances and their ratio.

    Raises:
        VarianceAssumptionError: If d is a point mass or an empirical CDF.
        ValidationError: If trials < 100 or the path does not move along `feature`.
    """
    if not d.is_continuous:
        raise exceptions.VarianceAssumptionError(
            'The variance law needs a density continuous on (0, 1); {} is not.'.format(
                d.descriptor
            )
        )
    if int(trials) != trials or trials < MIN_TRIALS:
        raise exceptions.ValidationError(
            'trials must be an integer >= {}, got {}.'.format(MIN_TRIALS, trials)
        )
    if not 0 <= feature < path.dim or path.delta[feature] == 0.0:
        raise exceptions.ValidationError(
            'Feature {} does not move along the path; its variance ratio is undefined.'.format(
                feature
            )
        )
    m = noise.grid_steps
    nodes = grid_nodes(m)
    true_grads = model.gradient(gamma(path, nodes))
    ig_weights = np.ones(m)
    ps_weights = np.asarray(d.cdf(nodes), dtype=float)
    logger.info(
        'Variance study: model=%s density=%s sigma=%g m=%d trials=%d',
        model.name,
        d.descriptor,
        noise.sigma,
        m,
        trials,
    )

    def trial(index: int) -> Tuple[float, float]:
        rng = utilities.random_substream(noise.seed, index)
        noisy = true_grads + rng.normal(0.0, noise.sigma, size=true_grads.shape)
        ig_value = attribute_from_gradients(path, ig_weights, noisy)[feature]
        ps_value = attribute_from_gradients(path, ps_weights, noisy)[feature]
        return ig_value, ps_value

    samples = np.array(_map(trial, range(trials), workers))
    var_ig = float(np.var(samples[:, 0], ddof=1))
    var_ps = float(np.var(samples[:, 1], ddof=1))
    report = VarianceReport(
        model_name=model.name,
        density_name=d.descriptor,
        trials=int(trials),
        var_ig=var_ig,
        var_ps=var_ps,
        ratio=var_ps / var_ig,
        predicted_ratio=l2_norm_sq_of_cdf(d, PREDICTION_GRID),
        discrete_ratio=float(np.sum(ps_weights * ps_weights) / m),
        sigma=noise.sigma,
        grid_steps=m,
        feature=feature,
    )
    logger.info(
        'Variance study %s: ratio %.4f (predicted %.4f)',
        model.name,
        report.ratio,
        report.predicted_ratio,
    )
    return report


def variance_table(
    models: Sequence[Model],
    path: PathSpec,
    d: Density,
    noise: NoiseModel,
    trials: int,
    feature: int = 0,
    workers: int = 1,
) -> List[VarianceReport]:
    """One `variance_study` row per model.

    Row i draws its noise from the substream seeded by ``(noise.seed, i)``, so rows are independent
    replicates and the whole table is reproducible from the single seed.
    """
    return [
        variance_study(
            model,
            path,
            d,
            replace(noise, seed=utilities.derived_seed(noise.seed, index)),
            trials,
            feature=feature,
            workers=workers,
        )
        for index, model in enumerate(models)
    ]


def weight_variance_factor(weight: WeightFn, m: int) -> float:
    """(1/m) sum_k w(k/m)^2: the factor by which weight w scales IG's noise variance on m nodes."""
    values = weight(grid_nodes(m))
    return float(np.sum(values * values) / m)


def mc_split(budget: int, inner_steps: int = 10, split: str = 'fixed') -> Tuple[int, int]:
    """Divide a budget of gradient evaluations between baselines and inner steps.

    ``fixed`` keeps `inner_steps` and spends the rest on baselines, so the Monte Carlo variance falls
    like 1/budget. ``balanced`` uses max(10, round(sqrt(budget))) inner steps.

    Returns:
        ``(n_baselines, inner_steps)`` with n_baselines * inner_steps <= budget.

    Raises:
        BudgetError: If the budget cannot pay for a single baseline.
    """
    if split not in SPLITS:
        raise exceptions.ValidationError(
            'Unknown split {!r}; choose from {}.'.format(split, SPLITS)
        )
    if split == 'balanced':
        inner_steps = max(10, int(round(math.sqrt(budget))))
    if int(inner_steps) != inner_steps or inner_steps < 1:
        raise exceptions.ValidationError('inner_steps must be a positive integer.')
    n_baselines = int(budget) // int(inner_steps)
    if n_baselines < 1:
        raise exceptions.BudgetError(
            'Budget {} is smaller than one Monte Carlo baseline of {} inner steps.'.format(
                budget, inner_steps
            )
        )
    return n_baselines, int(inner_steps)


def _check_budgets(budgets: Sequence[int], ground_truth_steps: int) -> List[int]:
    budgets = [int(b) for b in budgets]
    if not budgets:
        raise exceptions.BudgetError('At least one budget is required.')
    if any(b < 1 for b in budgets):
        raise exceptions.BudgetError('Budgets must be positive, got {}.'.format(budgets))
    if any(later <= earlier for earlier, later in zip(budgets, budgets[1:])):
        raise exceptions.BudgetError(
            'Budgets must be sorted ascending, got {}.'.format(budgets)
        )
    if ground_truth_steps < 10 * budgets[-1]:
        raise exceptions.BudgetError(
            'ground_truth_steps={} must be at least 10x the largest budget ({}).'.format(
                ground_truth_steps, budgets[-1]
            )
        )
    return budgets


def _squared_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    diff = estimate - truth
    return float(np.dot(diff, diff))


def convergence_study(
    model: Model,
    path: PathSpec,
    d: Density,
    budgets: Sequence[int],
    mc_repeats: int,
    ground_truth_steps: int,
    seed: int,
    inner_steps: int = 10,
    split: str = 'fixed',
    workers: int = 1,
) -> List[ConvergencePoint]:
    """MSE against a fine-grid ground truth for deterministic and Monte Carlo PS-IG at equal budgets.

    The ground truth is `psig_det` at `ground_truth_steps`. At budget B the deterministic estimator uses
    m = B nodes; the Monte Carlo estimator uses the `mc_split` of B with midpoint inner nodes and is
    repeated `mc_repeats` times, repeat r of budget j drawing from the substream (seed, j, r).

    Raises:
        BudgetError: For unsorted budgets, a ground truth grid finer than 10x the largest budget, or a
            budget below one Monte Carlo baseline.
    """
    budgets = _check_budgets(budgets, ground_truth_steps)
    if int(mc_repeats) != mc_repeats or mc_repeats < 1:
        raise exceptions.ValidationError('mc_repeats must be a positive integer.')
    splits = [mc_split(budget, inner_steps, split) for budget in budgets]
    if split == 'balanced':
        logger.warning(
            'Balanced Monte Carlo split: MSE falls like budget^(-1/2), not budget^(-1).'
        )
    logger.info(
        'Convergence study: model=%s density=%s budgets=%s repeats=%d truth m=%d',
        model.name,
        d.descriptor,
        budgets,
        mc_repeats,
        ground_truth_steps,
    )
    truth = psig_det(model, path, d, ground_truth_steps).values

    points = []
    for index, (budget, (n_baselines, inner)) in enumerate(zip(budgets, splits)):
        mse_det = _squared_error(psig_det(model, path, d, budget).values, truth)

        def repeat(r: int, index=index, n_baselines=n_baselines, inner=inner) -> float:
            estimate = psig_mc(
                model,
                path,
                d,
                n_baselines,
                inner,
                utilities.derived_seed(seed, index, r),
                rule='midpoint',
            )
            return _squared_error(estimate.values, truth)

        mse_mc = float(np.mean(_map(repeat, range(mc_repeats), workers)))
        logger.debug(
            'Budget %d: mse_det=%g mse_mc=%g (%d baselines x %d steps)',
            budget,
            mse_det,
            mse_mc,
            n_baselines,
            inner,
        )
        points.append(ConvergencePoint(budget, mse_det, mse_mc, n_baselines, inner))
    return points


def fit_loglog_slope(points: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of log(mse) against log(budget).

    Raises:
        ValidationError: With fewer than three points or a non-positive coordinate.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 3 or points.shape[1] != 2:
        raise exceptions.ValidationError('At least three (budget, mse) points are required.')
    if not np.all(np.isfinite(points)) or np.any(points <= 0.0):
        raise exceptions.ValidationError('Slope fitting needs positive budgets and errors.')
    slope, _ = np.polyfit(np.log(points[:, 0]), np.log(points[:, 1]), 1)
    return float(slope)


def deterministic_error_constants(
    model: Model,
    path: PathSpec,
    d: Density,
    steps: Sequence[int],
    reference_steps: int = 100000,
) -> List[float]:
    """m * |psig_det(m) - psig_det(reference)|_inf for each m; roughly constant for smooth models."""
    reference = psig_det(model, path, d, reference_steps).values
    return [
        float(m * np.max(np.abs(psig_det(model, path, d, m).values - reference)))
        for m in steps
    ]
