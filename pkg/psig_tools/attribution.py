"""Path attribution estimators: IG, path-weighted IG and path-sampled IG.

All deterministic estimators share one quadrature: nodes alpha_k on [0, 1] (right endpoints k/m by
default, midpoints (k - 1/2)/m behind ``rule='midpoint'``) and

    values_i = (x_i - x'_i) * (1/m) * sum_k w(alpha_k) * dF(gamma(alpha_k))/dx_i

with w = 1 for IG, w = g for PWIG and w = G (the sampling CDF) for deterministic PS-IG. Because they go
through the same reduction, PWIG with g = 1 reproduces IG bit for bit, and PWIG with g = G reproduces
deterministic PS-IG bit for bit.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from psig_tools import exceptions
from psig_tools import utilities
from psig_tools.density import Density, PointMassDensity, UniformDensity
from psig_tools.model import (
    LinearCombinationModel,
    MlpModel,
    Model,
    QuadraticModel,
    builtin_model,
)
from psig_tools.pathgeom import (
    PathSpec,
    check_unit_interval,
    gamma,
    intermediate_baseline,
    reparam_alpha,
)


logger = logging.getLogger(__name__)

RULES = ('right', 'midpoint')

# baselines evaluated per vectorized batch in the Monte Carlo estimator
_MC_CHUNK = 512


@dataclass(frozen=True)
class AttributionResult(object):
    """Per-feature attributions with the metadata of the estimator that produced them.

    `stderr` is the per-coordinate empirical standard error of the mean for Monte Carlo results and
    None for deterministic ones.
    """

    values: np.ndarray
    estimator: str
    steps: int
    density_or_weight: str
    sum: float
    rule: str = 'right'
    n_baselines: Optional[int] = None
    stderr: Optional[np.ndarray] = None

    @classmethod
    def build(
        cls,
        values: np.ndarray,
        estimator: str,
        steps: int,
        density_or_weight: str,
        rule: str = 'right',
        n_baselines: int = None,
        stderr: np.ndarray = None,
    ) -> 'AttributionResult':
        values = np.array(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise exceptions.NonFiniteEvaluationError(
                '{} produced non-finite attributions {}.'.format(
                    estimator, values.tolist()
                )
            )
        values.setflags(write=False)
        return cls(
            values=values,
            estimator=estimator,
            steps=int(steps),
            density_or_weight=density_or_weight,
            sum=float(np.sum(values)),
            rule=rule,
            n_baselines=n_baselines,
            stderr=stderr,
        )

    def as_dict(self) -> dict:
        return {
            'values': self.values.tolist(),
            'estimator': self.estimator,
            'steps': self.steps,
            'density_or_weight': self.density_or_weight,
            'sum': self.sum,
            'rule': self.rule,
            'n_baselines': self.n_baselines,
            'stderr': None if self.stderr is None else self.stderr.tolist(),
        }


class WeightFn(object):
    """A nonnegative path weight g: [0, 1] -> R+ with a descriptor for reports.

    Args:
        func: Vectorized callable mapping an array of alphas to an array of weights.
        descriptor: Short human-readable name, e.g. ``identity`` or ``cdf:uniform``.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], descriptor: str) -> None:
        self.func = func
        self.descriptor = descriptor

    def __repr__(self):
        return 'WeightFn({})'.format(self.descriptor)

    def __call__(self, alpha):
        alpha = np.asarray(check_unit_interval(alpha, 'alpha'), dtype=float)
        values = np.broadcast_to(np.asarray(self.func(alpha), dtype=float), alpha.shape)
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise exceptions.InvalidWeightError(
                'Weight {} must be finite and nonnegative on [0, 1].'.format(
                    self.descriptor
                )
            )
        return values

    @classmethod
    def constant(cls, c: float = 1.0) -> 'WeightFn':
        c = float(c)
        return cls(lambda alpha: np.full_like(alpha, c), 'constant:{:g}'.format(c))

    @classmethod
    def identity(cls) -> 'WeightFn':
        return cls(lambda alpha: alpha, 'identity')

    @classmethod
    def from_density(cls, d: Density) -> 'WeightFn':
        """g = G, the CDF of the density; PWIG with this weight is PS-IG."""
        return cls(lambda alpha: np.asarray(d.cdf(alpha)), 'cdf:{}'.format(d.descriptor))

    @classmethod
    def from_callable(cls, func: Callable, descriptor: str) -> 'WeightFn':
        return cls(func, descriptor)


def grid_nodes(m: int, rule: str = 'right') -> np.ndarray:
    """Quadrature nodes on [0, 1]: k/m (k = 1..m) or (k - 1/2)/m."""
    _check_steps(m, 'm')
    if rule not in RULES:
        raise exceptions.ValidationError(
            'Unknown quadrature rule {!r}; choose from {}.'.format(rule, RULES)
        )
    k = np.arange(1, m + 1, dtype=float)
    if rule == 'midpoint':
        return (k - 0.5) / m
    return k / m


def _check_steps(m: int, name: str, minimum: int = 1) -> None:
    if isinstance(m, bool) or int(m) != m or m < minimum:
        raise exceptions.ValidationError(
            '{} must be an integer >= {}, got {!r}.'.format(name, minimum, m)
        )


def _check_dims(model: Model, path: PathSpec) -> None:
    if model.dim != path.dim:
        raise exceptions.ValidationError(
            'Model {} has dimension {} but the path has dimension {}.'.format(
                model.name, model.dim, path.dim
            )
        )


def _weighted_gradient_mean(weights: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """(1/m) sum_k w_k grad_k, reducing every feature column with the same operations."""
    return (weights[:, None] * grads).sum(axis=0) / grads.shape[0]


def attribute_from_gradients(
    path: PathSpec, weights: np.ndarray, grads: np.ndarray
) -> np.ndarray:
    """Attributions from precomputed (possibly perturbed) gradients at the grid nodes.

    Args:
        path: The path the gradients were taken along.
        weights: Path weight at each of the m nodes, shape ``(m,)``.
        grads: Gradients at the same nodes, shape ``(m, n)``.

    Returns:
        The attribution vector, computed exactly as `pwig` does.
    """
    weights = np.asarray(weights, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if grads.ndim != 2 or grads.shape != (weights.shape[0], path.dim):
        raise exceptions.ValidationError(
            'Expected gradients of shape ({}, {}), got {}.'.format(
                weights.shape[0], path.dim, grads.shape
            )
        )
    return path.delta * _weighted_gradient_mean(weights, grads)


def _path_integral(
    model: Model,
    path: PathSpec,
    weights: np.ndarray,
    nodes: np.ndarray,
    estimator: str,
    descriptor: str,
    rule: str,
) -> AttributionResult:
    _check_dims(model, path)
    m = nodes.shape[0]
    if path.is_degenerate:
        logger.warning('Degenerate path (input equals baseline); attributions are zero.')
        return AttributionResult.build(np.zeros(path.dim), estimator, m, descriptor, rule)
    grads = model.gradient(gamma(path, nodes))
    values = attribute_from_gradients(path, weights, grads)
    return AttributionResult.build(values, estimator, m, descriptor, rule)


def ig(model: Model, path: PathSpec, m: int, rule: str = 'right') -> AttributionResult:
    """Integrated gradients by an m-node Riemann sum along the straight path.

    Args:
        model: The differentiable model F.
        path: Input x and baseline x'.
        m: Number of gradient evaluations.
        rule: ``right`` (nodes k/m) or ``midpoint``.

    Returns:
        values_i = (x_i - x'_i) (1/m) sum_k dF(gamma(alpha_k))/dx_i.
    """
    nodes = grid_nodes(m, rule)
    return _path_integral(model, path, np.ones(m), nodes, 'ig', 'constant:1', rule)


def pwig(
    model: Model, path: PathSpec, weight: WeightFn, m: int, rule: str = 'right'
) -> AttributionResult:
    """Path-weighted integrated gradients: IG with the weight g(alpha) inside the path integral.

    Raises:
        InvalidWeightError: If g is negative or non-finite on a node.
    """
    nodes = grid_nodes(m, rule)
    weights = weight(nodes)
    return _path_integral(model, path, weights, nodes, 'pwig', weight.descriptor, rule)


def psig_det(
    model: Model, path: PathSpec, d: Density, m: int, rule: str = 'right'
) -> AttributionResult:
    """Path-sampled IG through its deterministic form: PWIG weighted by the sampling CDF G.

    This is the m-node Riemann estimator whose error falls as O(1/m) for smooth models.
    """
    nodes = grid_nodes(m, rule)
    weights = np.asarray(d.cdf(nodes), dtype=float)
    return _path_integral(model, path, weights, nodes, 'psig_det', d.descriptor, rule)


def ig_from_intermediate_baseline(
    model: Model, path: PathSpec, s: float, inner_steps: int, rule: str = 'right'
) -> np.ndarray:
    """IG(x; b_s): standard IG from the intermediate baseline b_s to the input.

    The inner path b_s + u (x - b_s) is evaluated as gamma(s + u (1 - s)), so every baseline reuses the
    outer path geometry.
    """
    return _per_baseline_ig(model, path, np.asarray([s], dtype=float), inner_steps, rule)[0]


def _per_baseline_ig(
    model: Model, path: PathSpec, samples: np.ndarray, inner_steps: int, rule: str
) -> np.ndarray:
    """IG(x; b_{s_j}) for every sample, as a ``(len(samples), n)`` array."""
    _check_dims(model, path)
    u = grid_nodes(inner_steps, rule)
    samples = np.asarray(check_unit_interval(samples, 's'), dtype=float).reshape(-1)
    results = []
    for start in range(0, samples.shape[0], _MC_CHUNK):
        chunk = samples[start:start + _MC_CHUNK]
        alphas = reparam_alpha(chunk[:, None], u[None, :])
        grads = model.gradient(gamma(path, np.ravel(alphas)))
        grads = grads.reshape(chunk.shape[0], inner_steps, path.dim)
        inner_mean = grads.sum(axis=1) / inner_steps
        # x - b_s = (1 - s)(x - x')
        spans = path.input[None, :] - np.atleast_2d(intermediate_baseline(path, chunk))
        results.append(spans * inner_mean)
    return np.concatenate(results, axis=0)


def psig_from_samples(
    model: Model,
    path: PathSpec,
    samples: Sequence[float],
    inner_steps: int,
    rule: str = 'right',
    descriptor: str = None,
) -> AttributionResult:
    """Average of IG(x; b_{s_j}) over an explicit list of baseline positions s_j.

    Returns:
        The mean attribution with the per-coordinate standard error of the mean (None for one sample).
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    if samples.size == 0:
        raise exceptions.ValidationError('At least one baseline sample is required.')
    _check_steps(inner_steps, 'inner_steps')
    descriptor = descriptor or 'samples[{}]'.format(samples.size)
    if path.is_degenerate:
        logger.warning('Degenerate path (input equals baseline); attributions are zero.')
        return AttributionResult.build(
            np.zeros(path.dim), 'psig_mc', inner_steps, descriptor, rule, samples.size
        )
    per_baseline = _per_baseline_ig(model, path, samples, inner_steps, rule)
    stderr = None
    if samples.size > 1:
        stderr = per_baseline.std(axis=0, ddof=1) / np.sqrt(samples.size)
    return AttributionResult.build(
        per_baseline.mean(axis=0),
        'psig_mc',
        inner_steps,
        descriptor,
        rule,
        n_baselines=samples.size,
        stderr=stderr,
    )


def draw_baselines(d: Density, n_baselines: int, seed: int) -> np.ndarray:
    """s_1..s_n from d, baseline j drawn from its own substream derived from (seed, j)."""
    _check_steps(n_baselines, 'n_baselines')
    uniforms = np.array(
        [utilities.random_substream(seed, j).random() for j in range(n_baselines)]
    )
    return np.asarray(d.inverse_cdf(uniforms), dtype=float).reshape(-1)


def psig_mc(
    model: Model,
    path: PathSpec,
    d: Density,
    n_baselines: int,
    inner_steps: int,
    seed: int,
    rule: str = 'right',
) -> AttributionResult:
    """Path-sampled IG by Monte Carlo: average IG over n baselines b_s with s drawn from d.

    Each baseline costs `inner_steps` gradient evaluations. The result is deterministic given the seed
    and does not depend on evaluation order.
    """
    samples = draw_baselines(d, n_baselines, seed)
    return psig_from_samples(
        model, path, samples, inner_steps, rule, descriptor=d.descriptor
    )


def psig_on_shared_grid(
    model: Model, path: PathSpec, samples: Sequence[float], m: int
) -> AttributionResult:
    """Average of per-baseline IGs with every inner integral taken on the common grid k/m.

    IG(x; b_s) = (x_i - x'_i) * integral over [s, 1] of dF(gamma(alpha))/dx_i, discretized as
    (1/m) times the sum over nodes k/m >= s. Averaging over the samples gives PWIG with the empirical
    CDF of the samples as weight on the same grid.
    """
    _check_dims(model, path)
    samples = np.asarray(check_unit_interval(samples, 's'), dtype=float).reshape(-1)
    if samples.size == 0:
        raise exceptions.ValidationError('At least one baseline sample is required.')
    nodes = grid_nodes(m, 'right')
    grads = model.gradient(gamma(path, nodes))
    per_baseline = np.array(
        [
            path.delta * _weighted_gradient_mean((nodes >= s).astype(float), grads)
            for s in samples
        ]
    )
    return AttributionResult.build(
        per_baseline.mean(axis=0),
        'psig_mc',
        m,
        'samples[{}]'.format(samples.size),
        'right',
        n_baselines=samples.size,
    )


def _delta_f(model: Model, path: PathSpec) -> float:
    return model.evaluate(path.input) - model.evaluate(path.baseline)


def completeness_residual(
    model: Model, path: PathSpec, weight: WeightFn, m: int, rule: str = 'right'
) -> float:
    """R(g) = F(x) - F(x') - sum_i PWIG_i, computed on the grid.

    R vanishes (up to quadrature error) iff g = 1 wherever F' is nonzero.
    """
    _check_steps(m, 'm', minimum=2)
    return _delta_f(model, path) - pwig(model, path, weight, m, rule).sum


def completeness_residual_by_parts(
    model: Model, path: PathSpec, weight: WeightFn, m: int
) -> float:
    """The residual through integration by parts:

    R(g) = dF - (g(1) F(x) - g(0) F(x')) + integral of g'(alpha) F(gamma(alpha)).

    g' uses centered differences at interior nodes and one-sided differences at the ends; the
    integral uses the right-endpoint rule on k/m.
    """
    _check_steps(m, 'm', minimum=2)
    _check_dims(model, path)
    nodes = np.arange(0, m + 1, dtype=float) / m
    g = weight(nodes)
    g_prime = np.gradient(g, 1.0 / m)
    outputs = model.evaluate(gamma(path, nodes))
    integral = float(np.sum(g_prime[1:] * outputs[1:]) / m)
    boundary = g[-1] * outputs[-1] - g[0] * outputs[0]
    return float(_delta_f(model, path) - boundary + integral)


def expected_output_along_path(model: Model, path: PathSpec, d: Density, m: int) -> float:
    """E_{s~d}[F(b_s)] on the grid k/m.

    Continuous densities use (1/m) sum_k p(k/m) F(gamma(k/m)); point masses and empirical CDFs use the
    Stieltjes sum over CDF increments on k = 0..m, which places an atom at 0 on F(x').
    """
    _check_steps(m, 'm', minimum=2)
    _check_dims(model, path)
    if d.is_continuous:
        nodes = grid_nodes(m, 'right')
        weights = np.asarray(d.pdf(nodes), dtype=float) / m
    else:
        nodes = np.arange(0, m + 1, dtype=float) / m
        cdf = np.asarray(d.cdf(nodes), dtype=float)
        weights = np.diff(cdf, prepend=0.0)
    outputs = model.evaluate(gamma(path, nodes))
    return float(np.sum(weights * outputs))


def psig_residual_expectation(model: Model, path: PathSpec, d: Density, m: int) -> float:
    """The PS-IG completeness residual in closed form: E_{s~d}[F(gamma(s))] - F(x')."""
    return expected_output_along_path(model, path, d, m) - model.evaluate(path.baseline)


def expected_baseline_completeness_gap(
    model: Model, path: PathSpec, d: Density, m: int
) -> float:
    """|sum_i PSIG_i - (F(x) - E[F(b_s)])| for the deterministic estimator on m nodes.

    PS-IG is complete with respect to the expected baseline output, so the gap is pure quadrature error.
    """
    total = psig_det(model, path, d, m).sum
    target = model.evaluate(path.input) - expected_output_along_path(model, path, d, m)
    return abs(total - target)


@dataclass(frozen=True)
class AxiomOutcome(object):
    name: str
    passed: bool
    discrepancy: float
    tolerance: float


class AxiomReport(object):
    """Pass/fail outcomes of the axiom scenarios, in the order they were run."""

    def __init__(self, outcomes: Sequence[AxiomOutcome]) -> None:
        self.outcomes = list(outcomes)

    def __iter__(self):
        return iter(self.outcomes)

    def __getitem__(self, name: str) -> AxiomOutcome:
        for outcome in self.outcomes:
            if outcome.name == name:
                return outcome
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    def rows(self):
        return [
            (o.name, 'pass' if o.passed else 'FAIL', o.discrepancy, o.tolerance)
            for o in self.outcomes
        ]


def check_linearity(
    a: float,
    first: Model,
    b: float,
    second: Model,
    path: PathSpec,
    d: Density,
    m: int,
    tolerance: float = 1e-10,
) -> AxiomOutcome:
    """PSIG(aF1 + bF2) = a PSIG(F1) + b PSIG(F2), coordinatewise."""
    combined = LinearCombinationModel(
        '{:g}*{}+{:g}*{}'.format(a, first.name, b, second.name),
        [(a, first), (b, second)],
    )
    lhs = psig_det(combined, path, d, m).values
    rhs = a * psig_det(first, path, d, m).values + b * psig_det(second, path, d, m).values
    discrepancy = float(np.max(np.abs(lhs - rhs)))
    return AxiomOutcome('linearity', discrepancy < tolerance, discrepancy, tolerance)


def check_dummy(
    model: Model, path: PathSpec, d: Density, m: int, feature: int
) -> AxiomOutcome:
    """A feature the model never uses gets exactly zero attribution.

    Raises:
        MisconfiguredScenarioError: If the gradient of `feature` is nonzero somewhere on the grid.
    """
    _check_feature(feature, path.dim)
    grads = model.gradient(gamma(path, grid_nodes(m)))
    if np.any(grads[:, feature] != 0.0):
        raise exceptions.MisconfiguredScenarioError(
            'Model {} depends on feature {}; it is not a dummy.'.format(model.name, feature)
        )
    discrepancy = abs(float(psig_det(model, path, d, m).values[feature]))
    return AxiomOutcome('dummy', discrepancy == 0.0, discrepancy, 0.0)


def check_symmetry(
    model: Model, path: PathSpec, d: Density, m: int, i: int, j: int
) -> AxiomOutcome:
    """If F is symmetric in (i, j), x_i = x_j and x'_i = x'_j, then PSIG_i = PSIG_j exactly.

    Raises:
        MisconfiguredScenarioError: If the path coordinates differ or F is not symmetric near the path.
    """
    _check_feature(i, path.dim)
    _check_feature(j, path.dim)
    if path.input[i] != path.input[j] or path.baseline[i] != path.baseline[j]:
        raise exceptions.MisconfiguredScenarioError(
            'Symmetry needs x_{0} = x_{1} and x\'_{0} = x\'_{1}.'.format(i, j)
        )
    # check points around the path so that points with x_i = x_j do not hide an asymmetric F
    points = gamma(path, grid_nodes(m))
    points = points + utilities.random_substream(0).uniform(-0.5, 0.5, size=points.shape)
    swapped = points.copy()
    swapped[:, [i, j]] = swapped[:, [j, i]]
    if not np.allclose(model.evaluate(points), model.evaluate(swapped)):
        raise exceptions.MisconfiguredScenarioError(
            'Model {} is not symmetric in features {} and {}.'.format(model.name, i, j)
        )
    values = psig_det(model, path, d, m).values
    discrepancy = abs(float(values[i] - values[j]))
    return AxiomOutcome('symmetry', discrepancy == 0.0, discrepancy, 0.0)


def check_implementation_invariance(
    model: MlpModel, path: PathSpec, d: Density, m: int, tolerance: float = 1e-12
) -> AxiomOutcome:
    """Two weight layouts of the same network (hidden units reversed) give the same attributions."""
    permutation = list(range(model.layer_sizes[1]))[::-1]
    twin = model.permuted(1, permutation)
    discrepancy = float(
        np.max(np.abs(psig_det(model, path, d, m).values - psig_det(twin, path, d, m).values))
    )
    return AxiomOutcome(
        'implementation_invariance', discrepancy < tolerance, discrepancy, tolerance
    )


def check_ig_equivalence(model: Model, path: PathSpec, m: int) -> AxiomOutcome:
    """PS-IG with all mass at s = 0 is standard IG, bit for bit on the same grid."""
    reference = ig(model, path, m).values
    values = psig_det(model, path, PointMassDensity(0.0), m).values
    discrepancy = float(np.max(np.abs(values - reference)))
    return AxiomOutcome(
        'pointmass_equals_ig', bool(np.array_equal(values, reference)), discrepancy, 0.0
    )


def check_ig_completeness(model: Model, path: PathSpec, m: int) -> AxiomOutcome:
    """With g = 1 the residual is quadrature error only: |R| < 10/m."""
    residual = abs(completeness_residual(model, path, WeightFn.constant(1.0), m))
    tolerance = 10.0 / m
    return AxiomOutcome('ig_completeness', residual < tolerance, residual, tolerance)


def check_shift_covariance(
    model: Model,
    path: PathSpec,
    d: Density,
    m: int,
    offset: float = 0.5,
    tolerance: float = 1e-12,
) -> AxiomOutcome:
    """Moving both endpoints by the same offset leaves the attributions of a linear model unchanged."""
    shifted = path.shifted(np.full(path.dim, offset))
    discrepancy = float(
        np.max(np.abs(psig_det(model, path, d, m).values - psig_det(model, shifted, d, m).values))
    )
    return AxiomOutcome('shift_covariance', discrepancy < tolerance, discrepancy, tolerance)


def _check_feature(feature: int, dim: int) -> None:
    if not 0 <= int(feature) < dim:
        raise exceptions.MisconfiguredScenarioError(
            'Feature index {} is out of range for dimension {}.'.format(feature, dim)
        )


def axiom_checks(d: Density = None, m: int = 1000) -> AxiomReport:
    """Run the standard axiom scenarios for PS-IG with density d (uniform by default).

    Scenarios:
        linearity: F = 2 linear3 + 3 quadratic3 on x = (1, 1, 1), x' = 0.
        dummy: F = x1^2 + x2, feature x3.
        symmetry: F = x1 x2 + x3 on x = (1, 1, 0.5), x' = 0, features x1 and x2.
        implementation invariance: mlp3_tanh against its hidden-unit permutation.
        point mass at 0 against IG, and IG completeness, on quadratic3.
        shift covariance of linear3.
    """
    d = d or UniformDensity()
    _check_steps(m, 'm', minimum=2)
    logger.info('Running axiom checks with density %s and m=%d', d.descriptor, m)
    unit_path = PathSpec([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
    linear3 = builtin_model('linear3')
    quadratic3 = builtin_model('quadratic3')
    dummy_model = QuadraticModel('x1^2+x2', A=np.diag([2.0, 0.0, 0.0]), b=[0.0, 1.0, 0.0])
    symmetric_model = QuadraticModel(
        'x1*x2+x3',
        A=[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        b=[0.0, 0.0, 1.0],
    )
    outcomes = [
        check_linearity(2.0, linear3, 3.0, quadratic3, unit_path, d, m),
        check_dummy(dummy_model, unit_path, d, m, feature=2),
        check_symmetry(
            symmetric_model, PathSpec([1.0, 1.0, 0.5], [0.0, 0.0, 0.0]), d, m, 0, 1
        ),
        check_implementation_invariance(builtin_model('mlp3_tanh'), unit_path, d, m),
        check_ig_equivalence(quadratic3, unit_path, m),
        check_ig_completeness(quadratic3, unit_path, m),
        check_shift_covariance(linear3, unit_path, d, m),
    ]
    for outcome in outcomes:
        if not outcome.passed:
            logger.warning(
                'Axiom %s failed: discrepancy %g (tolerance %g)',
                outcome.name,
                outcome.discrepancy,
                outcome.tolerance,
            )
    return AxiomReport(outcomes)
