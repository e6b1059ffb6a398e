"""Probability densities on [0, 1] used to sample intermediate baselines.

Each `Density` exposes its CDF G (the path weight of the deterministic estimator), inverse-CDF
sampling, and, for continuous kinds, the pdf p. Densities are immutable; sampling always takes an
explicit ``numpy.random.Generator`` so parallel trials can use independent seeded streams.
"""

import logging
import math
from typing import Callable, Sequence, Union

import numpy as np
import requests

from psig_tools import exceptions
from psig_tools import utilities
from psig_tools.pathgeom import check_unit_interval


logger = logging.getLogger(__name__)

Scalar = Union[float, np.ndarray]

INVERSE_CDF_TOLERANCE = 1e-12
SIMPSON_TOLERANCE = 1e-10


def _as_output(array: np.ndarray) -> Scalar:
    return float(array) if np.ndim(array) == 0 else array


class Density(object):
    """Base class for densities on [0, 1].

    Subclasses set `kind`, implement `_cdf` on arrays and, where a closed form exists, `_inverse_cdf`.
    The default inverse is bisection on G to 1e-12.
    """

    kind = None  # type: str
    is_continuous = True

    @property
    def descriptor(self) -> str:
        """The CLI string that selects this density."""
        return self.kind

    def __repr__(self):
        return 'Density({})'.format(self.descriptor)

    def pdf(self, s: Scalar) -> Scalar:
        raise exceptions.UnsupportedOperationError(
            'The {} density has no pdf.'.format(self.descriptor)
        )

    def cdf(self, alpha: Scalar) -> Scalar:
        alpha = np.asarray(check_unit_interval(alpha, 'alpha'))
        return _as_output(self._cdf(alpha))

    def inverse_cdf(self, u: Scalar) -> Scalar:
        """G^-1(u) = inf{alpha : G(alpha) >= u}."""
        u = np.asarray(check_unit_interval(u, 'u'))
        return _as_output(self._inverse_cdf(u))

    def sample(self, rng: np.random.Generator, size: int = None) -> Scalar:
        """Draw s = G^-1(U) with U uniform on [0, 1] from the given generator."""
        return self.inverse_cdf(rng.random(size))

    def _cdf(self, alpha: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        return _bisect_cdf(self._cdf, u, np.zeros_like(u), np.ones_like(u))


class UniformDensity(Density):
    kind = 'uniform'

    def pdf(self, s):
        s = np.asarray(check_unit_interval(s, 's'))
        return _as_output(np.ones_like(s))

    def _cdf(self, alpha):
        return alpha.astype(float)

    def _inverse_cdf(self, u):
        return u.astype(float)


class TriangularUpDensity(Density):
    """p(s) = 2s, G(alpha) = alpha^2."""

    kind = 'triangular'

    def pdf(self, s):
        s = np.asarray(check_unit_interval(s, 's'))
        return _as_output(2.0 * s)

    def _cdf(self, alpha):
        return alpha * alpha

    def _inverse_cdf(self, u):
        return np.sqrt(u)


class BetaDensity(Density):
    """Beta(a, b) with a, b >= 1 (bounded pdf).

    The CDF is tabulated once on `table_size` panels, each integrated by adaptive Simpson. Points
    between nodes add the partial panel: adaptive Simpson in the `edge_panels` panels next to 0 and
    1, where s^(a-1) (1-s)^(b-1) need not be smooth, and a 4-panel composite Simpson elsewhere.
    """

    kind = 'beta'
    table_size = 1024
    edge_panels = 2

    def __init__(self, a: float, b: float) -> None:
        a, b = float(a), float(b)
        if not (np.isfinite(a) and np.isfinite(b)) or a < 1.0 or b < 1.0:
            raise exceptions.ValidationError(
                'beta parameters must satisfy a >= 1 and b >= 1 (bounded pdf), '
                'got ({}, {}).'.format(a, b)
            )
        self.a = a
        self.b = b
        self._log_norm = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        self._table = None

    @property
    def descriptor(self):
        return 'beta:{:g},{:g}'.format(self.a, self.b)

    def _pdf(self, s: np.ndarray) -> np.ndarray:
        return np.exp(-self._log_norm) * np.power(s, self.a - 1.0) * np.power(
            1.0 - s, self.b - 1.0
        )

    def _scalar_pdf(self, s: float) -> float:
        return float(self._pdf(np.asarray(s)))

    def pdf(self, s):
        s = np.asarray(check_unit_interval(s, 's'))
        return _as_output(self._pdf(s))

    def _cdf_table(self) -> np.ndarray:
        if self._table is None:
            n = self.table_size
            panels = [
                adaptive_simpson(self._scalar_pdf, j / n, (j + 1) / n, SIMPSON_TOLERANCE / n)
                for j in range(n)
            ]
            table = np.concatenate([[0.0], np.cumsum(panels)])
            # the tabulated mass is 1 to within the quadrature tolerance
            table /= table[-1]
            table.setflags(write=False)
            self._table = table
        return self._table

    def _cdf(self, alpha):
        table = self._cdf_table()
        n = self.table_size
        alpha = np.asarray(alpha, dtype=float)
        shape = alpha.shape
        alpha = alpha.reshape(-1)
        index = np.minimum(np.floor(alpha * n).astype(int), n - 1)
        left = index / n
        partial = _composite_simpson(self._pdf, left, alpha, panels=4)
        edge = (index < self.edge_panels) | (index >= n - self.edge_panels)
        for k in np.flatnonzero(edge):
            partial[k] = adaptive_simpson(
                self._scalar_pdf, left[k], alpha[k], SIMPSON_TOLERANCE / n
            )
        return np.clip(table[index] + partial, 0.0, 1.0).reshape(shape)

    def _inverse_cdf(self, u):
        table = self._cdf_table()
        n = self.table_size
        index = np.clip(np.searchsorted(table, u, side='left'), 1, n)
        return _bisect_cdf(self._cdf, u, (index - 1) / n, index / n)


class PointMassDensity(Density):
    """All mass at s0; G(alpha) = 1 for alpha >= s0, else 0.

    With s0 = 0 the weight is 1 on every grid node, so PS-IG reduces to standard IG.
    """

    kind = 'pointmass'
    is_continuous = False

    def __init__(self, s0: float) -> None:
        self.s0 = check_unit_interval(float(s0), 's0')

    @property
    def descriptor(self):
        return 'pointmass:{:g}'.format(self.s0)

    def _cdf(self, alpha):
        return (alpha >= self.s0).astype(float)

    def _inverse_cdf(self, u):
        return np.full_like(u, self.s0, dtype=float)


class EmpiricalCdf(Density):
    """The step CDF of a fixed sample list: G_m(alpha) = #{j : s_j <= alpha} / m.

    Sampling picks one of the stored points uniformly.
    """

    kind = 'empirical'
    is_continuous = False

    def __init__(self, samples: Sequence[float], source: str = None) -> None:
        samples = np.sort(np.asarray(samples, dtype=float).reshape(-1))
        if samples.size == 0:
            raise exceptions.ValidationError('An empirical CDF needs at least one sample.')
        check_unit_interval(samples, 'samples')
        samples = np.clip(samples, 0.0, 1.0)
        if np.unique(samples).size != samples.size:
            logger.warning('Empirical sample list contains duplicate values.')
        samples.setflags(write=False)
        self.samples = samples
        self.source = source

    @property
    def descriptor(self):
        if self.source:
            return 'empirical:{}'.format(self.source)
        return 'empirical[{}]'.format(self.samples.size)

    def _cdf(self, alpha):
        counts = np.searchsorted(self.samples, alpha, side='right')
        return counts / self.samples.size

    def _inverse_cdf(self, u):
        m = self.samples.size
        index = np.clip(np.ceil(u * m).astype(int) - 1, 0, m - 1)
        return self.samples[index]


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tolerance: float = SIMPSON_TOLERANCE,
    max_depth: int = 50,
) -> float:
    """Integrate a scalar function over [a, b] by recursive Simpson with the Richardson (1/15) correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tolerance, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        error = left + right - whole
        if depth <= 0 or abs(error) <= 15.0 * tolerance:
            return left + right + error / 15.0
        return recurse(a, m, fa, flm, fm, left, tolerance / 2.0, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tolerance / 2.0, depth - 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tolerance, max_depth)


def _composite_simpson(pdf, left: np.ndarray, right: np.ndarray, panels: int) -> np.ndarray:
    """Vectorized composite Simpson over [left, right] elementwise; panels must be even."""
    h = (right - left) / panels
    total = pdf(left) + pdf(right)
    for k in range(1, panels):
        total = total + (4.0 if k % 2 else 2.0) * pdf(left + k * h)
    return total * h / 3.0


def _bisect_cdf(cdf, u, lo, hi):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    while np.any(hi - lo > INVERSE_CDF_TOLERANCE):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return hi


def pdf(d: Density, s: Scalar) -> Scalar:
    """p(s) for continuous densities.

    Raises:
        UnsupportedOperationError: For point-mass and empirical densities.
    """
    return d.pdf(s)


def cdf(d: Density, alpha: Scalar) -> Scalar:
    """G(alpha)."""
    return d.cdf(alpha)


def inverse_cdf(d: Density, u: Scalar) -> Scalar:
    """The generalized inverse inf{s : G(s) >= u}."""
    return d.inverse_cdf(u)


def sample(d: Density, rng: np.random.Generator, size: int = None) -> Scalar:
    """Inverse-CDF sample(s) from d using the given random source."""
    return d.sample(rng, size)


def l2_norm_sq_of_cdf(d: Density, grid_size: int = 10000) -> float:
    """The integral of G(alpha)^2 over [0, 1], by the right-endpoint rule at nodes k/grid_size.

    This is the variance ratio Var(PS-IG) / Var(IG) predicted under white gradient noise.
    """
    if int(grid_size) < 2:
        raise exceptions.ValidationError('grid_size must be at least 2.')
    grid_size = int(grid_size)
    if grid_size < 1000:
        logger.warning(
            'Evaluating the squared CDF norm of %s on a coarse grid (%d nodes).',
            d.descriptor,
            grid_size,
        )
    nodes = np.arange(1, grid_size + 1) / grid_size
    weights = np.asarray(d.cdf(nodes))
    return float(np.sum(weights * weights) / grid_size)


def is_cdf_weight(
    weight: Callable[[np.ndarray], np.ndarray], grid_size: int = 1000, tolerance: float = 1e-9
) -> bool:
    """Whether a path weight is the CDF of some density on [0, 1], i.e. a PS-IG weight.

    Checks g(0) = 0, g(1) = 1 and that g is nondecreasing on the nodes k/grid_size, k = 0..grid_size.
    """
    nodes = np.arange(0, grid_size + 1) / grid_size
    values = np.asarray(weight(nodes), dtype=float)
    if not np.all(np.isfinite(values)):
        return False
    return bool(
        abs(values[0]) <= tolerance
        and abs(values[-1] - 1.0) <= tolerance
        and np.all(np.diff(values) >= -tolerance)
    )


def load_samples(source: str) -> np.ndarray:
    """Read one real per line from a local file or an http(s) url; ``#`` lines are skipped.

    Raises:
        ValidationError: If a local sample file cannot be read or a line is not a real number.
        requests.exceptions.RequestException: If an http(s) source cannot be fetched.
    """
    try:
        text = utilities.download(source)
    except requests.exceptions.RequestException:
        raise
    except OSError as err:
        raise exceptions.ValidationError(
            'Cannot read the sample file {}: {}'.format(source, err.strerror or err)
        )
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith('#')
    ]
    return np.asarray(utilities.parse_vector(lines), dtype=float)


def parse_density(descriptor: str) -> Density:
    """Build a density from its CLI descriptor.

    Args:
        descriptor: ``uniform``, ``triangular``, ``beta:a,b``, ``pointmass:s0`` or
            ``empirical:<path-or-url>`` (one sample per line).

    Returns:
        The density.

    Raises:
        ValidationError: If the descriptor is not recognized or its parameters are invalid.
    """
    if not isinstance(descriptor, str) or not descriptor.strip():
        raise exceptions.ValidationError('A density descriptor is required.')
    kind, _, argument = descriptor.strip().partition(':')
    kind = kind.lower()
    if kind == 'uniform' and not argument:
        return UniformDensity()
    if kind in ('triangular', 'triangular_up') and not argument:
        return TriangularUpDensity()
    if kind == 'beta':
        params = utilities.parse_vector(argument)
        if len(params) != 2:
            raise exceptions.ValidationError('beta needs two parameters: beta:a,b.')
        return BetaDensity(*params)
    if kind in ('pointmass', 'point_mass'):
        params = utilities.parse_vector(argument)
        if len(params) != 1:
            raise exceptions.ValidationError('pointmass needs one location: pointmass:s0.')
        return PointMassDensity(params[0])
    if kind == 'empirical' and argument:
        return EmpiricalCdf(load_samples(argument), source=argument)
    raise exceptions.ValidationError(
        'Unknown density {!r}; use uniform, triangular, beta:a,b, pointmass:s0 '
        'or empirical:<file>.'.format(descriptor)
    )
