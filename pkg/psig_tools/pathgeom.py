"""Geometry of the straight-line path gamma(alpha) = x' + alpha (x - x')."""

from typing import Union

import numpy as np

from psig_tools import exceptions
from psig_tools.model import ArrayLike, Model


# Grid nodes such as k/m can land a few ulps outside [0, 1].
BOUNDARY_TOLERANCE = 1e-12

Scalar = Union[float, np.ndarray]


class PathSpec(object):
    """Input x, initial baseline x' and the straight path between them.

    Args:
        input: The explained input x.
        baseline: The initial baseline x'.
    """

    def __init__(self, input: ArrayLike, baseline: ArrayLike) -> None:
        x = np.array(input, dtype=float)
        x_prime = np.array(baseline, dtype=float)
        if x.ndim != 1 or x.shape[0] < 1:
            raise exceptions.ValidationError('input must be a non-empty vector.')
        if x.shape != x_prime.shape:
            raise exceptions.ValidationError(
                'input and baseline must have the same dimension, got {} and {}.'.format(
                    x.shape[0], x_prime.reshape(-1).shape[0]
                )
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x_prime))):
            raise exceptions.ValidationError('All path coordinates must be finite.')
        delta = x - x_prime
        for array in (x, x_prime, delta):
            array.setflags(write=False)
        self._input = x
        self._baseline = x_prime
        self._delta = delta

    def __repr__(self):
        return 'PathSpec(input={}, baseline={})'.format(
            self._input.tolist(), self._baseline.tolist()
        )

    def __eq__(self, other):
        return (
            isinstance(other, PathSpec)
            and np.array_equal(self._input, other._input)
            and np.array_equal(self._baseline, other._baseline)
        )

    @property
    def input(self) -> np.ndarray:
        return self._input

    @property
    def baseline(self) -> np.ndarray:
        return self._baseline

    @property
    def delta(self) -> np.ndarray:
        """x - x'."""
        return self._delta

    @property
    def dim(self) -> int:
        return self._input.shape[0]

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self._delta)

    def shifted(self, offset: ArrayLike) -> 'PathSpec':
        """The path with the same offset added to both endpoints."""
        offset = np.asarray(offset, dtype=float)
        return PathSpec(self._input + offset, self._baseline + offset)


def check_unit_interval(value: Scalar, name: str = 'alpha') -> Scalar:
    """Validate that a scalar or array lies in [0, 1] and clip the rounding slack.

    Raises:
        ValidationError: If any value is outside [-1e-12, 1 + 1e-12] or not finite.
    """
    array = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(array)) or np.any(
        (array < -BOUNDARY_TOLERANCE) | (array > 1.0 + BOUNDARY_TOLERANCE)
    ):
        raise exceptions.ValidationError(
            '{} must lie in [0, 1], got {}.'.format(
                name, array.tolist() if array.size < 8 else 'out-of-range values'
            )
        )
    clipped = np.clip(array, 0.0, 1.0)
    return float(clipped) if clipped.ndim == 0 else clipped


def gamma(path: PathSpec, alpha: Scalar) -> np.ndarray:
    """gamma(alpha) = x' + alpha (x - x').

    Args:
        path: The path.
        alpha: A scalar in [0, 1], or a 1-D array of them.

    Returns:
        A point of shape ``(n,)`` for a scalar alpha, else a batch of shape ``(k, n)``.
    """
    alpha = check_unit_interval(alpha, 'alpha')
    if np.ndim(alpha) == 0:
        return path.baseline + alpha * path.delta
    return path.baseline[None, :] + np.asarray(alpha)[:, None] * path.delta[None, :]


def intermediate_baseline(path: PathSpec, s: Scalar) -> np.ndarray:
    """b_s = x' + s (x - x'): the baseline moved a fraction s towards the input."""
    s = check_unit_interval(s, 's')
    return gamma(path, s)


def path_derivative(model: Model, path: PathSpec, alpha: Scalar) -> Scalar:
    """F'(alpha) = sum_i (x_i - x'_i) dF(gamma(alpha))/dx_i."""
    points = gamma(path, alpha)
    grads = model.gradient(points)
    if grads.ndim == 1:
        return float(grads @ path.delta)
    return grads @ path.delta


def reparam_alpha(s: Scalar, u: Scalar) -> Scalar:
    """alpha = s + u (1 - s); maps the inner variable of IG(x; b_s) onto the outer path.

    Together with `intermediate_baseline` this gives b_s + u (x - b_s) = gamma(s + u (1 - s)).
    """
    s = check_unit_interval(s, 's')
    u = check_unit_interval(u, 'u')
    alpha = np.asarray(s) + np.asarray(u) * (1.0 - np.asarray(s))
    # s + u(1-s) may exceed 1 by an ulp
    alpha = np.minimum(alpha, 1.0)
    return float(alpha) if alpha.ndim == 0 else alpha
