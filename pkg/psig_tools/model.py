"""Differentiable scalar models with exact gradient oracles.

Every model maps a point of shape ``(n,)`` to a float, or a batch of shape ``(k, n)`` to an array of
shape ``(k,)``; `Model.gradient` returns the matching ``(n,)`` / ``(k, n)`` array. Gradients are
analytic (or a hand-written reverse pass for `MlpModel`) and are audited by `check_gradient`.
"""

import logging
import os
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from psig_tools import exceptions
from psig_tools import utilities


logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]

_DEFAULT_MLP_CONFIG = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), 'data', 'mlp_tanh_341.cfg'
)


class Model(object):
    """A differentiable scalar function F: R^n -> R with an exact gradient.

    Subclasses implement `_evaluate` and `_gradient` on batches of shape ``(k, n)``; this class handles
    shape checks so both single points and batches can be passed in.

    Args:
        name: Identifier used by the registry and in reports.
        dim: The input dimension n.
    """

    def __init__(self, name: str, dim: int) -> None:
        if int(dim) < 1:
            raise exceptions.ValidationError('Model dimension must be positive.')
        self.name = name
        self.dim = int(dim)

    def __repr__(self):
        return '{}(name={!r}, dim={})'.format(type(self).__name__, self.name, self.dim)

    def evaluate(self, points: ArrayLike) -> Union[float, np.ndarray]:
        """Evaluate F at a point ``(n,)`` or a batch ``(k, n)``."""
        batch, single = self._as_batch(points)
        values = self._evaluate(batch)
        return float(values[0]) if single else values

    def gradient(self, points: ArrayLike) -> np.ndarray:
        """Evaluate the gradient of F at a point ``(n,)`` or a batch ``(k, n)``."""
        batch, single = self._as_batch(points)
        grads = self._gradient(batch)
        return grads[0] if single else grads

    def _as_batch(self, points: ArrayLike) -> Tuple[np.ndarray, bool]:
        array = np.asarray(points, dtype=float)
        single = array.ndim == 1
        batch = np.atleast_2d(array)
        if batch.ndim != 2 or batch.shape[1] != self.dim:
            raise exceptions.ValidationError(
                'Model {} expects points of dimension {}, got shape {}.'.format(
                    self.name, self.dim, array.shape
                )
            )
        return batch, single

    def _evaluate(self, batch: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _gradient(self, batch: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class QuadraticModel(Model):
    """F(x) = 1/2 x^T A x + b^T x + c with a symmetric matrix A.

    Covers the linear and quadratic built-ins as well as the small analytic functions used by the
    axiom checks.
    """

    def __init__(
        self, name: str, A: ArrayLike = None, b: ArrayLike = None, c: float = 0.0
    ) -> None:
        if A is None and b is None:
            raise exceptions.ValidationError('QuadraticModel needs A or b.')
        if b is not None:
            b = np.array(b, dtype=float)
            dim = b.shape[0]
        else:
            dim = np.asarray(A).shape[0]
        A = np.zeros((dim, dim)) if A is None else np.array(A, dtype=float)
        b = np.zeros(dim) if b is None else b
        if A.shape != (dim, dim) or b.shape != (dim,):
            raise exceptions.ValidationError('Inconsistent shapes for A and b.')
        if not np.array_equal(A, A.T):
            raise exceptions.ValidationError('A must be symmetric.')
        super(QuadraticModel, self).__init__(name, dim)
        self.A = A
        self.b = b
        self.c = float(c)
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    def _evaluate(self, batch):
        quadratic = np.einsum('ki,ij,kj->k', batch, self.A, batch)
        return 0.5 * quadratic + batch @ self.b + self.c

    def _gradient(self, batch):
        return batch @ self.A + self.b


class SigmoidalMeanModel(Model):
    """F(x) = sigma(steepness * (mean(x) - center)) with the logistic sigma."""

    def __init__(
        self, name: str, dim: int = 3, steepness: float = 10.0, center: float = 0.5
    ) -> None:
        super(SigmoidalMeanModel, self).__init__(name, dim)
        self.steepness = float(steepness)
        self.center = float(center)

    def _z(self, batch):
        return self.steepness * (batch.mean(axis=1) - self.center)

    def _evaluate(self, batch):
        return _sigmoid(self._z(batch))

    def _gradient(self, batch):
        s = _sigmoid(self._z(batch))
        slope = s * (1.0 - s) * self.steepness / self.dim
        return np.repeat(slope[:, None], self.dim, axis=1)


class LinearCombinationModel(Model):
    """F = sum_j a_j F_j over models sharing one input dimension."""

    def __init__(self, name: str, terms: Sequence[Tuple[float, Model]]) -> None:
        if not terms:
            raise exceptions.ValidationError('At least one term is required.')
        dims = {model.dim for _, model in terms}
        if len(dims) != 1:
            raise exceptions.ValidationError(
                'All terms must share one dimension, got {}.'.format(sorted(dims))
            )
        super(LinearCombinationModel, self).__init__(name, dims.pop())
        self.terms = [(float(a), model) for a, model in terms]

    def _evaluate(self, batch):
        return sum(a * model._evaluate(batch) for a, model in self.terms)

    def _gradient(self, batch):
        return sum(a * model._gradient(batch) for a, model in self.terms)


def _sigmoid(z):
    # tanh form stays finite for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _sigmoid_prime(z):
    s = _sigmoid(z)
    return s * (1.0 - s)


def _tanh_prime(z):
    t = np.tanh(z)
    return 1.0 - t * t


_ACTIVATIONS = {
    'tanh': (np.tanh, _tanh_prime),
    'sigmoid': (_sigmoid, _sigmoid_prime),
    # not smooth: for robustness tests only, never for convergence-rate assertions
    'relu': (lambda z: np.maximum(z, 0.0), lambda z: (z > 0.0).astype(float)),
}

SMOOTH_ACTIVATIONS = ('tanh', 'sigmoid')


class MlpModel(Model):
    """A small fully connected network with a scalar linear output and a hand-written reverse pass.

    Args:
        name: Identifier used by the registry.
        layer_sizes: Units per layer, ``[n, h1, ..., 1]``.
        weights: One ``(layer_sizes[l + 1], layer_sizes[l])`` matrix per layer.
        biases: One ``(layer_sizes[l + 1],)`` vector per layer.
        activation: Hidden-layer activation, one of ``tanh``, ``sigmoid`` (or ``relu``).
    """

    def __init__(
        self,
        name: str,
        layer_sizes: Sequence[int],
        weights: Sequence[ArrayLike],
        biases: Sequence[ArrayLike],
        activation: str = 'tanh',
    ) -> None:
        layer_sizes = [int(size) for size in layer_sizes]
        self._validate_layers(layer_sizes, weights, biases, activation)
        super(MlpModel, self).__init__(name, layer_sizes[0])
        self.layer_sizes = layer_sizes
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float) for b in biases]
        for array in self.weights + self.biases:
            array.setflags(write=False)
        self.activation = activation
        self._act, self._act_prime = _ACTIVATIONS[activation]

    @staticmethod
    def _validate_layers(layer_sizes, weights, biases, activation) -> None:
        if len(layer_sizes) < 2 or layer_sizes[-1] != 1:
            raise exceptions.ValidationError(
                'layer_sizes must start with the input dimension and end with 1.'
            )
        if any(size < 1 for size in layer_sizes):
            raise exceptions.ValidationError('Layer sizes must be positive.')
        if activation not in _ACTIVATIONS:
            raise exceptions.ValidationError(
                'Unknown activation {!r}; choose from {}.'.format(
                    activation, sorted(_ACTIVATIONS)
                )
            )
        n_layers = len(layer_sizes) - 1
        if len(weights) != n_layers or len(biases) != n_layers:
            raise exceptions.ValidationError(
                'Expected {} weight matrices and bias vectors.'.format(n_layers)
            )
        for index, (w, b) in enumerate(zip(weights, biases)):
            expected = (layer_sizes[index + 1], layer_sizes[index])
            if np.shape(w) != expected:
                raise exceptions.ValidationError(
                    'weights.{} has shape {}, expected {}.'.format(
                        index, np.shape(w), expected
                    )
                )
            if np.shape(b) != (layer_sizes[index + 1],):
                raise exceptions.ValidationError(
                    'biases.{} has shape {}, expected {}.'.format(
                        index, np.shape(b), (layer_sizes[index + 1],)
                    )
                )

    @property
    def is_smooth(self) -> bool:
        return self.activation in SMOOTH_ACTIVATIONS

    def _forward(self, batch):
        """Return pre-activations of every layer; the last one is the network output."""
        pre_activations = []
        hidden = batch
        last = len(self.weights) - 1
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = hidden @ w.T + b
            pre_activations.append(z)
            if index < last:
                hidden = self._act(z)
        return pre_activations

    def _evaluate(self, batch):
        return self._forward(batch)[-1][:, 0]

    def _gradient(self, batch):
        pre_activations = self._forward(batch)
        # dF/dz of the output layer
        delta = np.ones((batch.shape[0], 1))
        for index in range(len(self.weights) - 1, -1, -1):
            upstream = delta @ self.weights[index]
            if index == 0:
                return upstream
            delta = upstream * self._act_prime(pre_activations[index - 1])

    def permuted(self, hidden_layer: int, permutation: Sequence[int]) -> 'MlpModel':
        """The same function with the units of one hidden layer reordered.

        Args:
            hidden_layer: 1-based index of the hidden layer (1 is the first hidden layer).
            permutation: New order of that layer's units.

        Returns:
            A new `MlpModel` computing the same F with a different weight layout.
        """
        if not 1 <= hidden_layer < len(self.layer_sizes) - 1:
            raise exceptions.ValidationError(
                'hidden_layer must be between 1 and {}.'.format(
                    len(self.layer_sizes) - 2
                )
            )
        permutation = np.asarray(permutation, dtype=int)
        if sorted(permutation.tolist()) != list(range(self.layer_sizes[hidden_layer])):
            raise exceptions.ValidationError(
                '{} is not a permutation of the layer units.'.format(
                    permutation.tolist()
                )
            )
        weights = [w.copy() for w in self.weights]
        biases = [b.copy() for b in self.biases]
        weights[hidden_layer - 1] = weights[hidden_layer - 1][permutation, :]
        biases[hidden_layer - 1] = biases[hidden_layer - 1][permutation]
        weights[hidden_layer] = weights[hidden_layer][:, permutation]
        return MlpModel(
            name='{}-permuted'.format(self.name),
            layer_sizes=self.layer_sizes,
            weights=weights,
            biases=biases,
            activation=self.activation,
        )


def load_mlp_config(source: str) -> MlpModel:
    """Build an `MlpModel` from a plain-text key/value weight file.

    The file looks like::

        name = mlp3_tanh
        activation = tanh
        layer_sizes = 3,4,1
        weights.0 = 0.5,-0.3,0.8; 0.1,0.2,-0.7; ...
        biases.0 = 0.1,-0.2,0.05,0.0
        weights.1 = 0.9,-1.1,0.4,0.7
        biases.1 = 0.2

    Args:
        source: Path (or http(s) url) to the file, or the file content itself when it contains a newline.

    Returns:
        The parsed model.

    Raises:
        ValidationError: If keys are missing or shapes are inconsistent.
    """
    if '\n' in source:
        entries = utilities.parse_key_value_text(source)
    else:
        entries = utilities.load_key_value_file(source)

    missing = [key for key in ('name', 'layer_sizes') if key not in entries]
    if missing:
        raise exceptions.ValidationError(
            'MLP config is missing {}.'.format(', '.join(missing))
        )
    layer_sizes = utilities.parse_int_list(entries['layer_sizes'])
    weights, biases = [], []
    for index in range(len(layer_sizes) - 1):
        try:
            rows = entries['weights.{}'.format(index)].split(';')
            bias = entries['biases.{}'.format(index)]
        except KeyError as err:
            raise exceptions.ValidationError(
                'MLP config is missing {}.'.format(err.args[0])
            )
        weights.append([utilities.parse_vector(row) for row in rows])
        biases.append(utilities.parse_vector(bias))
    try:
        return MlpModel(
            name=entries['name'],
            layer_sizes=layer_sizes,
            weights=[np.array(w) for w in weights],
            biases=biases,
            activation=entries.get('activation', 'tanh'),
        )
    except ValueError as err:
        # ragged rows
        if isinstance(err, exceptions.ValidationError):
            raise
        raise exceptions.ValidationError('Malformed MLP weights: {}'.format(err))


_registry = {}  # type: Dict[str, Model]


def _builtin_models() -> List[Model]:
    return [
        QuadraticModel('linear3', b=[1.0, 1.0, 1.0]),
        QuadraticModel(
            'quadratic3', A=[[2.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]]
        ),
        SigmoidalMeanModel('sigmoidal3', dim=3, steepness=10.0, center=0.5),
        load_mlp_config(_DEFAULT_MLP_CONFIG),
    ]


def _ensure_registry() -> Dict[str, Model]:
    if not _registry:
        for model in _builtin_models():
            _registry[model.name] = model
    return _registry


def register_model(model: Model, replace: bool = False) -> None:
    """Add a model to the registry so `builtin_model` and the CLI can resolve it by name."""
    registry = _ensure_registry()
    if model.name in registry and not replace:
        raise exceptions.ValidationError(
            'A model named {!r} is already registered.'.format(model.name)
        )
    registry[model.name] = model
    logger.info('Registered model %s', model.name)


def available_models() -> List[str]:
    return sorted(_ensure_registry())


def builtin_model(name: str) -> Model:
    """Look up a registered model by name.

    Args:
        name: ``linear3``, ``quadratic3``, ``sigmoidal3``, ``mlp3_tanh`` or any registered name.

    Returns:
        The registered `Model`.

    Raises:
        UnknownModelError: If no model has that name; the message lists the available ones.
    """
    registry = _ensure_registry()
    try:
        return registry[name]
    except KeyError:
        raise exceptions.UnknownModelError(
            'Unknown model {!r}. Available models: {}.'.format(
                name, ', '.join(available_models())
            )
        )


def check_gradient(model: Model, point: ArrayLike, step: float = 1e-5) -> float:
    """Compare the exact gradient with central finite differences.

    Args:
        model: The model to audit.
        point: A finite point of the model's dimension.
        step: Finite-difference step h > 0.

    Returns:
        max_i |grad_i - fd_i| / max(1, |fd_i|).

    Raises:
        ValidationError: If step is not positive or the point is not finite.
        NonFiniteEvaluationError: If the model returns a non-finite value at a perturbed point.
    """
    if not step > 0:
        raise exceptions.ValidationError('step must be positive.')
    point = np.asarray(point, dtype=float)
    if point.shape != (model.dim,) or not np.all(np.isfinite(point)):
        raise exceptions.ValidationError(
            'point must be a finite vector of dimension {}.'.format(model.dim)
        )
    offsets = np.eye(model.dim) * step
    plus = point + offsets
    minus = point - offsets
    f_plus = model.evaluate(plus)
    f_minus = model.evaluate(minus)
    if not (np.all(np.isfinite(f_plus)) and np.all(np.isfinite(f_minus))):
        raise exceptions.NonFiniteEvaluationError(
            'Model {} is not finite near {}.'.format(model.name, point.tolist())
        )
    # divide by the representable step actually taken
    actual_steps = np.diag(plus) - np.diag(minus)
    central = (f_plus - f_minus) / actual_steps
    exact = model.gradient(point)
    return float(np.max(np.abs(exact - central) / np.maximum(1.0, np.abs(central))))
