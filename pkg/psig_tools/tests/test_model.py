import os
import unittest

import numpy as np
import pytest

from psig_tools import exceptions
from psig_tools import model as models


MLP_TEXT = """
name = tiny
activation = sigmoid
layer_sizes = 2,2,1
weights.0 = 1.0,-1.0; 0.5,0.25
biases.0 = 0.0,0.1
weights.1 = 2.0,-1.0
biases.1 = 0.5
"""


class TestModels(unittest.TestCase):
    def setUp(self):
        self.linear3 = models.builtin_model('linear3')
        self.quadratic3 = models.builtin_model('quadratic3')
        self.sigmoidal3 = models.builtin_model('sigmoidal3')
        self.mlp = models.builtin_model('mlp3_tanh')

    def test_builtin_models_are_registered(self):
        for name in ('linear3', 'quadratic3', 'sigmoidal3', 'mlp3_tanh'):
            self.assertIn(name, models.available_models())
            self.assertEqual(models.builtin_model(name).dim, 3)

    def test_unknown_model_lists_the_available_names(self):
        with self.assertRaises(exceptions.UnknownModelError) as context:
            models.builtin_model('resnet50')
        self.assertIn('linear3', str(context.exception))
        self.assertIsInstance(context.exception, exceptions.ValidationError)

    def test_linear3_values_and_gradient(self):
        self.assertEqual(self.linear3.evaluate([1.0, 2.0, 3.0]), 6.0)
        np.testing.assert_array_equal(self.linear3.gradient([5.0, -1.0, 2.0]), [1, 1, 1])

    def test_quadratic3_matches_its_closed_form(self):
        x = np.array([1.0, 2.0, 3.0])
        # x1^2 + x1 x2 + x3^2
        self.assertAlmostEqual(self.quadratic3.evaluate(x), 1.0 + 2.0 + 9.0)
        np.testing.assert_allclose(self.quadratic3.gradient(x), [2 * 1 + 2, 1, 2 * 3])

    def test_quadratic3_gradient_along_the_unit_path(self):
        alpha = 0.25
        np.testing.assert_allclose(
            self.quadratic3.gradient(alpha * np.ones(3)), [3 * alpha, alpha, 2 * alpha]
        )

    def test_batches_return_arrays(self):
        batch = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        np.testing.assert_allclose(self.quadratic3.evaluate(batch), [0.0, 3.0])
        self.assertEqual(self.mlp.gradient(batch).shape, (2, 3))

    def test_wrong_dimension_is_a_validation_error(self):
        with self.assertRaises(exceptions.ValidationError):
            self.linear3.evaluate([1.0, 2.0])

    def test_sigmoidal3_is_half_at_its_center(self):
        self.assertAlmostEqual(self.sigmoidal3.evaluate([0.5, 0.5, 0.5]), 0.5)
        np.testing.assert_allclose(self.sigmoidal3.gradient([0.5, 0.5, 0.5]), [10 / 12.0] * 3)

    def test_quadratic_model_copies_and_freezes_its_parameters(self):
        b = np.array([1.0, 2.0])
        model = models.QuadraticModel('q', b=b)
        b[0] = 100.0
        self.assertEqual(model.b[0], 1.0)
        with self.assertRaises(ValueError):
            model.b[0] = 3.0

    def test_quadratic_model_requires_a_symmetric_matrix(self):
        with self.assertRaises(exceptions.ValidationError):
            models.QuadraticModel('q', A=[[0.0, 1.0], [0.0, 0.0]])

    def test_linear_combination_model(self):
        combined = models.LinearCombinationModel(
            'combo', [(2.0, self.linear3), (3.0, self.quadratic3)]
        )
        x = np.array([0.3, -0.2, 0.7])
        self.assertAlmostEqual(
            combined.evaluate(x),
            2.0 * self.linear3.evaluate(x) + 3.0 * self.quadratic3.evaluate(x),
        )
        with self.assertRaises(exceptions.ValidationError):
            models.LinearCombinationModel(
                'bad', [(1.0, self.linear3), (1.0, models.QuadraticModel('q', b=[1.0]))]
            )


def test_load_mlp_config_from_text():
    mlp = models.load_mlp_config(MLP_TEXT)
    assert mlp.name == 'tiny'
    assert mlp.layer_sizes == [2, 2, 1]
    assert mlp.is_smooth
    hidden = 1.0 / (1.0 + np.exp(-np.array([1.0 - 2.0, 0.5 + 0.5 + 0.1])))
    expected = 2.0 * hidden[0] - hidden[1] + 0.5
    assert mlp.evaluate([1.0, 2.0]) == pytest.approx(expected, rel=1e-12)


def test_load_mlp_config_reports_missing_layers():
    text = MLP_TEXT.replace('biases.1 = 0.5\n', '')
    with pytest.raises(exceptions.ValidationError, match='biases.1'):
        models.load_mlp_config(text)


def test_load_mlp_config_reports_bad_shapes():
    text = MLP_TEXT.replace('weights.1 = 2.0,-1.0', 'weights.1 = 2.0,-1.0,3.0')
    with pytest.raises(exceptions.ValidationError):
        models.load_mlp_config(text)


def test_load_mlp_config_from_file(tmpdir):
    path = tmpdir.join('tiny.cfg')
    path.write(MLP_TEXT)
    assert models.load_mlp_config(str(path)).name == 'tiny'


def test_permuted_mlp_computes_the_same_function():
    mlp = models.builtin_model('mlp3_tanh')
    twin = mlp.permuted(1, [3, 2, 1, 0])
    points = np.random.default_rng(4).uniform(-1.0, 1.0, size=(20, 3))
    assert not np.array_equal(twin.weights[0], mlp.weights[0])
    np.testing.assert_allclose(twin.evaluate(points), mlp.evaluate(points), atol=1e-14)
    np.testing.assert_allclose(twin.gradient(points), mlp.gradient(points), atol=1e-14)


def test_permuted_rejects_non_permutations():
    mlp = models.builtin_model('mlp3_tanh')
    with pytest.raises(exceptions.ValidationError):
        mlp.permuted(1, [0, 0, 1, 2])
    with pytest.raises(exceptions.ValidationError):
        mlp.permuted(2, [0])


def test_register_model_refuses_duplicates_unless_replaced():
    model = models.QuadraticModel('test_register_q', b=[1.0, 2.0])
    models.register_model(model)
    assert models.builtin_model('test_register_q') is model
    with pytest.raises(exceptions.ValidationError):
        models.register_model(model)
    replacement = models.QuadraticModel('test_register_q', b=[0.0, 1.0])
    models.register_model(replacement, replace=True)
    assert models.builtin_model('test_register_q') is replacement


@pytest.mark.parametrize('name', ['linear3', 'quadratic3', 'sigmoidal3', 'mlp3_tanh'])
def test_gradient_oracles_agree_with_finite_differences(name):
    model = models.builtin_model(name)
    points = np.random.default_rng(2024).uniform(-2.0, 2.0, size=(100, 3))
    worst = max(models.check_gradient(model, point) for point in points)
    assert worst < 1e-6


def test_relu_gradient_matches_away_from_kinks():
    relu = models.MlpModel(
        'relu', [2, 2, 1], [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 1.0]]], [[0, 0], [0]], 'relu'
    )
    assert not relu.is_smooth
    assert models.check_gradient(relu, [0.5, -0.5]) < 1e-6


def test_check_gradient_validates_its_arguments():
    linear3 = models.builtin_model('linear3')
    with pytest.raises(exceptions.ValidationError):
        models.check_gradient(linear3, [0.0, 0.0, 0.0], step=0.0)
    with pytest.raises(exceptions.ValidationError):
        models.check_gradient(linear3, [0.0, np.nan, 0.0])


def test_check_gradient_flags_non_finite_models():
    class Exploding(models.Model):
        def _evaluate(self, batch):
            return np.full(batch.shape[0], np.inf)

        def _gradient(self, batch):
            return np.zeros_like(batch)

    with pytest.raises(exceptions.NonFiniteEvaluationError):
        models.check_gradient(Exploding('boom', 2), [0.0, 0.0])


def test_default_mlp_config_ships_with_the_package():
    assert os.path.isfile(models._DEFAULT_MLP_CONFIG)


@pytest.mark.parametrize('name', ['linear3', 'quadratic3', 'sigmoidal3', 'mlp3_tanh'])
def test_repeated_calls_return_bit_identical_results(name):
    model = models.builtin_model(name)
    points = np.random.default_rng(8).uniform(-1.0, 1.0, size=(50, 3))
    values, grads = model.evaluate(points), model.gradient(points)
    for _ in range(3):
        np.testing.assert_array_equal(model.evaluate(points), values)
        np.testing.assert_array_equal(model.gradient(points), grads)
    expected_points = np.random.default_rng(8).uniform(-1.0, 1.0, size=(50, 3))
    np.testing.assert_array_equal(points, expected_points)
