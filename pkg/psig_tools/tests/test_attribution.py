import os
import unittest

import numpy as np
import pytest

from psig_tools import attribution
from psig_tools import density
from psig_tools import exceptions
from psig_tools.model import Model, QuadraticModel, builtin_model
from psig_tools.pathgeom import PathSpec


BUILTIN_MODELS = ['linear3', 'quadratic3', 'sigmoidal3', 'mlp3_tanh']
SAMPLES_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'samples.txt')


@pytest.fixture
def unit_path():
    return PathSpec([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])


class TestEstimators(unittest.TestCase):
    def setUp(self):
        self.path = PathSpec([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        self.linear3 = builtin_model('linear3')
        self.quadratic3 = builtin_model('quadratic3')
        self.uniform = density.UniformDensity()

    def test_ig_of_linear3_is_exact(self):
        result = attribution.ig(self.linear3, self.path, 100)
        np.testing.assert_allclose(result.values, [1.0, 1.0, 1.0], rtol=1e-15)
        self.assertEqual(result.estimator, 'ig')
        self.assertEqual(result.steps, 100)

    def test_ig_of_quadratic3_converges_to_its_closed_form(self):
        result = attribution.ig(self.quadratic3, self.path, 100000)
        np.testing.assert_allclose(result.values, [1.5, 0.5, 1.0], atol=1e-4)
        self.assertAlmostEqual(result.sum, 3.0, delta=1e-4)

    def test_result_sum_is_the_sum_of_values(self):
        result = attribution.psig_det(builtin_model('mlp3_tanh'), self.path, self.uniform, 50)
        self.assertAlmostEqual(result.sum, float(np.sum(result.values)), places=14)
        with self.assertRaises(ValueError):
            result.values[0] = 1.0

    def test_pwig_with_unit_weight_is_ig_bit_for_bit(self):
        for name in BUILTIN_MODELS:
            model = builtin_model(name)
            ig = attribution.ig(model, self.path, 137)
            pwig = attribution.pwig(model, self.path, attribution.WeightFn.constant(1.0), 137)
            np.testing.assert_array_equal(pwig.values, ig.values)

    def test_pwig_with_identity_weight(self):
        identity = attribution.WeightFn.identity()
        quadratic = attribution.pwig(self.quadratic3, self.path, identity, 10000)
        np.testing.assert_allclose(quadratic.values, [1.0, 1.0 / 3.0, 2.0 / 3.0], atol=5e-4)
        linear = attribution.pwig(self.linear3, self.path, identity, 10000)
        np.testing.assert_allclose(linear.values, [0.5, 0.5, 0.5], atol=5e-4)
        self.assertEqual(quadratic.density_or_weight, 'identity')

    def test_pwig_rejects_negative_weights(self):
        shifted = attribution.WeightFn.from_callable(lambda a: a - 0.5, 'alpha-0.5')
        with self.assertRaises(exceptions.InvalidWeightError):
            attribution.pwig(self.linear3, self.path, shifted, 10)

    def test_pwig_rejects_non_finite_weights(self):
        blowup = attribution.WeightFn.from_callable(lambda a: 1.0 / (1.0 - a), '1/(1-a)')
        with np.errstate(divide='ignore'):
            with self.assertRaises(exceptions.InvalidWeightError):
                attribution.pwig(self.linear3, self.path, blowup, 10)

    def test_psig_det_closed_form_for_quadratic3(self):
        result = attribution.psig_det(self.quadratic3, self.path, self.uniform, 10000)
        np.testing.assert_allclose(result.values, [1.0, 1.0 / 3.0, 2.0 / 3.0], atol=5e-4)
        # F(x) - E[F(gamma(s))] = 3 - 1
        self.assertAlmostEqual(result.sum, 2.0, delta=5e-4)
        self.assertEqual(result.density_or_weight, 'uniform')

    def test_psig_det_of_linear3_under_uniform_sampling(self):
        result = attribution.psig_det(self.linear3, self.path, self.uniform, 10000)
        np.testing.assert_allclose(result.values, [0.5, 0.5, 0.5], atol=1e-4)

    def test_psig_det_with_point_mass_at_zero_is_ig(self):
        point_mass = density.PointMassDensity(0.0)
        for name in BUILTIN_MODELS:
            model = builtin_model(name)
            np.testing.assert_array_equal(
                attribution.psig_det(model, self.path, point_mass, 250).values,
                attribution.ig(model, self.path, 250).values,
            )

    def test_pwig_with_cdf_weight_is_psig_det_bit_for_bit(self):
        for d in (self.uniform, density.TriangularUpDensity(), density.BetaDensity(2, 2)):
            weight = attribution.WeightFn.from_density(d)
            for name in BUILTIN_MODELS:
                model = builtin_model(name)
                np.testing.assert_array_equal(
                    attribution.pwig(model, self.path, weight, 300).values,
                    attribution.psig_det(model, self.path, d, 300).values,
                )

    def test_midpoint_rule_is_more_accurate_for_smooth_models(self):
        exact = np.array([1.0, 1.0 / 3.0, 2.0 / 3.0])
        right = attribution.psig_det(self.quadratic3, self.path, self.uniform, 100)
        midpoint = attribution.psig_det(
            self.quadratic3, self.path, self.uniform, 100, rule='midpoint'
        )
        self.assertLess(
            np.max(np.abs(midpoint.values - exact)), np.max(np.abs(right.values - exact))
        )
        self.assertEqual(midpoint.rule, 'midpoint')

    def test_degenerate_path_gives_zero_attributions(self):
        path = PathSpec([0.3, 0.3, 0.3], [0.3, 0.3, 0.3])
        with self.assertLogs('psig_tools.attribution', level='WARNING'):
            result = attribution.psig_det(self.quadratic3, path, self.uniform, 10)
        np.testing.assert_array_equal(result.values, np.zeros(3))
        mc = attribution.psig_mc(self.quadratic3, path, self.uniform, 5, 5, seed=0)
        np.testing.assert_array_equal(mc.values, np.zeros(3))

    def test_invalid_step_counts_and_dimensions(self):
        with self.assertRaises(exceptions.ValidationError):
            attribution.ig(self.linear3, self.path, 0)
        with self.assertRaises(exceptions.ValidationError):
            attribution.ig(self.linear3, self.path, 10, rule='trapezoid')
        with self.assertRaises(exceptions.ValidationError):
            attribution.ig(self.linear3, PathSpec([1.0, 1.0], [0.0, 0.0]), 10)
        with self.assertRaises(exceptions.ValidationError):
            attribution.completeness_residual(
                self.linear3, self.path, attribution.WeightFn.constant(), 1
            )

    def test_non_finite_gradients_are_reported(self):
        class NanGradient(Model):
            def _evaluate(self, batch):
                return np.zeros(batch.shape[0])

            def _gradient(self, batch):
                return np.full_like(batch, np.nan)

        with self.assertRaises(exceptions.NonFiniteEvaluationError):
            attribution.ig(NanGradient('nan', 3), self.path, 10)


class TestMonteCarlo(unittest.TestCase):
    def setUp(self):
        self.path = PathSpec([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        self.quadratic3 = builtin_model('quadratic3')
        self.uniform = density.UniformDensity()

    def test_point_mass_at_zero_reproduces_ig(self):
        point_mass = density.PointMassDensity(0.0)
        for name in BUILTIN_MODELS:
            model = builtin_model(name)
            mc = attribution.psig_mc(model, self.path, point_mass, 7, 64, seed=3)
            ig = attribution.ig(model, self.path, 64)
            # the MLP gradients come from a larger batch, whose matrix products may round differently
            np.testing.assert_allclose(mc.values, ig.values, rtol=1e-12, atol=1e-15)

    def test_psig_mc_is_deterministic_given_the_seed(self):
        first = attribution.psig_mc(self.quadratic3, self.path, self.uniform, 200, 20, seed=9)
        second = attribution.psig_mc(self.quadratic3, self.path, self.uniform, 200, 20, seed=9)
        other = attribution.psig_mc(self.quadratic3, self.path, self.uniform, 200, 20, seed=10)
        np.testing.assert_array_equal(first.values, second.values)
        np.testing.assert_array_equal(first.stderr, second.stderr)
        self.assertFalse(np.array_equal(first.values, other.values))

    def test_baseline_draws_do_not_depend_on_the_sample_count(self):
        few = attribution.draw_baselines(self.uniform, 5, seed=1)
        many = attribution.draw_baselines(self.uniform, 50, seed=1)
        np.testing.assert_array_equal(few, many[:5])

    @pytest.mark.timeout(30)
    def test_psig_mc_approaches_the_closed_form(self):
        result = attribution.psig_mc(
            self.quadratic3, self.path, self.uniform, 10000, 200, seed=2024
        )
        np.testing.assert_allclose(result.values, [1.0, 1.0 / 3.0, 2.0 / 3.0], atol=0.02)
        self.assertEqual(result.n_baselines, 10000)
        self.assertEqual(result.stderr.shape, (3,))

    def test_single_sample_has_no_standard_error(self):
        result = attribution.psig_from_samples(self.quadratic3, self.path, [0.5], 10)
        self.assertIsNone(result.stderr)
        np.testing.assert_allclose(
            result.values,
            attribution.ig_from_intermediate_baseline(self.quadratic3, self.path, 0.5, 10),
        )

    def test_ig_from_intermediate_baseline_is_ig_from_b_s(self):
        s = 0.25
        shortened = PathSpec(self.path.input, self.path.baseline + s * self.path.delta)
        np.testing.assert_allclose(
            attribution.ig_from_intermediate_baseline(self.quadratic3, self.path, s, 40),
            attribution.ig(self.quadratic3, shortened, 40).values,
            rtol=1e-12,
        )

    def test_psig_from_samples_requires_samples(self):
        with self.assertRaises(exceptions.ValidationError):
            attribution.psig_from_samples(self.quadratic3, self.path, [], 10)
        with self.assertRaises(exceptions.ValidationError):
            attribution.psig_from_samples(self.quadratic3, self.path, [0.2, 1.4], 10)


@pytest.mark.timeout(30)
@pytest.mark.parametrize('name', ['linear3', 'quadratic3', 'sigmoidal3'])
def test_monte_carlo_agrees_with_the_deterministic_estimator(unit_path, name):
    model = builtin_model(name)
    uniform = density.UniformDensity()
    mc = attribution.psig_mc(model, unit_path, uniform, 10000, 200, seed=17, rule='midpoint')
    det = attribution.psig_det(model, unit_path, uniform, 1000)
    assert np.all(np.abs(mc.values - det.values) < 3.0 * mc.stderr + 1e-12)


@pytest.mark.parametrize('name', BUILTIN_MODELS)
def test_sample_average_equals_pwig_with_the_empirical_cdf(unit_path, name):
    model = builtin_model(name)
    samples = density.load_samples(SAMPLES_PATH)
    weight = attribution.WeightFn.from_density(density.EmpiricalCdf(samples))
    shared = attribution.psig_on_shared_grid(model, unit_path, samples, 1000)
    pwig = attribution.pwig(model, unit_path, weight, 1000)
    np.testing.assert_allclose(shared.values, pwig.values, rtol=0, atol=1e-9)


def test_explicit_sample_list_matches_pwig_within_quadrature_error(unit_path):
    quadratic3 = builtin_model('quadratic3')
    samples = [0.1, 0.35, 0.5, 0.8]
    weight = attribution.WeightFn.from_density(density.EmpiricalCdf(samples))
    averaged = attribution.psig_from_samples(quadratic3, unit_path, samples, 2000, 'midpoint')
    pwig = attribution.pwig(quadratic3, unit_path, weight, 2000)
    np.testing.assert_allclose(averaged.values, pwig.values, atol=5e-3)


class TestResiduals(unittest.TestCase):
    def setUp(self):
        self.path = PathSpec([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        self.quadratic3 = builtin_model('quadratic3')
        self.uniform = density.UniformDensity()
        self.identity = attribution.WeightFn.identity()

    def test_ig_residual_is_quadrature_error(self):
        for name in BUILTIN_MODELS:
            residual = attribution.completeness_residual(
                builtin_model(name), self.path, attribution.WeightFn.constant(1.0), 100
            )
            self.assertLess(abs(residual), 10.0 / 100)

    def test_identity_weight_residual_of_quadratic3(self):
        residual = attribution.completeness_residual(
            self.quadratic3, self.path, self.identity, 10000
        )
        self.assertAlmostEqual(residual, 1.0, delta=1e-3)

    def test_residual_equals_the_expected_output_along_the_path(self):
        for name in BUILTIN_MODELS:
            model = builtin_model(name)
            direct = attribution.completeness_residual(model, self.path, self.identity, 10000)
            closed_form = attribution.psig_residual_expectation(
                model, self.path, self.uniform, 10000
            )
            self.assertAlmostEqual(direct, closed_form, delta=1e-3)

    def test_integration_by_parts_matches_the_direct_residual(self):
        m = 1000
        for name in BUILTIN_MODELS:
            model = builtin_model(name)
            direct = attribution.completeness_residual(model, self.path, self.identity, m)
            by_parts = attribution.completeness_residual_by_parts(
                model, self.path, self.identity, m
            )
            self.assertLess(abs(direct - by_parts), 20.0 / m)

    def test_expected_baseline_completeness_gap_of_quadratic3(self):
        self.assertLess(
            attribution.expected_baseline_completeness_gap(
                self.quadratic3, self.path, self.uniform, 100
            ),
            0.05,
        )
        self.assertLess(
            attribution.expected_baseline_completeness_gap(
                self.quadratic3, self.path, self.uniform, 1000
            ),
            0.005,
        )

    def test_expected_baseline_completeness_gap_of_linear3(self):
        gap = attribution.expected_baseline_completeness_gap(
            builtin_model('linear3'), self.path, self.uniform, 1000
        )
        self.assertLess(gap, 0.005)

    def test_point_mass_gap_is_the_ig_completeness_error(self):
        gap = attribution.expected_baseline_completeness_gap(
            self.quadratic3, self.path, density.PointMassDensity(0.0), 100
        )
        residual = attribution.completeness_residual(
            self.quadratic3, self.path, attribution.WeightFn.constant(1.0), 100
        )
        self.assertAlmostEqual(gap, abs(residual), delta=1e-14)


class TestAxioms(unittest.TestCase):
    def setUp(self):
        self.path = PathSpec([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        self.uniform = density.UniformDensity()

    def test_standard_scenarios_pass(self):
        report = attribution.axiom_checks(self.uniform, m=1000)
        self.assertTrue(report.passed)
        self.assertLess(report['linearity'].discrepancy, 1e-10)
        self.assertEqual(report['dummy'].discrepancy, 0.0)
        self.assertEqual(report['symmetry'].discrepancy, 0.0)
        self.assertEqual(report['pointmass_equals_ig'].discrepancy, 0.0)
        self.assertLess(report['implementation_invariance'].discrepancy, 1e-12)
        self.assertEqual(len(report.rows()), 7)

    def test_scenarios_pass_for_other_densities(self):
        for d in (density.TriangularUpDensity(), density.BetaDensity(2, 2)):
            self.assertTrue(attribution.axiom_checks(d, m=200).passed)

    def test_dummy_check_refuses_a_used_feature(self):
        with self.assertRaises(exceptions.MisconfiguredScenarioError):
            attribution.check_dummy(
                builtin_model('linear3'), self.path, self.uniform, 100, feature=2
            )

    def test_symmetry_check_refuses_unequal_coordinates(self):
        symmetric = QuadraticModel(
            'x1*x2', A=[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
        )
        with self.assertRaises(exceptions.MisconfiguredScenarioError):
            attribution.check_symmetry(
                symmetric, PathSpec([1.0, 2.0, 0.0], [0.0, 0.0, 0.0]), self.uniform, 10, 0, 1
            )

    def test_symmetry_check_refuses_asymmetric_models(self):
        with self.assertRaises(exceptions.MisconfiguredScenarioError):
            attribution.check_symmetry(
                builtin_model('quadratic3'), self.path, self.uniform, 10, 0, 1
            )

    def test_shift_leaves_linear_attributions_unchanged(self):
        linear3 = builtin_model('linear3')
        shifted = self.path.shifted([2.0, -1.0, 0.5])
        psig = lambda model, path, m: attribution.psig_det(model, path, self.uniform, m)  # noqa: E731
        for estimator in (attribution.ig, psig):
            np.testing.assert_allclose(
                estimator(linear3, shifted, 100).values,
                estimator(linear3, self.path, 100).values,
                atol=1e-12,
            )
