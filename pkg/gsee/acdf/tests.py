import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from evolution.spectrum import diagonalize, exact_moments, spectral_measure
from fourier.series import coefficients, evaluate_series
from gsee.exceptions import ParameterError
from hamiltonian.operators import build_xxz_chain
from resources.estimates import design_filter
from states.vectors import eigenstate, random_state

from .estimator import (
    ABOVE_ZERO,
    BELOW_ETA,
    EXACT,
    INFINITE,
    SINGLE_SHOT,
    AcdfSampleBatch,
    acdf_curves,
    aggregate_curves,
    decide_jump,
    deterministic_acdf,
    draw_batch,
    estimator_stats,
    estimator_variance,
    evaluate_acdf,
    make_grid,
    median_of_means,
)
from .serializers import SamplingSpecSerializer, read_curve, write_curve


def xxz_setup(seed=3, epsilon=0.1):
    h = build_xxz_chain(4, 1.0, -1.0)
    ed = diagonalize(h)
    measure = spectral_measure(ed, random_state(4, seed=seed))
    delta = h.tau * epsilon
    fs = design_filter(epsilon, delta)
    return h, ed, measure, fs, delta, exact_moments(measure, fs.d)


class GridTests(SimpleTestCase):
    """Uniform evaluation grid"""

    def test_capped_spacing(self):
        grid = make_grid(0.2)
        self.assertEqual(grid.size, 4096)
        self.assertEqual(grid[0], -math.pi)
        self.assertLess(grid[-1], math.pi)

    def test_fine_spacing_resolves_delta(self):
        grid = make_grid(0.001)
        spacing = np.diff(grid)
        self.assertLessEqual(spacing.max(), 0.001 / 4 + 1e-15)
        np.testing.assert_allclose(spacing, spacing[0], rtol=1e-9)


class DrawBatchTests(SimpleTestCase):
    """Index draws and observations"""

    def test_single_index(self):
        fs = coefficients(2.0, 0)
        _, _, measure, _, _, _ = xxz_setup()
        batch = draw_batch(fs, exact_moments(measure, 0), 1, EXACT, seed=1)
        self.assertEqual(batch.k.tolist(), [0])

    def test_exact_mode_passes_moments_through(self):
        _, _, _, fs, _, moments = xxz_setup()
        batch = draw_batch(fs, moments, 300, EXACT, seed=2)
        g = moments.lookup(batch.j)
        np.testing.assert_array_equal(batch.re_obs, g.real)
        np.testing.assert_array_equal(batch.im_obs, g.imag)

    def test_single_shot_means_within_binomial_bands(self):
        _, _, _, fs, _, moments = xxz_setup()
        batch = draw_batch(fs, moments, 40_000, SINGLE_SHOT, seed=5)
        self.assertTrue(set(np.unique(batch.re_obs)) <= {-1.0, 1.0})
        for k in range(3):
            picked = batch.k == k
            n = int(picked.sum())
            g = moments.lookup(np.array([2 * k + 1]))[0]
            self.assertLessEqual(abs(batch.re_obs[picked].mean() - g.real), 4 * math.sqrt(1 / n))
            self.assertLessEqual(abs(batch.im_obs[picked].mean() - g.imag), 4 * math.sqrt(1 / n))

    def test_reproducible_per_repetition(self):
        _, _, _, fs, _, moments = xxz_setup()
        a = draw_batch(fs, moments, 100, SINGLE_SHOT, seed=9, repetition=4)
        b = draw_batch(fs, moments, 100, SINGLE_SHOT, seed=9, repetition=4)
        c = draw_batch(fs, moments, 100, SINGLE_SHOT, seed=9, repetition=5)
        np.testing.assert_array_equal(a.k, b.k)
        np.testing.assert_array_equal(a.re_obs, b.re_obs)
        self.assertFalse(np.array_equal(a.k, c.k))

    def test_infinite_mode_has_no_batches(self):
        _, _, _, fs, _, moments = xxz_setup()
        with self.assertRaises(ParameterError):
            draw_batch(fs, moments, 10, INFINITE)
        with self.assertRaises(ParameterError):
            draw_batch(fs, moments, 0, EXACT)


class EvaluateAcdfTests(SimpleTestCase):
    """Curves from batches and from the full sum"""

    def test_zero_observations(self):
        fs = coefficients(5.0, 6)
        batch = AcdfSampleBatch(k=np.array([0, 3, 6]), re_obs=np.zeros(3), im_obs=np.zeros(3), mode=EXACT, seed=0)
        curve = evaluate_acdf(batch, fs, make_grid(0.5))
        np.testing.assert_array_equal(curve.g_values, 0.5)
        np.testing.assert_array_equal(curve.grad_values, 0.0)

    def test_full_weighted_batch_equals_deterministic_sum(self):
        _, _, _, fs, _, moments = xxz_setup()
        k = np.arange(fs.d + 1)
        g = moments.lookup(2 * k + 1)
        scale = (fs.d + 1) * fs.probabilities
        batch = AcdfSampleBatch(k=k, re_obs=scale * g.real, im_obs=scale * g.imag, mode=EXACT, seed=0)
        grid = make_grid(0.05, cap=512)
        sampled = evaluate_acdf(batch, fs, grid)
        full = deterministic_acdf(fs, moments, grid)
        np.testing.assert_allclose(sampled.g_values, full.g_values, atol=1e-10)
        np.testing.assert_allclose(sampled.grad_values, full.grad_values, atol=1e-8)

    def test_deterministic_matches_shifted_filter(self):
        _, _, measure, fs, _, moments = xxz_setup()
        grid = np.linspace(-math.pi, math.pi, 50, endpoint=False)
        curve = deterministic_acdf(fs, moments, grid)
        expected = [sum(p * evaluate_series(fs, x - lam) for lam, p in measure.points) for x in grid]
        np.testing.assert_allclose(curve.g_values, expected, atol=1e-10)

    def test_eigenstate_step(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        epsilon = 0.05
        delta = h.tau * epsilon
        fs = design_filter(epsilon, delta)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 0)), fs.d)
        lam = ed.lambdas[0]
        curve = deterministic_acdf(fs, moments, np.array([lam - delta, lam + delta]))
        self.assertLessEqual(curve.g_values[0], epsilon)
        self.assertGreaterEqual(curve.g_values[1], 1 - epsilon)

    def test_derivative_consistency(self):
        _, _, _, fs, _, moments = xxz_setup(epsilon=0.3)
        grid = make_grid(1.0, cap=4096)
        curve = deterministic_acdf(fs, moments, grid)
        h = curve.spacing
        central = (curve.g_values[2:] - curve.g_values[:-2]) / (2 * h)
        third = 2 * np.sum(fs.coeff_mags * fs.j_values.astype(float) ** 3)
        self.assertLessEqual(np.max(np.abs(central - curve.grad_values[1:-1])), h * h / 6 * third + 1e-9)

    def test_empty_batch(self):
        fs = coefficients(5.0, 2)
        batch = AcdfSampleBatch(k=np.array([], dtype=int), re_obs=np.array([]), im_obs=np.array([]), mode=EXACT, seed=0)
        with self.assertRaises(ParameterError):
            evaluate_acdf(batch, fs, make_grid(0.5))


class EstimatorStatisticsTests(SimpleTestCase):
    """Unbiasedness and variance of the single-shot estimator"""

    def test_identical_curves(self):
        _, _, _, fs, _, moments = xxz_setup()
        curve = deterministic_acdf(fs, moments, make_grid(0.5))
        mean, variance = estimator_stats([curve, curve, curve])
        np.testing.assert_array_equal(variance, 0.0)
        np.testing.assert_array_equal(mean, curve.g_values)

    def test_identical_sampled_curves(self):
        _, _, _, fs, _, moments = xxz_setup()
        curve = evaluate_acdf(draw_batch(fs, moments, 300, SINGLE_SHOT, seed=3), fs, make_grid(0.2))
        mean, variance = estimator_stats([curve] * 10)
        np.testing.assert_array_equal(variance, 0.0)
        np.testing.assert_array_equal(mean, curve.g_values)

    def test_unbiased_with_bounded_variance(self):
        _, _, _, fs, _, moments = xxz_setup(seed=17)
        grid = np.linspace(-math.pi, math.pi, 20, endpoint=False)
        m, batches = 500, 200
        curves = [evaluate_acdf(draw_batch(fs, moments, m, SINGLE_SHOT, seed=42, repetition=r), fs, grid)
                  for r in range(batches)]
        mean, variance = estimator_stats(curves)
        expected = deterministic_acdf(fs, moments, grid).g_values
        exact_variance = estimator_variance(fs, moments, grid, m, SINGLE_SHOT)
        self.assertTrue(np.all(np.abs(mean - expected) <= 4 * np.sqrt(exact_variance / batches)))
        self.assertTrue(np.all(variance <= exact_variance * (1 + 5 / math.sqrt(batches))))
        # per-draw variance of the two-quadrature estimator stays below 4 norm_F^2
        self.assertTrue(np.all(exact_variance <= 4 * fs.norm_F ** 2 / m + 1e-15))

    def test_exact_mode_variance_is_smaller(self):
        _, _, _, fs, _, moments = xxz_setup()
        grid = np.linspace(-1.0, 1.0, 7)
        exact = estimator_variance(fs, moments, grid, 100, EXACT)
        shots = estimator_variance(fs, moments, grid, 100, SINGLE_SHOT)
        self.assertTrue(np.all(exact <= shots + 1e-15))
        self.assertTrue(np.all(exact >= 0))

    def test_needs_two_curves(self):
        with self.assertRaises(ParameterError):
            estimator_stats([np.zeros(3)])


class MedianAndDecisionTests(SimpleTestCase):
    """Aggregation and the eta threshold"""

    def test_median_of_means(self):
        self.assertEqual(median_of_means([1]), 1)
        self.assertEqual(median_of_means([1, 2, 100]), 2)
        self.assertEqual(median_of_means([4, 3, 2, 1]), 2)
        with self.assertRaises(ParameterError):
            median_of_means([])

    def test_decide_jump(self):
        self.assertEqual(decide_jump(0.0, 0.1, 0.01), BELOW_ETA)
        self.assertEqual(decide_jump(0.9, 0.1, 0.01), ABOVE_ZERO)
        self.assertEqual(decide_jump(0.05, 0.1, 0.01), ABOVE_ZERO)
        with self.assertRaises(ParameterError):
            decide_jump(0.5, 0.02, 0.01)


class AggregateCurvesTests(SimpleTestCase):
    """Pointwise median of means over repetition curves"""

    @staticmethod
    def shifted(curve, offsets):
        return [replace(curve, g_values=curve.g_values + c, grad_values=curve.grad_values - c) for c in offsets]

    def setUp(self):
        _, _, _, self.fs, _, self.moments = xxz_setup()
        self.curve = deterministic_acdf(self.fs, self.moments, make_grid(0.5))

    def test_single_curve_unchanged(self):
        self.assertIs(aggregate_curves([self.curve]), self.curve)

    def test_identical_curves(self):
        aggregated = aggregate_curves([self.curve] * 4, groups=2)
        np.testing.assert_array_equal(aggregated.g_values, self.curve.g_values)
        np.testing.assert_array_equal(aggregated.grad_values, self.curve.grad_values)
        self.assertEqual(aggregated.meta['groups'], 2)

    def test_one_group_is_the_mean(self):
        aggregated = aggregate_curves(self.shifted(self.curve, [0.0, 0.3, 0.9]), groups=1)
        np.testing.assert_allclose(aggregated.g_values, self.curve.g_values + 0.4)
        np.testing.assert_allclose(aggregated.grad_values, self.curve.grad_values - 0.4)

    def test_median_ignores_an_outlier(self):
        aggregated = aggregate_curves(self.shifted(self.curve, [0.0, 0.1, 50.0]))
        np.testing.assert_allclose(aggregated.g_values, self.curve.g_values + 0.1)
        # grad is shifted down, so the same curve sits in the middle
        np.testing.assert_allclose(aggregated.grad_values, self.curve.grad_values - 0.1)

    def test_groups_clamped_to_curve_count(self):
        self.assertEqual(aggregate_curves([self.curve] * 3, groups=9).meta['groups'], 3)

    def test_invalid_inputs(self):
        with self.assertRaises(ParameterError):
            aggregate_curves([])
        other = deterministic_acdf(self.fs, self.moments, make_grid(0.4))
        with self.assertRaises(ParameterError):
            aggregate_curves([self.curve, other])
        with self.assertRaises(ParameterError):
            aggregate_curves([self.curve] * 2, groups=0)

    def test_reduces_single_shot_error(self):
        grid = np.linspace(-math.pi, math.pi, 64, endpoint=False)
        expected = deterministic_acdf(self.fs, self.moments, grid).g_values
        curves = [evaluate_acdf(draw_batch(self.fs, self.moments, 500, SINGLE_SHOT, seed=11, repetition=r), self.fs, grid)
                  for r in range(10)]
        aggregated = aggregate_curves(curves, groups=5)
        single = np.mean([np.sqrt(np.mean((c.g_values - expected) ** 2)) for c in curves])
        self.assertLess(np.sqrt(np.mean((aggregated.g_values - expected) ** 2)), 0.7 * single)
        self.assertEqual(aggregated.m_samples, 5000)


class CurveFileTests(SimpleTestCase):
    """Curve CSV with JSON sidecar"""

    def test_round_trip(self):
        _, _, _, fs, delta, moments = xxz_setup()
        curves = acdf_curves(fs, moments, make_grid(0.5, cap=256), 50, SINGLE_SHOT, seed=1, repetitions=2)
        self.assertEqual(len(curves), 2)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'curves' / 'curve_00.csv'
            write_curve(path, curves[0], {'config_hash': 'f00', 'root_seed': 1, 'delta': delta, 'D': fs.D})
            restored, sidecar = read_curve(path)
        np.testing.assert_array_equal(restored.g_values, curves[0].g_values)
        np.testing.assert_array_equal(restored.grid, curves[0].grid)
        self.assertEqual(sidecar['M'], 50)
        self.assertEqual(sidecar['mode'], SINGLE_SHOT)
        self.assertEqual(sidecar['delta'], delta)

    def test_infinite_mode_single_curve(self):
        _, _, _, fs, _, moments = xxz_setup()
        curves = acdf_curves(fs, moments, make_grid(0.5, cap=64), 10, INFINITE, seed=0, repetitions=10)
        self.assertEqual(len(curves), 1)
        self.assertEqual(curves[0].m_samples, 0)

    def test_sampling_serializer(self):
        serializer = SamplingSpecSerializer(data={'M': '500', 'mode': 'infinite'})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['repetitions'], 10)
