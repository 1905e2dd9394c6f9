import math

import numpy as np
from django.test import SimpleTestCase
from scipy import special, stats

from gsee.exceptions import DomainError
from gsee.streams import generator
from resources.estimates import max_runtime

from .series import (
    AliasTable,
    coefficients,
    evaluate_series,
    linear_scan_index,
    norm_bound,
    sample_index,
    sample_indices,
    select_beta,
    smoothed_step,
)


class SelectBetaTests(SimpleTestCase):
    """Choice of the smoothing parameter"""

    def test_clamped_to_one(self):
        self.assertEqual(select_beta(0.5, 0.99), 1.0)

    def test_value(self):
        expected = special.lambertw(2.0 / (math.pi * 0.01)).real / (4.0 * math.sin(0.1) ** 2)
        self.assertAlmostEqual(select_beta(0.1, 0.1) / expected, 1.0, places=12)

    def test_monotone(self):
        deltas = np.linspace(0.01, 0.5, 40)
        betas = [select_beta(d, 0.05) for d in deltas]
        self.assertTrue(all(b <= a for a, b in zip(betas, betas[1:])))
        epsilons = np.linspace(0.01, 0.9, 40)
        betas = [select_beta(0.1, e) for e in epsilons]
        self.assertTrue(all(b <= a for a, b in zip(betas, betas[1:])))

    def test_domain(self):
        with self.assertRaises(DomainError):
            select_beta(0.0, 0.1)
        with self.assertRaises(DomainError):
            select_beta(math.pi / 6, 0.1)
        with self.assertRaises(DomainError):
            select_beta(0.1, 1.0)


class CoefficientTests(SimpleTestCase):
    """Bessel-based coefficient magnitudes"""

    def test_matches_scipy_bessel(self):
        fs = coefficients(19.25, 12)
        prefactor = math.sqrt(19.25 / (2 * math.pi))
        for j in range(12):
            expected = prefactor * (special.ive(j, 19.25) + special.ive(j + 1, 19.25)) / (2 * j + 1)
            self.assertAlmostEqual(fs.coeff_mags[j] / expected, 1.0, places=10)
        self.assertAlmostEqual(fs.coeff_mags[12] / (prefactor * special.ive(12, 19.25) / 25), 1.0, places=10)

    def test_structure(self):
        fs = coefficients(40.0, 30)
        self.assertEqual(fs.f0, 0.5)
        self.assertEqual(fs.D, 61)
        self.assertTrue(np.all(np.diff(fs.coeff_mags) < 0))
        self.assertLessEqual(abs(fs.norm_F - fs.coeff_mags.sum()), 1e-12)

    def test_norm_bound_never_violated(self):
        for delta, epsilon in [(0.2, 0.1), (0.05, 0.02), (0.01, 0.05), (0.3, 0.3)]:
            D = max_runtime(epsilon, delta)
            fs = coefficients(select_beta(delta, epsilon), (D - 1) // 2)
            self.assertLessEqual(fs.norm_F, norm_bound(D))

    def test_large_beta_without_overflow(self):
        fs = coefficients(5e5, 2000)
        self.assertTrue(np.all(np.isfinite(fs.coeff_mags)))
        self.assertGreater(fs.norm_F, 0.0)


class EvaluateSeriesTests(SimpleTestCase):
    """Truncated series against the Heaviside step"""

    def test_origin_and_symmetry(self):
        fs = coefficients(10.0, 20)
        self.assertEqual(evaluate_series(fs, 0.0), 0.5)
        xs = np.linspace(-math.pi, math.pi, 101)
        np.testing.assert_allclose(evaluate_series(fs, xs) + evaluate_series(fs, -xs), 1.0, atol=1e-12)

    def test_converges_to_erf_limit(self):
        fs = coefficients(12.0, 80)
        xs = np.linspace(-math.pi, math.pi, 301)
        np.testing.assert_allclose(evaluate_series(fs, xs), smoothed_step(12.0, xs), atol=1e-10)

    def test_quarter_turn(self):
        beta = select_beta(0.2, 0.1)
        fs = coefficients(beta, (max_runtime(0.1, 0.2) - 1) // 2)
        self.assertLessEqual(abs(evaluate_series(fs, math.pi / 2) - 1.0), 0.1)

    def check_filter_fidelity(self, delta, epsilon):
        beta = select_beta(delta, epsilon)
        fs = coefficients(beta, (max_runtime(epsilon, delta) - 1) // 2)
        xs = np.linspace(-math.pi / 2, math.pi / 2, 10_000)
        xs = xs[np.abs(xs) >= delta]
        heaviside = (xs > 0).astype(float)
        self.assertLessEqual(np.max(np.abs(evaluate_series(fs, xs) - heaviside)), epsilon)

    def test_filter_fidelity_coarse(self):
        self.check_filter_fidelity(0.2, 0.1)

    def test_filter_fidelity_fine(self):
        self.check_filter_fidelity(0.05, 0.02)


class SamplingTests(SimpleTestCase):
    """k ~ |F_{2k+1}| / norm_F"""

    def test_single_atom(self):
        fs = coefficients(3.0, 0)
        rng = generator(1, 'batch', 0)
        self.assertTrue(all(sample_index(fs, rng) == 0 for _ in range(20)))

    def test_frequencies_within_multinomial_bands(self):
        fs = coefficients(20.0, 15)
        n = 100_000
        counts = np.bincount(sample_indices(fs, generator(7, 'batch', 0), n), minlength=16)
        p = fs.probabilities
        sigma = np.sqrt(n * p * (1 - p))
        self.assertTrue(np.all(np.abs(counts - n * p) <= 4 * sigma + 1))

    def test_alias_and_linear_scan_agree(self):
        probs = np.array([0.05, 0.3, 0.1, 0.25, 0.2, 0.1])
        table = AliasTable(probs)
        u = generator(3, 'test').random(60_000)
        alias_counts = np.bincount(table.lookup(u), minlength=6)
        scan_counts = np.bincount(linear_scan_index(probs, generator(4, 'test').random(60_000)), minlength=6)
        _, p_value, _, _ = stats.chi2_contingency(np.vstack([alias_counts, scan_counts]))
        self.assertGreater(p_value, 1e-4)

    def test_alias_table_is_exact(self):
        probs = np.array([0.5, 0.25, 0.125, 0.125])
        table = AliasTable(probs)
        # total acceptance mass per index reproduces the distribution
        mass = table.accept / 4.0
        np.add.at(mass, table.alias, (1.0 - table.accept) / 4.0)
        np.testing.assert_allclose(mass, probs, atol=1e-15)

    def test_deterministic_per_stream(self):
        fs = coefficients(50.0, 40)
        a = sample_indices(fs, generator(5, 'batch', 2), 100)
        b = sample_indices(fs, generator(5, 'batch', 2), 100)
        np.testing.assert_array_equal(a, b)


class NormBoundTests(SimpleTestCase):
    """Logarithmic growth of the series norm"""

    def test_values(self):
        self.assertAlmostEqual(norm_bound(1), 2.07 / (2 * math.pi) * (1 + 2 * math.log(2)) + 0.5, places=14)

    def test_bounds_the_norm_across_runtimes(self):
        beta = select_beta(0.0108, 0.055)
        for D in (1, 11, 101, 351, 1001, 6601):
            self.assertLessEqual(coefficients(beta, (D - 1) // 2).norm_F, norm_bound(D), f"D={D}")
        self.assertLess(norm_bound(351), norm_bound(6601))
