import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, special, stats

from gsee.exceptions import DomainError

from .functions import (
    EULER_GAMMA,
    bessel_i_scaled,
    bessel_i_scaled_sequence,
    erf,
    f_distribution_cdf,
    harmonic,
    lambert_w0,
    regularized_incomplete_beta,
)


class LambertWTests(SimpleTestCase):
    """Principal branch of the Lambert W function"""

    def test_known_values(self):
        self.assertEqual(lambert_w0(0.0), 0.0)
        self.assertAlmostEqual(lambert_w0(math.e), 1.0, places=14)
        self.assertAlmostEqual(lambert_w0(1.0), 0.5671432904097838, places=14)

    def test_branch_point(self):
        self.assertAlmostEqual(lambert_w0(-1.0 / math.e), -1.0, places=7)
        self.assertAlmostEqual(lambert_w0(-math.exp(-1.0)), -1.0, places=7)

    def test_residual_on_log_grid(self):
        xs = np.concatenate([
            -1.0 / math.e + np.logspace(-6, math.log10(1.0 / math.e), 200),
            np.logspace(-8, 6, 400),
        ])
        for x in xs:
            w = lambert_w0(x)
            self.assertGreaterEqual(w, -1.0)
            self.assertLessEqual(abs(w * math.exp(w) - x), 1e-12 * max(1.0, abs(x)), msg=f"x={x}")

    def test_matches_scipy(self):
        for x in [-0.3, -0.1, 0.5, 2.0, 10.0, 1e3, 1e6]:
            self.assertAlmostEqual(lambert_w0(x), special.lambertw(x).real, places=12)

    def test_domain_error(self):
        with self.assertRaises(DomainError):
            lambert_w0(-0.5)


class ScaledBesselTests(SimpleTestCase):
    """exp(-beta) I_n(beta) via series and Miller recurrence"""

    def test_small_argument_limits(self):
        self.assertAlmostEqual(bessel_i_scaled(0, 1e-300), 1.0, places=15)
        self.assertEqual(bessel_i_scaled(3, 1e-300), 0.0)
        self.assertLess(bessel_i_scaled(1, 1e-12), 1e-12)

    def test_recurrence_identity(self):
        for beta in (0.5, 1.0, 10.0, 100.0, 1000.0):
            values = bessel_i_scaled_sequence(51, beta)
            for n in range(1, 51):
                lhs = values[n - 1] - values[n + 1]
                rhs = 2.0 * n / beta * values[n]
                self.assertLessEqual(abs(lhs - rhs), 1e-10 * abs(rhs), msg=f"n={n}, beta={beta}")

    def test_example_order_five(self):
        values = [bessel_i_scaled(n, 100.0) for n in (4, 5, 6)]
        self.assertAlmostEqual((values[0] - values[2]) / (0.1 * values[1]), 1.0, places=10)

    def test_matches_scipy_ive(self):
        for beta in (0.3, 1.0, 7.5, 250.0, 5e4, 2e6):
            for n in (0, 1, 2, 17, 200):
                expected = special.ive(n, beta)
                got = bessel_i_scaled(n, beta)
                if expected > 1e-290:
                    self.assertLessEqual(abs(got - expected), 1e-10 * expected, msg=f"n={n}, beta={beta}")

    def test_sequence_matches_single_values(self):
        seq = bessel_i_scaled_sequence(30, 42.0)
        for n in (0, 7, 30):
            self.assertAlmostEqual(seq[n] / bessel_i_scaled(n, 42.0), 1.0, places=12)

    def test_sum_identity(self):
        seq = bessel_i_scaled_sequence(400, 300.0)
        self.assertAlmostEqual(seq[0] + 2.0 * seq[1:].sum(), 1.0, places=12)

    def test_domain_error(self):
        with self.assertRaises(DomainError):
            bessel_i_scaled(1, 0.0)
        with self.assertRaises(DomainError):
            bessel_i_scaled(-1, 1.0)


class ErfTests(SimpleTestCase):
    """Error function"""

    def test_values(self):
        self.assertEqual(erf(0.0), 0.0)
        self.assertLessEqual(abs(erf(10.0) - 1.0), 1e-15)
        expected = 2.0 / math.sqrt(math.pi) * integrate.quad(lambda t: math.exp(-t * t), 0.0, 1.0, epsabs=1e-14)[0]
        self.assertAlmostEqual(erf(1.0), expected, places=14)
        self.assertAlmostEqual(erf(1.0), 0.8427007929497149, places=14)

    def test_odd_and_bounded(self):
        for x in np.linspace(0.0, 8.0, 161):
            self.assertEqual(erf(-x), -erf(x))
            self.assertLessEqual(abs(erf(x)), 1.0)

    def test_matches_scipy(self):
        for x in np.linspace(-7.0, 7.0, 281):
            self.assertAlmostEqual(erf(x), special.erf(x), places=14)


class FDistributionTests(SimpleTestCase):
    """F-distribution CDF through the regularized incomplete beta function"""

    def test_limits(self):
        self.assertEqual(f_distribution_cdf(0.0, 1, 10), 0.0)
        self.assertEqual(f_distribution_cdf(math.inf, 1, 10), 1.0)
        self.assertAlmostEqual(f_distribution_cdf(1e12, 1, 10), 1.0, places=8)

    def test_against_density_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            d1 = int(rng.integers(1, 6))
            d2 = int(rng.integers(2, 400))
            f = float(rng.uniform(0.0, 12.0))
            density = stats.f(d1, d2).pdf
            # t = u**2 removes the integrable singularity at the origin
            expected = integrate.quad(
                lambda u: 2.0 * u * density(u * u), 0.0, math.sqrt(f), epsabs=1e-12, epsrel=1e-12, limit=200
            )[0]
            self.assertLessEqual(abs(f_distribution_cdf(f, d1, d2) - expected), 1e-8, msg=f"f={f}, d=({d1},{d2})")

    def test_example(self):
        self.assertAlmostEqual(f_distribution_cdf(1.0, 1, 4), stats.f.cdf(1.0, 1, 4), places=10)

    def test_monotone_in_f(self):
        values = [f_distribution_cdf(f, 1, 30) for f in np.linspace(0.0, 40.0, 400)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_incomplete_beta_symmetry(self):
        for a, b, x in [(0.5, 2.0, 0.3), (3.0, 7.5, 0.8), (10.0, 10.0, 0.5)]:
            self.assertAlmostEqual(
                regularized_incomplete_beta(a, b, x),
                1.0 - regularized_incomplete_beta(b, a, 1.0 - x),
                places=12,
            )
            self.assertAlmostEqual(regularized_incomplete_beta(a, b, x), special.betainc(a, b, x), places=12)


class HarmonicTests(SimpleTestCase):
    """Harmonic numbers"""

    def test_exact(self):
        self.assertEqual(harmonic(1), 1.0)
        self.assertEqual(harmonic(2), 1.5)
        self.assertAlmostEqual(harmonic(10), 7381 / 2520, places=14)

    def test_asymptotic_agrees_at_hundred(self):
        self.assertLessEqual(abs(harmonic(100, 'asymptotic') - harmonic(100, 'exact')), 1e-9)

    def test_constant(self):
        self.assertAlmostEqual(EULER_GAMMA, 0.5772156649015329, places=15)

    def test_rejects_bad_input(self):
        with self.assertRaises(DomainError):
            harmonic(0)
        with self.assertRaises(DomainError):
            harmonic(5, 'fast')
