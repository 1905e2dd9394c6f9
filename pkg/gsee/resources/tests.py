from decimal import Decimal, localcontext
import math

import numpy as np
from django.test import SimpleTestCase
from scipy import special

from gsee.exceptions import DomainError, ParameterError
from hamiltonian.operators import build_heisenberg_full

from .estimates import (
    circuit_depth,
    estimate_resources,
    log_grid,
    resolvable_eta,
    resolvable_eta_sweep,
    runtime_f,
    max_runtime,
    sample_count,
    trotter_steps,
)
from .serializers import ResourceEstimateSerializer, ResourceSpecSerializer


def reference_D(epsilon, delta):
    """Same closed form evaluated with scipy's Lambert W"""
    w0 = lambda x: special.lambertw(x).real
    beta = max(1.0, w0(2 / (math.pi * epsilon ** 2)) / (4 * math.sin(delta) ** 2))
    w = w0(18 / (math.pi * epsilon ** 2))
    e = min(1.0, 4 * math.exp(-w / 2))
    f = -(math.log(e) + beta) / w0(-(1 + math.log(e) / beta) / math.e)
    return math.sqrt(f * w)


class MaxRuntimeTests(SimpleTestCase):
    """Maximal runtime D"""

    def test_unit_branch(self):
        self.assertAlmostEqual(runtime_f(7.5, 1.0), 7.5, places=6)

    def test_removable_singularity(self):
        beta = 3.0
        self.assertAlmostEqual(runtime_f(beta, math.exp(-beta)), math.e * beta, places=6)

    def test_odd_and_at_least_three(self):
        for epsilon in np.linspace(0.01, 0.95, 30):
            for delta in (0.001, 0.05, 0.3, 0.5):
                D = max_runtime(epsilon, delta)
                self.assertEqual(D % 2, 1)
                self.assertGreaterEqual(D, 3)

    def test_non_increasing_in_epsilon(self):
        values = [max_runtime(e, 0.1) for e in np.linspace(0.01, 0.9, 60)]
        self.assertTrue(all(b <= a for a, b in zip(values, values[1:])))

    def test_matches_reference_evaluation(self):
        for epsilon, delta in [(0.1, 0.1), (0.1, 0.2), (0.02, 0.05), (0.3, 0.01)]:
            root = reference_D(epsilon, delta)
            self.assertEqual(max_runtime(epsilon, delta), 2 * math.ceil(root * (1 - 1e-12)) + 1)

    def test_known_value(self):
        self.assertEqual(max_runtime(0.1, 0.2), 25)

    def test_domain(self):
        with self.assertRaises(DomainError):
            max_runtime(1.5, 0.1)

    def test_six_and_twentysix_site_ratio(self):
        small = build_heisenberg_full(6, seed=1)
        large = build_heisenberg_full(26, seed=1)
        d_small = max_runtime(0.055, small.tau * 0.055)
        d_large = max_runtime(0.019, large.tau * 0.019)
        self.assertTrue(175 <= d_small <= 700, d_small)
        self.assertTrue(3300 <= d_large <= 13200, d_large)
        ratio = d_large / d_small
        self.assertLessEqual(abs(ratio - 6600 / 350) / (6600 / 350), 0.35)


class SampleCountTests(SimpleTestCase):
    """Sample count M and its inverse"""

    def test_high_precision_evaluation(self):
        D, eta, epsilon, tau, vartheta = 6600, 7e-6, 7e-6 / 4, 0.05, 0.05
        with localcontext() as ctx:
            ctx.prec = 50
            a = Decimal(2.07) / Decimal(math.pi) * ((Decimal(4 * D)).ln() + Decimal('0.57721567')) + 1
            log_term = (1 / (Decimal(tau) * Decimal(epsilon))).ln().ln() + (1 / Decimal(vartheta)).ln()
            exact = 2 * (a / (Decimal(eta) - 2 * Decimal(epsilon))) ** 2 * log_term
        M = sample_count(D, eta, epsilon, tau, vartheta)
        self.assertLessEqual(abs(M - float(exact)), 1e-9 * float(exact) + 1)

    def test_order_of_magnitude(self):
        large = build_heisenberg_full(26, seed=1)
        eta = 7e-6
        M = sample_count(6600, eta, eta / 4, large.tau, 0.05)
        self.assertLessEqual(abs(math.log10(M) - 13.0), 1.5)

    def test_divergence_near_threshold(self):
        small = sample_count(351, 0.2 + 1e-3, 0.1, 0.1, 0.05)
        large = sample_count(351, 0.2 + 1e-5, 0.1, 0.1, 0.05)
        self.assertGreater(large, 9_000 * small)

    def test_quadratic_dependence(self):
        m1 = sample_count(101, 0.3, 0.1, 0.1, 0.05)
        m2 = sample_count(101, 0.4, 0.1, 0.1, 0.05)
        self.assertAlmostEqual(m1 / m2, 4.0, delta=4.0 / m2 + 1e-9)

    def test_threshold_rejected(self):
        with self.assertRaises(ParameterError):
            sample_count(101, 0.2, 0.1, 0.1, 0.05)

    def test_round_trip(self):
        for M in (10, 1_000, 123_456, 10 ** 9):
            eta = resolvable_eta(M, 351, 0.001, 0.2, 0.05)
            back = sample_count(351, eta, 0.001, 0.2, 0.05)
            self.assertTrue(M <= back <= M * (1 + 1e-6) + 1, (M, back))

    def test_plateau_shape(self):
        large = build_heisenberg_full(26, seed=1)
        epsilon = 0.019
        D = max_runtime(epsilon, large.tau * epsilon)
        rows = resolvable_eta_sweep(log_grid(1e2, 1e12, 41), D, epsilon, large.tau, 0.05)
        etas = [eta for _, eta in rows]
        self.assertTrue(all(b <= a for a, b in zip(etas, etas[1:])))
        self.assertTrue(all(eta > 2 * epsilon for eta in etas))
        self.assertLess(
            resolvable_eta(10 ** 12, D, epsilon, large.tau, 0.05) - 2 * epsilon,
            0.02 * (resolvable_eta(100, D, epsilon, large.tau, 0.05) - 2 * epsilon),
        )


class CircuitTests(SimpleTestCase):
    """Trotter steps and depth"""

    def test_trotter_steps_arithmetic(self):
        self.assertEqual(trotter_steps(1.0, 2, 0.5, 2, 0.01), 10)
        self.assertEqual(trotter_steps(2.0, 1, 1.0, 3, 0.1), 180)

    def test_trotter_steps_monotone(self):
        values = [trotter_steps(1.0, 2, 0.1, 50, e) for e in np.logspace(-1, -6, 30)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_depth(self):
        self.assertEqual(circuit_depth(26, 8, 6600), 2_745_600)
        self.assertEqual(circuit_depth(1, 1, 1), 2)
        self.assertEqual(circuit_depth(4, 8, 202), 2 * circuit_depth(4, 8, 101))

    def test_estimate_bundle(self):
        estimate = estimate_resources(0.05, 0.01, 0.1, 4, eta=0.3, steps_policy='fixed', steps_per_unit=8)
        self.assertEqual(estimate.depth, 2 * 4 * 8 * estimate.D)
        self.assertEqual(estimate.depth_fast_forward, estimate.depth // 2)
        self.assertAlmostEqual(estimate.t_max, 0.1 * estimate.D)
        data = ResourceEstimateSerializer(estimate).data
        self.assertEqual(data['M'], estimate.M)

    def test_formula_policy_steps_per_unit(self):
        estimate = estimate_resources(0.05, 0.01, 0.1, 4, steps_policy='formula', prefactor=1.0, order=2)
        expected = math.ceil(trotter_steps(1.0, 2, 0.1, estimate.D, 0.05) / estimate.D)
        self.assertEqual(estimate.r, expected)
        self.assertEqual(estimate.inputs['eta'], 0.2)


class ResourceSpecSerializerTests(SimpleTestCase):
    """Resources config section"""

    def test_defaults(self):
        serializer = ResourceSpecSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['vartheta'], 0.05)
        self.assertIsNone(serializer.validated_data['eta'])

    def test_bad_vartheta(self):
        serializer = ResourceSpecSerializer(data={'vartheta': '1.5'})
        self.assertFalse(serializer.is_valid())
