import math

import numpy as np
from django.test import SimpleTestCase, tag

from acdf.estimator import AcdfCurve, deterministic_acdf, make_grid
from evolution.spectrum import diagonalize, exact_moments, spectral_measure
from gsee.exceptions import (
    DegenerateSignalError,
    EmptyWindowError,
    NotDetectedError,
    ParameterError,
    SignalTooShortError,
)
from gsee.streams import generator
from hamiltonian.operators import build_xxz_chain
from resources.estimates import design_filter
from states.vectors import eigenstate, random_state

from .changepoint import AS_PRINTED, Signal, anova_validate, first_minimum, kernel_breakpoint, median_bandwidth
from .search import (
    CERTIFIED_SEARCH,
    RUPTURE,
    VARIANCE_SCAN,
    GuardParams,
    certified_search,
    detect_inflection,
    eigenvalue_free_region,
    find_smallest_breakpoint,
    first_significant_peak,
    gradient_noise,
    locate_inflection,
    noise_floor,
    refine_energy,
    variance_scan,
)
from .serializers import DetectionResultSerializer, DetectionSpecSerializer, detection_kwargs


def brute_force_breakpoint(y, min_seg=2):
    """Exhaustive scan with the full kernel matrix"""
    h = median_bandwidth(y)
    kernel = np.exp(-((y[:, None] - y[None, :]) / h) ** 2)
    n = y.size
    costs = []
    for b in range(min_seg, n - min_seg + 1):
        costs.append(n - kernel[:b, :b].sum() / b - kernel[b:, b:].sum() / (n - b))
    return min_seg + first_minimum(np.array(costs))


def step_curve(grid, steps, grad=None):
    g_values = np.zeros(grid.size)
    for x0, height in steps:
        g_values[grid >= x0] += height
    grad = np.zeros(grid.size) if grad is None else grad
    return AcdfCurve(grid=grid, g_values=g_values, grad_values=grad, norm_F=1.0, m_samples=0)


class KernelBreakpointTests(SimpleTestCase):
    """Kernel two-segment split"""

    def test_perfect_step(self):
        self.assertEqual(kernel_breakpoint(np.array([0, 0, 0, 1, 1, 1.0]), min_seg=2), 3)

    def test_constant_signal_ties_to_smallest(self):
        self.assertEqual(kernel_breakpoint(np.full(30, 0.4), min_seg=2), 2)
        self.assertEqual(kernel_breakpoint(np.full(30, 0.4), min_seg=5), 5)

    def test_matches_exhaustive_scan(self):
        for seed in range(100):
            rng = generator(seed, 'signal')
            n = int(rng.integers(4, 201))
            y = rng.normal(size=n)
            if seed % 2:
                y[int(rng.integers(1, n)):] += rng.uniform(0.5, 3.0)
            self.assertEqual(kernel_breakpoint(y), brute_force_breakpoint(y), f"seed {seed}, n={n}")

    def test_too_short(self):
        with self.assertRaises(SignalTooShortError):
            kernel_breakpoint(np.zeros(3), min_seg=2)

    def test_signal_type(self):
        signal = Signal(np.array([0, 0, 0, 1, 1, 1.0]))
        self.assertEqual(kernel_breakpoint(signal), 3)
        self.assertEqual(len(signal.prefix(4)), 4)
        with self.assertRaises(ParameterError):
            Signal(np.zeros(3), np.array([0.0, 2.0, 1.0]))


class AnovaTests(SimpleTestCase):
    """F-test with the monotone-increase condition"""

    def test_perfect_step(self):
        result = anova_validate(np.array([0, 0, 0, 1, 1, 1.0]), 3, 0.01)
        self.assertTrue(result.significant)
        self.assertEqual(result.f, math.inf)
        self.assertEqual(result.p, 1.0)

    def test_constant_signal(self):
        result = anova_validate(np.ones(10), 4, 0.01)
        self.assertFalse(result.significant)
        self.assertEqual((result.f, result.p), (0.0, 0.0))

    def test_step_down_rejected(self):
        self.assertFalse(anova_validate(np.array([1, 1, 1, 0, 0, 0.0]), 3, 0.5).significant)

    def test_scale_invariance(self):
        y = generator(4, 'anova').normal(size=60) + np.repeat([0.0, 0.8], 30)
        base = anova_validate(y, 30, 0.05)
        scaled = anova_validate(7.5 * y, 30, 0.05)
        self.assertAlmostEqual(base.f, scaled.f, delta=1e-9 * base.f)
        self.assertAlmostEqual(base.p, scaled.p, places=12)
        self.assertEqual(base.significant, scaled.significant)

    def test_as_printed_orientation(self):
        result = anova_validate(np.array([0, 0, 0, 1, 1, 1.0]), 3, 0.01, orientation=AS_PRINTED)
        self.assertEqual(result.f, 0.0)
        self.assertFalse(result.significant)

    def test_degenerate_split(self):
        with self.assertRaises(DegenerateSignalError):
            anova_validate(np.zeros(6), 0, 0.01)
        with self.assertRaises(DegenerateSignalError):
            anova_validate(np.zeros(6), 6, 0.01)


class SmallestBreakpointTests(SimpleTestCase):
    """Leftward shrinking loop"""

    def test_perfect_step(self):
        signal = Signal(np.repeat([0.0, 1.0], [50, 50]))
        result = find_smallest_breakpoint(signal, 0.01)
        self.assertEqual(result.breakpoint_index, 50)
        self.assertEqual([entry.accepted for entry in result.trace], [True, False])
        self.assertEqual(result.inflection_x, 50.0)

    def test_two_step_staircase(self):
        signal = Signal(np.repeat([0.0, 0.3, 1.0], 60))
        result = find_smallest_breakpoint(signal, 0.01)
        self.assertEqual(result.breakpoint_index, 60)
        accepted = [entry.candidate for entry in result.trace if entry.accepted]
        self.assertEqual(accepted, sorted(accepted, reverse=True))

    def test_pure_noise_rejected(self):
        rejected = 0
        for seed in range(100):
            y = generator(seed, 'noise').normal(size=100)
            sigma, eps_tilde = float(y.std(ddof=1)), float(np.mean(np.abs(y)))
            result = find_smallest_breakpoint(Signal(y), 0.01, sigma=sigma, eps_tilde=eps_tilde)
            rejected += not result.trace[0].accepted
            if not result.trace[0].accepted:
                self.assertEqual(result.breakpoint_index, 100)
                self.assertFalse(result.detected)
        self.assertGreaterEqual(rejected, 95)

    def test_percentile_gate(self):
        signal = Signal(np.repeat([0.0, 1.0], 50))
        passing = GuardParams(k=0.0, percentile_gate=True, gate_s=1.0)
        blocking = GuardParams(k=0.0, percentile_gate=True, gate_s=5.0)
        self.assertEqual(find_smallest_breakpoint(signal, 0.01, passing, sigma=0.3).breakpoint_index, 50)
        result = find_smallest_breakpoint(signal, 0.01, blocking, sigma=0.3)
        self.assertFalse(result.detected)
        self.assertEqual(result.trace[0].reason, 'percentile')


class NoiseFloorTests(SimpleTestCase):
    """Noise estimate on the eigenvalue-free region"""

    def test_zero_curve(self):
        self.assertEqual(noise_floor(step_curve(make_grid(0.1), [])), (0.0, 0.0))

    def test_eigenstate_ripple_bounded(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        epsilon = 0.1
        fs = design_filter(epsilon, h.tau * epsilon)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 0)), fs.d)
        curve = deterministic_acdf(fs, moments, make_grid(h.tau * epsilon))
        sigma, eps_tilde = noise_floor(curve)
        self.assertLessEqual(sigma, epsilon)
        self.assertLessEqual(eps_tilde, epsilon)

    def test_region_fallback(self):
        curve = step_curve(make_grid(0.1), [(0.0, 1.0)])
        with self.assertLogs('detect.search', level='WARNING'):
            self.assertEqual(noise_floor(curve, region=(-1.0, -1.0)), (0.0, 0.0))

    def test_region_bounds(self):
        lo, hi = eigenvalue_free_region(1.4, 0.01)
        self.assertAlmostEqual(lo, 1.41 - math.pi)
        self.assertAlmostEqual(hi, -1.41)
        with self.assertRaises(ParameterError):
            eigenvalue_free_region(2.0, 0.01)

    def test_empty_region(self):
        curve = step_curve(np.linspace(0.0, 1.0, 10), [])
        with self.assertRaises(EmptyWindowError):
            noise_floor(curve)

    def test_gradient_noise(self):
        grid = make_grid(0.1)
        self.assertEqual(gradient_noise(step_curve(grid, [])), (0.0, 0.0))
        grad = np.where(grid < -2.0, 0.5, 0.0)
        sigma, mean = gradient_noise(step_curve(grid, [], grad=grad), region=(-3.0, -2.0))
        self.assertEqual(sigma, 0.0)
        self.assertAlmostEqual(mean, 0.5)


class RefineEnergyTests(SimpleTestCase):
    """Steepest point near the inflection"""

    def test_symmetric_bump(self):
        grid = np.linspace(-1.0, 1.0, 201)
        grad = np.exp(-((grid - 0.3) / 0.05) ** 2)
        curve = step_curve(grid, [], grad=grad)
        self.assertAlmostEqual(refine_energy(curve, 0.25, 0.1), 0.3)

    def test_flat_gradient_takes_left_edge(self):
        grid = np.linspace(-1.0, 1.0, 201)
        curve = step_curve(grid, [])
        self.assertAlmostEqual(refine_energy(curve, 0.0, 0.1), -0.1)

    def test_empty_window(self):
        curve = step_curve(np.linspace(0.0, 1.0, 11), [])
        with self.assertRaises(EmptyWindowError):
            refine_energy(curve, 5.0, 0.1)

    def test_locate_scans_past_the_window(self):
        grid = np.linspace(-1.0, 1.0, 201)
        grad = np.exp(-((grid - 0.4) / 0.05) ** 2)
        curve = step_curve(grid, [], grad=grad)
        self.assertAlmostEqual(refine_energy(curve, 0.0, 0.105), 0.1)
        self.assertAlmostEqual(locate_inflection(curve, 0.0, 0.105, 0.5, 0.1), 0.4)

    def test_first_peak_beats_a_taller_later_one(self):
        grid = np.linspace(-1.0, 1.0, 201)
        grad = 0.5 * np.exp(-((grid - 0.1) / 0.03) ** 2) + np.exp(-((grid - 0.4) / 0.03) ** 2)
        curve = step_curve(grid, [], grad=grad)
        self.assertAlmostEqual(locate_inflection(curve, 0.0, 0.1, 0.5, 0.1), 0.1)
        self.assertAlmostEqual(first_significant_peak(curve, 0.2, 0.5, 0.1, 0.1), 0.4)

    def test_high_floor_keeps_the_breakpoint(self):
        grid = np.linspace(-1.0, 1.0, 201)
        grad = 0.5 * np.exp(-((grid - 0.05) / 0.03) ** 2)
        curve = step_curve(grid, [], grad=grad)
        self.assertIsNone(first_significant_peak(curve, -0.1, 0.5, 0.1, 1.0))
        self.assertEqual(locate_inflection(curve, 0.0, 0.1, 0.5, 1.0), 0.0)
        self.assertAlmostEqual(refine_energy(curve, 0.0, 0.1), 0.05)

    def test_eigenstate_curve(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        epsilon = 0.1
        delta = h.tau * epsilon
        fs = design_filter(epsilon, delta)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 0)), fs.d)
        curve = deterministic_acdf(fs, moments, make_grid(delta))
        refined = refine_energy(curve, ed.lambdas[0] + 0.5 * delta, delta)
        self.assertLessEqual(abs(refined - ed.lambdas[0]), curve.spacing)


class VarianceScanTests(SimpleTestCase):
    """First confirmed point above s sigma"""

    def test_zeros_then_ones(self):
        y = np.concatenate([np.zeros(100), np.ones(100)])
        self.assertEqual(variance_scan(y), 100)

    def test_all_zeros(self):
        self.assertIsNone(variance_scan(np.zeros(200)))

    def test_lead_too_long(self):
        with self.assertRaises(SignalTooShortError):
            variance_scan(np.zeros(30), lead=30)

    @tag('slow')
    def test_noisy_staircase_upper_bounds_first_jump(self):
        bounded = 0
        for seed in range(100):
            rng = generator(seed, 'staircase')
            y = np.repeat([0.0, 0.3, 1.0], [150, 100, 150]) + rng.normal(scale=0.02, size=400)
            index = variance_scan(y, s=3.0, window_l=40, fraction_x=0.8)
            bounded += index is not None and index >= 150
        self.assertGreaterEqual(bounded, 95)


class CertifiedSearchTests(SimpleTestCase):
    """Binary search on the eta decision"""

    def test_eigenstate_curve(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        epsilon = 0.1
        delta = h.tau * epsilon
        fs = design_filter(epsilon, delta)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 0)), fs.d)

        def evaluate(x):
            return deterministic_acdf(fs, moments, np.array([x])).g_values[0]

        decisions = []
        x = certified_search(evaluate, 1.0, epsilon, -math.pi / 2, math.pi / 2, delta, decisions)
        self.assertLessEqual(abs(x - ed.lambdas[0]), 2 * delta)
        self.assertLessEqual(len(decisions), math.ceil(math.log2(math.pi / (2 * delta))) + 1)

    def test_no_mass_converges_to_upper_end(self):
        x = certified_search(lambda x: 0.0, 0.5, 0.1, -1.0, 1.0, 0.01)
        self.assertLessEqual(1.0 - x, 0.01)

    def test_eta_floor(self):
        with self.assertRaises(ParameterError):
            certified_search(lambda x: 0.0, 0.2, 0.1, -1.0, 1.0, 0.01)


class DetectInflectionTests(SimpleTestCase):
    """Noise floor, detector and refinement on exact curves"""

    @staticmethod
    def xxz_curve(seed, epsilon=0.1):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        delta = h.tau * epsilon
        fs = design_filter(epsilon, delta)
        measure = spectral_measure(ed, random_state(4, seed=seed))
        curve = deterministic_acdf(fs, exact_moments(measure, fs.d), make_grid(delta))
        return h, measure, delta, curve

    def assert_recovers_a_level(self, seed, result, measure, delta, epsilon=0.1):
        lambdas, _ = measure.support(1e-8)
        nearest = lambdas[np.argmin(np.abs(lambdas - result.refined_energy))]
        self.assertLessEqual(abs(result.refined_energy - nearest), delta, f"seed {seed}")
        cumulative = measure.weights[measure.lambdas <= nearest + 1e-9].sum()
        # a lighter ground level is still the right answer
        self.assertTrue(cumulative >= 2 * epsilon or nearest == lambdas[0], f"seed {seed}")

    def test_rupture_recovers_an_eigenvalue(self):
        for seed in range(10):
            h, measure, delta, curve = self.xxz_curve(seed)
            result = detect_inflection(curve, delta, h.lambda_bound, method=RUPTURE)
            self.assert_recovers_a_level(seed, result, measure, delta)
            self.assertLessEqual(abs(result.refined_energy - result.inflection_x), delta)
            breakpoint_x = curve.grid[result.breakpoint_index]
            self.assertLessEqual(breakpoint_x - delta, result.inflection_x)
            self.assertLessEqual(result.inflection_x, breakpoint_x + 20 * curve.spacing)

    def test_inflection_advances_onto_the_level(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        delta = h.tau * 0.1
        fs = design_filter(0.1, delta)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 0)), fs.d)
        curve = deterministic_acdf(fs, moments, make_grid(delta))
        result = detect_inflection(curve, delta, h.lambda_bound, method=RUPTURE)
        self.assertGreater(result.gradient_floor, 0.0)
        self.assertLessEqual(curve.grid[result.breakpoint_index], result.inflection_x + delta)
        self.assertLessEqual(abs(result.inflection_x - ed.lambdas[0]), delta)
        self.assertLessEqual(abs(result.refined_energy - ed.lambdas[0]), delta)

    def test_variance_scan(self):
        for seed in range(5):
            h, measure, delta, curve = self.xxz_curve(seed)
            result = detect_inflection(curve, delta, h.lambda_bound, method=VARIANCE_SCAN)
            self.assertEqual(result.method, VARIANCE_SCAN)
            self.assert_recovers_a_level(seed, result, measure, delta)

    def test_certified_search_on_eigenstate(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        delta = h.tau * 0.1
        fs = design_filter(0.1, delta)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 0)), fs.d)
        curve = deterministic_acdf(fs, moments, make_grid(delta))
        result = detect_inflection(curve, delta, h.lambda_bound, method=CERTIFIED_SEARCH, eta=0.5, epsilon=0.1)
        self.assertEqual(result.method, CERTIFIED_SEARCH)
        self.assertTrue(result.decisions)
        self.assertLessEqual(abs(result.refined_energy - ed.lambdas[0]), delta)

    def test_flat_curve_not_detected(self):
        curve = step_curve(make_grid(0.01), [])
        with self.assertRaises(NotDetectedError):
            detect_inflection(curve, 0.01, 1.4, method=RUPTURE)
        with self.assertRaises(NotDetectedError):
            detect_inflection(curve, 0.01, 1.4, method=VARIANCE_SCAN)

    def test_result_serializer(self):
        h, _, delta, curve = self.xxz_curve(1)
        result = detect_inflection(curve, delta, h.lambda_bound)
        data = DetectionResultSerializer(result).data
        self.assertEqual(data['method'], RUPTURE)
        self.assertTrue(data['detected'])
        self.assertEqual(len(data['trace']), len(result.trace))
        self.assertGreater(data['gradient_floor'], 0.0)


class DetectionSpecSerializerTests(SimpleTestCase):
    """Detection config section"""

    def test_defaults(self):
        serializer = DetectionSpecSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        kwargs = detection_kwargs(serializer.validated_data)
        self.assertEqual(kwargs['method'], RUPTURE)
        self.assertEqual((kwargs['guard'].k, kwargs['guard'].l), (2.0, 20))
        self.assertIsNone(kwargs['half_window'])
        self.assertEqual((serializer.validated_data['aggregate'], serializer.validated_data['groups']), ('energies', 5))

    def test_invalid_aggregation(self):
        serializer = DetectionSpecSerializer(data={'aggregate': 'mean', 'groups': 0})
        self.assertFalse(serializer.is_valid())
        self.assertIn('aggregate', serializer.errors)
        self.assertIn('groups', serializer.errors)

    def test_invalid_alpha(self):
        serializer = DetectionSpecSerializer(data={'alpha': 1.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn('alpha', serializer.errors)
