import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy import linalg

from gsee.exceptions import DimensionMismatch, DomainError, SizeError
from gsee.streams import generator
from hamiltonian.operators import Hamiltonian, PauliTerm, build_heisenberg_full, build_xxz_chain
from states.vectors import StateVector, eigenstate, random_state, state_with_overlaps

from .backends import compute_moments, resolve_backend
from .sampling import hadamard_shot, hadamard_shots
from .serializers import BackendSpecSerializer, read_moments, write_moments
from .spectrum import (
    diagonalize,
    exact_cdf,
    exact_moments,
    moment_indices,
    spectral_measure,
)
from .trotter import StepsPolicy, trotter_evolve, trotter_moments, trotter_step_2nd


def single_z():
    return Hamiltonian.from_terms(1, [PauliTerm(1.0, 'Z')])


class DiagonalizeTests(SimpleTestCase):
    """Exact eigendecomposition"""

    def test_single_site_z(self):
        h = single_z()
        ed = diagonalize(h)
        np.testing.assert_allclose(ed.lambdas, [-h.tau, h.tau], atol=1e-15)

    def test_reconstruction(self):
        h = build_heisenberg_full(3, seed=5)
        ed = diagonalize(h)
        rebuilt = ed.vectors @ np.diag(ed.lambdas) @ ed.vectors.conj().T
        self.assertLessEqual(np.max(np.abs(h.tau * h.to_dense() - rebuilt)), 1e-9 * h.norm_bound)
        np.testing.assert_allclose(ed.vectors.conj().T @ ed.vectors, np.eye(8), atol=1e-10)

    def test_scaled_spectrum_inside_half_circle(self):
        ed = diagonalize(build_xxz_chain(4, 1.0, -1.0))
        self.assertTrue(np.all(np.abs(ed.lambdas) < math.pi / 2))
        self.assertTrue(np.all(np.diff(ed.lambdas) >= 0))

    def test_size_limit(self):
        with self.assertRaises(SizeError):
            diagonalize(build_heisenberg_full(15, seed=1))


class SpectralMeasureTests(SimpleTestCase):
    """Weights of the initial state and the exact CDF"""

    def setUp(self):
        self.h = build_xxz_chain(4, 1.0, -1.0)
        self.ed = diagonalize(self.h)

    def test_eigenstate_measure(self):
        measure = spectral_measure(self.ed, eigenstate(self.ed, 0))
        self.assertAlmostEqual(measure.weights[0], 1.0, places=12)
        self.assertAlmostEqual(exact_cdf(measure, self.ed.lambdas[0] + 1e-9), 1.0, places=12)
        self.assertEqual(exact_cdf(measure, self.ed.lambdas[0] - 1e-3), 0.0)

    def test_equal_superposition(self):
        psi = state_with_overlaps(self.ed, [(0, 0.5), (5, 0.5)], seed=0)
        measure = spectral_measure(self.ed, psi)
        self.assertAlmostEqual(measure.weights[0], 0.5, places=12)
        self.assertAlmostEqual(measure.weights[5], 0.5, places=12)

    def test_cdf_matches_direct_sum(self):
        measure = spectral_measure(self.ed, random_state(4, seed=3))
        self.assertLessEqual(abs(measure.weights.sum() - 1.0), 1e-10)
        for x in np.linspace(-math.pi, math.pi, 100):
            direct = sum(p for lam, p in measure.points if lam <= x)
            self.assertAlmostEqual(exact_cdf(measure, x), direct, places=12)
        self.assertEqual(exact_cdf(measure, -math.pi), 0.0)
        self.assertAlmostEqual(exact_cdf(measure, math.pi), 1.0, places=12)

    def test_jumps_at_eigenvalues(self):
        measure = spectral_measure(self.ed, random_state(4, seed=9))
        xs = np.linspace(-math.pi, math.pi, 20_001)
        jumps = np.diff(exact_cdf(measure, xs))
        self.assertAlmostEqual(jumps.sum(), 1.0, places=10)

    def test_support_of_eigenstate_pair(self):
        psi = state_with_overlaps(self.ed, [(0, 0.5), (5, 0.5)], seed=0)
        measure = spectral_measure(self.ed, psi)
        lambdas, weights = measure.support(1e-9)
        np.testing.assert_array_equal(lambdas, self.ed.lambdas[[0, 5]])
        self.assertAlmostEqual(weights.sum(), 1.0, places=9)
        self.assertEqual(measure.support()[0].size, np.count_nonzero(measure.weights))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            spectral_measure(self.ed, random_state(3, seed=1))


class ExactMomentTests(SimpleTestCase):
    """g_j from the spectral measure"""

    def test_indices(self):
        self.assertEqual(moment_indices(3).tolist(), [0, 1, 3, 5, 7])

    def test_eigenstate_moments(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        ed = diagonalize(h)
        moments = exact_moments(spectral_measure(ed, eigenstate(ed, 2)), 10)
        self.assertEqual(moments[0], 1.0)
        for j in (1, 7, 21):
            self.assertAlmostEqual(abs(moments[j]), 1.0, places=12)
            self.assertAlmostEqual(moments[j], np.exp(-1j * ed.lambdas[2] * j), places=12)
        self.assertEqual(moments[-7], np.conj(moments[7]))

    def test_matches_matrix_exponential(self):
        h = build_heisenberg_full(4, seed=12)
        psi = random_state(4, seed=13)
        moments = exact_moments(spectral_measure(diagonalize(h), psi), 6)
        dense = h.to_dense()
        for j in (1, 5, 13):
            expected = np.vdot(psi.amplitudes, linalg.expm(-1j * h.tau * j * dense) @ psi.amplitudes)
            self.assertAlmostEqual(moments[j], expected, places=10)


class TrotterTests(SimpleTestCase):
    """Second-order product formula"""

    def exact_evolution(self, h, psi, time):
        return linalg.expm(-1j * time * h.to_dense()) @ psi.amplitudes

    def test_single_term_is_exact(self):
        h = Hamiltonian.from_terms(3, [PauliTerm(0.7, 'XYZ')])
        psi = random_state(3, seed=1)
        stepped = trotter_step_2nd(h, 0.9, psi)
        np.testing.assert_allclose(stepped.amplitudes, self.exact_evolution(h, psi, 0.9), atol=1e-12)

    def test_commuting_terms_are_exact(self):
        h = Hamiltonian.from_terms(3, [PauliTerm(0.3, 'ZZI'), PauliTerm(-0.8, 'IZZ'), PauliTerm(0.5, 'ZIZ')])
        psi = random_state(3, seed=2)
        evolved = trotter_evolve(h, psi, 2.5, 3)
        np.testing.assert_allclose(evolved.amplitudes, self.exact_evolution(h, psi, 2.5), atol=1e-12)

    def test_identity_offset_is_global_phase(self):
        h = Hamiltonian.from_terms(2, [PauliTerm(0.4, 'II'), PauliTerm(1.0, 'XX')])
        psi = random_state(2, seed=6)
        evolved = trotter_step_2nd(h, 0.3, psi)
        np.testing.assert_allclose(evolved.amplitudes, self.exact_evolution(h, psi, 0.3), atol=1e-12)

    def test_norm_preserved(self):
        h = build_heisenberg_full(5, seed=4)
        evolved = trotter_evolve(h, random_state(5, seed=4), 3.0, 40)
        self.assertAlmostEqual(np.linalg.norm(evolved.amplitudes), 1.0, places=12)

    def test_local_error_is_third_order(self):
        h = build_heisenberg_full(4, seed=8)
        psi = random_state(4, seed=8)
        dts = np.array([0.2, 0.1, 0.05, 0.025])
        errors = [
            np.linalg.norm(trotter_step_2nd(h, dt, psi).amplitudes - self.exact_evolution(h, psi, dt))
            for dt in dts
        ]
        slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
        self.assertAlmostEqual(slope, 3.0, delta=0.3)

    def test_global_error_is_second_order(self):
        h = build_heisenberg_full(4, seed=21)
        psi = random_state(4, seed=22)
        exact = exact_moments(spectral_measure(diagonalize(h), psi), 10)[21]
        steps = np.array([4, 8, 16, 32, 64])
        errors = []
        for r in steps:
            moments = trotter_moments(h, psi, [21], StepsPolicy(kind='fixed', steps_per_unit=int(r)))
            errors.append(abs(moments[21] - exact))
        slope = np.polyfit(np.log(1.0 / steps), np.log(errors), 1)[0]
        self.assertAlmostEqual(slope, 2.0, delta=0.2)

    def test_converges_to_exact_moments(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        psi = random_state(4, seed=31)
        exact = exact_moments(spectral_measure(diagonalize(h), psi), 2)
        trotter = trotter_moments(h, psi, [1, 3, 5], StepsPolicy(kind='fixed', steps_per_unit=2000))
        for j in (1, 3, 5):
            self.assertLessEqual(abs(trotter[j] - exact[j]), 1e-6)
        self.assertEqual(trotter.steps.tolist(), [0, 2000, 6000, 10000])

    def test_eigenstate_of_single_term(self):
        h = Hamiltonian.from_terms(2, [PauliTerm(1.3, 'ZZ')])
        psi = StateVector(np.array([0, 1, 0, 0], dtype=complex))
        for r in (1, 2, 5):
            moments = trotter_moments(h, psi, [1, 3], StepsPolicy(steps_per_unit=r))
            self.assertAlmostEqual(abs(moments[3]), 1.0, places=12)

    def test_formula_policy(self):
        h = build_xxz_chain(3, 1.0, -1.0, periodic=False)
        psi = random_state(3, seed=5)
        policy = StepsPolicy(kind='formula', prefactor=1.0, order=2, epsilon=0.01)
        moments = trotter_moments(h, psi, [1, 3], policy)
        self.assertEqual(moments.steps.tolist(), [0, policy.steps_for(1, h.tau), policy.steps_for(3, h.tau)])
        self.assertEqual(moments.backend, 'trotter')


class HadamardShotTests(SimpleTestCase):
    """+-1 outcomes with means Re g and Im g"""

    def test_certain_outcome(self):
        rng = generator(1, 'shots', 0)
        self.assertTrue(all(hadamard_shot(1.0, rng).x_outcome == 1 for _ in range(50)))

    def test_empirical_means(self):
        n = 100_000
        xs, ys = hadamard_shots(np.full(n, 0.6 + 0.2j), generator(2, 'shots', 0))
        for outcomes, mean in ((xs, 0.6), (ys, 0.2)):
            sigma = math.sqrt((1 - mean ** 2) / n)
            self.assertLessEqual(abs(outcomes.mean() - mean), 4 * sigma)

    def test_fair_coin(self):
        xs, _ = hadamard_shots(np.zeros(40_000), generator(3, 'shots', 0))
        self.assertLessEqual(abs((xs == 1).mean() - 0.5), 4 * 0.5 / math.sqrt(40_000))

    def test_single_and_vectorized_agree(self):
        g = np.array([0.3 - 0.1j, -0.7 + 0.5j, 0.0 + 0.9j])
        xs, ys = hadamard_shots(g, generator(4, 'shots', 1))
        rng = generator(4, 'shots', 1)
        for i, value in enumerate(g):
            shot = hadamard_shot(value, rng, j=2 * i + 1)
            self.assertEqual((shot.x_outcome, shot.y_outcome), (xs[i], ys[i]))

    def test_domain(self):
        with self.assertRaises(DomainError):
            hadamard_shot(1.5 + 0j, generator(0, 'shots', 0))


class BackendTests(SimpleTestCase):
    """Backend selection and moment export"""

    def test_resolve(self):
        self.assertEqual(resolve_backend('auto', 6), 'exact')
        self.assertEqual(resolve_backend('auto', 20), 'trotter')
        with self.assertRaises(SizeError):
            resolve_backend('exact', 20)

    def test_moments_csv_round_trip(self):
        h = build_xxz_chain(3, 1.0, -1.0)
        psi = random_state(3, seed=1)
        moments = compute_moments(h, psi, 3, 'trotter', StepsPolicy(steps_per_unit=4))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'moments.csv'
            write_moments(path, moments, {'config_hash': 'abc', 'root_seed': 1})
            meta, restored = read_moments(path)
        self.assertEqual(meta['config_hash'], 'abc')
        np.testing.assert_array_equal(restored.values, moments.values)
        np.testing.assert_array_equal(restored.steps, moments.steps)

    def test_backend_serializer_defaults(self):
        serializer = BackendSpecSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['steps_per_unit'], 8)
        self.assertEqual(serializer.validated_data['kind'], 'auto')
