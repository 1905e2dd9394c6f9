import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from gsee.exceptions import DimensionMismatch, InfeasibleError, ParameterError, SizeError
from hamiltonian.operators import build_heisenberg_full

from .serializers import StateSpecSerializer
from .vectors import (
    StateVector,
    canonical_phase,
    dumps_state,
    loads_state,
    random_state,
    read_state,
    sparsify,
    sparsity_profile,
    state_metrics,
    state_with_overlaps,
    write_state,
)


def heisenberg_eigenvectors(n, seed):
    return np.linalg.eigh(build_heisenberg_full(n, seed=seed).to_dense())[1]


class RandomStateTests(SimpleTestCase):
    """Seeded random initial states"""

    def test_single_site(self):
        psi = random_state(1, seed=4)
        self.assertEqual(len(psi), 2)
        self.assertAlmostEqual(np.linalg.norm(psi.amplitudes), 1.0, places=12)

    def test_determinism(self):
        a = random_state(5, seed=123).amplitudes
        b = random_state(5, seed=123).amplitudes
        self.assertEqual(a.tobytes(), b.tobytes())
        self.assertNotEqual(a.tobytes(), random_state(5, seed=124).amplitudes.tobytes())

    def test_overlaps_sum_to_one(self):
        psi = random_state(6, seed=8)
        overlaps = np.abs(heisenberg_eigenvectors(6, seed=1).conj().T @ psi.amplitudes) ** 2
        self.assertLessEqual(abs(overlaps.sum() - 1.0), 1e-10)

    def test_canonical_phase(self):
        amplitudes = random_state(4, seed=2).amplitudes
        pivot = amplitudes[np.argmax(np.abs(amplitudes))]
        self.assertEqual(pivot.imag, 0.0)
        self.assertGreaterEqual(pivot.real, 0.0)

    def test_pivot_exactly_real_after_rotation(self):
        for seed in range(20):
            amplitudes = random_state(6, seed=seed).amplitudes
            pivot = amplitudes[np.argmax(np.abs(amplitudes))]
            self.assertEqual(pivot.imag, 0.0, f"seed {seed}")
        rotated = canonical_phase(np.array([0.1 + 0.2j, -0.3 + 0.7j, 0.05j]))
        self.assertEqual(rotated[1], complex(abs(-0.3 + 0.7j), 0.0))

    def test_size_error(self):
        with self.assertRaises(SizeError):
            random_state(0, seed=1)
        with self.assertRaises(SizeError):
            random_state(27, seed=1)

    def test_unnormalized_vector_rejected(self):
        with self.assertRaises(ParameterError):
            StateVector(np.array([1.0, 1.0]))


class StateWithOverlapsTests(SimpleTestCase):
    """Prescribed eigen-overlaps"""

    def setUp(self):
        self.vectors = heisenberg_eigenvectors(6, seed=3)

    def measured(self, psi):
        return np.abs(self.vectors.conj().T @ psi.amplitudes) ** 2

    def test_ground_state_target(self):
        psi = state_with_overlaps(self.vectors, [(0, 1.0)], seed=1)
        overlap, _ = state_metrics(psi, self.vectors[:, 0])
        self.assertAlmostEqual(overlap, 1.0, places=12)

    def test_small_overlaps_reproduced(self):
        psi = state_with_overlaps(self.vectors, [(0, 0.0014), (1, 0.015)], seed=11)
        p = self.measured(psi)
        self.assertLessEqual(abs(p[0] - 0.0014), 1e-12)
        self.assertLessEqual(abs(p[1] - 0.015), 1e-12)
        self.assertAlmostEqual(p.sum(), 1.0, places=12)

    def test_two_point_measure(self):
        psi = state_with_overlaps(self.vectors, [(0, 0.5), (1, 0.5)], seed=0)
        p = self.measured(psi)
        np.testing.assert_allclose(p[:2], [0.5, 0.5], atol=1e-12)
        self.assertLessEqual(p[2:].sum(), 1e-12)

    def test_residual_depends_on_seed_only(self):
        a = state_with_overlaps(self.vectors, [(0, 0.1)], seed=5).amplitudes
        b = state_with_overlaps(self.vectors, [(0, 0.1)], seed=5).amplitudes
        np.testing.assert_array_equal(a, b)

    def test_infeasible(self):
        with self.assertRaises(InfeasibleError):
            state_with_overlaps(self.vectors, [(0, 0.7), (1, 0.4)], seed=0)


class SparsifyTests(SimpleTestCase):
    """Truncation to the S largest amplitudes"""

    amplitudes = np.array([0.2, 0.4, 0.4, 0.8])

    def test_single_component(self):
        np.testing.assert_allclose(sparsify(self.amplitudes, 1).amplitudes, [0, 0, 0, 1], atol=1e-15)

    def test_tie_break_lowest_index(self):
        expected = np.array([0.0, 0.4, 0.0, 0.8]) / math.sqrt(0.8)
        np.testing.assert_allclose(sparsify(self.amplitudes, 2).amplitudes, expected, atol=1e-15)

    def test_full_support_is_identity(self):
        psi = random_state(3, seed=9)
        np.testing.assert_allclose(sparsify(psi, 8).amplitudes, psi.amplitudes, atol=1e-15)

    def test_idempotent(self):
        psi = random_state(6, seed=21)
        once = sparsify(psi, 10)
        np.testing.assert_allclose(sparsify(once, 10).amplitudes, once.amplitudes, atol=1e-15)

    def test_bounds(self):
        with self.assertRaises(ParameterError):
            sparsify(self.amplitudes, 0)
        with self.assertRaises(ParameterError):
            sparsify(self.amplitudes, 5)


class StateMetricsTests(SimpleTestCase):
    """Overlap and L2 distance"""

    def test_self(self):
        psi = random_state(4, seed=1)
        overlap, distance = state_metrics(psi, psi)
        self.assertAlmostEqual(overlap, 1.0, places=12)
        self.assertEqual(distance, 0.0)

    def test_orthogonal_basis_states(self):
        overlap, distance = state_metrics(np.array([1, 0]), np.array([0, 1]))
        self.assertEqual(overlap, 0.0)
        self.assertAlmostEqual(distance, math.sqrt(2.0), places=15)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            state_metrics(random_state(2, seed=1), random_state(3, seed=1))

    def test_profile_monotone_small(self):
        rows = sparsity_profile(random_state(6, seed=4), [1, 2, 4, 8, 16, 32, 64])
        overlaps = [row[1] for row in rows]
        distances = [row[2] for row in rows]
        self.assertTrue(all(b >= a - 1e-15 for a, b in zip(overlaps, overlaps[1:])))
        self.assertTrue(all(b <= a + 1e-15 for a, b in zip(distances, distances[1:])))
        self.assertAlmostEqual(overlaps[-1], 1.0, places=12)

    @tag('slow')
    def test_profile_monotone_ten_sites(self):
        psi = random_state(10, seed=2023)
        rows = sparsity_profile(psi, [2 ** k for k in range(11)])
        for (_, o1, d1), (_, o2, d2) in zip(rows, rows[1:]):
            self.assertGreaterEqual(o2, o1 - 1e-15)
            self.assertLessEqual(d2, d1 + 1e-15)


class StateFileTests(SimpleTestCase):
    """Binary state files"""

    def test_round_trip(self):
        psi = random_state(5, seed=77)
        restored = loads_state(dumps_state(psi))
        self.assertEqual(restored.amplitudes.tobytes(), psi.amplitudes.tobytes())

    def test_layout(self):
        payload = dumps_state(np.array([1.0, 0.0]))
        self.assertEqual(len(payload), 12 + 32)
        self.assertEqual(payload[:8], b'GSEESTV1')
        self.assertEqual(int.from_bytes(payload[8:12], 'little'), 1)
        self.assertEqual(np.frombuffer(payload[12:], dtype='<f8').tolist(), [1.0, 0.0, 0.0, 0.0])

    def test_write_and_read(self):
        psi = random_state(3, seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'psi.bin'
            write_state(path, psi)
            self.assertEqual(read_state(path).amplitudes.tobytes(), psi.amplitudes.tobytes())

    def test_bad_magic(self):
        with self.assertRaises(ParameterError):
            loads_state(b'NOTSTATE' + bytes(4 + 32))


class StateSpecSerializerTests(SimpleTestCase):
    """State config section"""

    def test_overlaps_text(self):
        serializer = StateSpecSerializer(data={'kind': 'overlaps', 'seed': '3', 'overlaps': '0:0.0014,1:0.015'})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['overlaps'], [(0, 0.0014), (1, 0.015)])

    def test_overlaps_sum_checked(self):
        serializer = StateSpecSerializer(data={'kind': 'overlaps', 'seed': 3, 'overlaps': [[0, 0.8], [1, 0.3]]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('overlaps', serializer.errors)

    def test_random_needs_seed(self):
        serializer = StateSpecSerializer(data={'kind': 'random'})
        self.assertFalse(serializer.is_valid())
        self.assertIn('seed', serializer.errors)
