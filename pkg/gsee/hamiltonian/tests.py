from functools import reduce
import math

import numpy as np
from django.test import SimpleTestCase

from gsee.exceptions import ParameterError, SizeError

from .operators import (
    Hamiltonian,
    PauliTerm,
    build_heisenberg_full,
    build_xxz_chain,
    normalize,
)
from .serializers import HamiltonianSpecSerializer, dumps_hamiltonian, loads_hamiltonian

PAULI = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_dense(h):
    """Brute-force Kronecker construction"""
    dim = 2 ** h.n_sites
    matrix = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        matrix += term.coefficient * reduce(np.kron, [PAULI[a] for a in term.axes])
    return matrix


class PauliTermTests(SimpleTestCase):
    """Pauli strings and their bit-mask action"""

    def test_apply_matches_kronecker(self):
        rng = np.random.default_rng(3)
        psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        for axes in ['XYZ', 'YIY', 'ZZI', 'IXI', 'YYY']:
            term = PauliTerm(1.0, axes)
            expected = reduce(np.kron, [PAULI[a] for a in axes]) @ psi
            np.testing.assert_allclose(term.apply(psi), expected, atol=1e-14)

    def test_validation(self):
        with self.assertRaises(ParameterError):
            PauliTerm(1.0, 'XQ')
        with self.assertRaises(ParameterError):
            PauliTerm(math.nan, 'XX')
        self.assertTrue(PauliTerm(0.5, 'II').is_identity)

    def test_identity_offset_must_lead(self):
        with self.assertRaises(ParameterError):
            Hamiltonian(2, (PauliTerm(1.0, 'ZZ'), PauliTerm(0.5, 'II')), 1.0, 1.0)
        Hamiltonian(2, (PauliTerm(0.5, 'II'), PauliTerm(1.0, 'ZZ')), 1.0, 1.0)


class HeisenbergModelTests(SimpleTestCase):
    """Fully connected random Heisenberg model"""

    def test_two_sites(self):
        h = build_heisenberg_full(2, seed=11)
        self.assertEqual(len(h.terms), 3)
        self.assertEqual([t.axes for t in h.terms], ['XX', 'YY', 'ZZ'])
        h_again = build_heisenberg_full(2, seed=11)
        self.assertEqual(h.coefficients().tolist(), h_again.coefficients().tolist())

    def test_term_count_and_order(self):
        h = build_heisenberg_full(4, seed=5)
        self.assertEqual(len(h.terms), 18)
        self.assertEqual(h.terms[0].axes, 'XXII')
        self.assertEqual(h.terms[2].axes, 'ZZII')
        self.assertEqual(h.terms[-1].axes, 'IIZZ')

    def test_dense_matches_kronecker(self):
        h = build_heisenberg_full(6, seed=2024)
        np.testing.assert_allclose(h.to_dense(), kron_dense(h), atol=1e-13)

    def test_hermitian_and_norm_bound(self):
        for n in (3, 5, 8):
            h = build_heisenberg_full(n, seed=n)
            dense = h.to_dense()
            np.testing.assert_allclose(dense, dense.conj().T, atol=1e-13)
            self.assertGreaterEqual(h.one_norm(), np.max(np.abs(np.linalg.eigvalsh(dense))) - 1e-12)
            self.assertLess(h.tau * h.norm_bound, math.pi / 2)

    def test_seed_determinism(self):
        a = build_heisenberg_full(7, seed=99).coefficients()
        b = build_heisenberg_full(7, seed=99).coefficients()
        c = build_heisenberg_full(7, seed=100).coefficients()
        self.assertEqual(a.tobytes(), b.tobytes())
        self.assertNotEqual(a.tobytes(), c.tobytes())

    def test_size_limits(self):
        with self.assertRaises(SizeError):
            build_heisenberg_full(1, seed=0)
        with self.assertRaises(SizeError):
            build_heisenberg_full(27, seed=0)

    def test_large_model_builds_without_dense_matrix(self):
        h = build_heisenberg_full(26, seed=1)
        self.assertEqual(len(h.terms), 3 * 325)
        self.assertLess(h.lambda_bound, math.pi / 2)


class XXZChainTests(SimpleTestCase):
    """Nearest-neighbour XXZ chain"""

    def test_term_counts(self):
        self.assertEqual(len(build_xxz_chain(4, 1.0, -1.0, periodic=True).terms), 12)
        self.assertEqual(len(build_xxz_chain(2, 1.0, -1.0, periodic=False).terms), 3)
        self.assertEqual(len(build_xxz_chain(4, 1.0, -1.0, periodic=False).terms), 9)

    def test_spectrum_matches_kronecker_oracle(self):
        h = build_xxz_chain(4, 1.0, -1.0, periodic=True)
        ours = np.linalg.eigvalsh(h.to_dense())
        oracle = np.linalg.eigvalsh(kron_dense(h))
        np.testing.assert_allclose(ours, oracle, atol=1e-12)

    def test_ring_wraps_last_bond(self):
        axes = [t.axes for t in build_xxz_chain(4, 1.0, 1.0, periodic=True).terms]
        self.assertIn('XIIX', axes)


class NormalizeTests(SimpleTestCase):
    """Choice of tau"""

    def test_single_term_zero_margin(self):
        h = Hamiltonian(1, (PauliTerm(1.0, 'Z'),), tau=1.0, norm_bound=1.0)
        self.assertAlmostEqual(normalize(h, margin=0.0).tau, math.pi / 2, places=15)

    def test_default_margin(self):
        h = build_xxz_chain(4, 1.0, -1.0)
        self.assertAlmostEqual(h.norm_bound, 12.0)
        self.assertAlmostEqual(h.tau, math.pi / (2 * 12.0 * 1.1), places=14)
        self.assertLess(h.tau * h.norm_bound, math.pi / 2)

    def test_exact_norm_mode(self):
        h = build_xxz_chain(4, 1.0, -1.0, exact_norm=True)
        eigenvalues = np.linalg.eigvalsh(kron_dense(h))
        self.assertAlmostEqual(h.norm_bound, np.max(np.abs(eigenvalues)), places=10)
        self.assertLess(h.tau * np.max(np.abs(eigenvalues)), math.pi / 2)

    def test_negative_margin_rejected(self):
        with self.assertRaises(ParameterError):
            normalize(build_xxz_chain(2, 1.0, 1.0), margin=-0.1)


class HamiltonianTextFormatTests(SimpleTestCase):
    """Line-oriented text serialization"""

    def test_round_trip_is_bit_exact(self):
        h = build_heisenberg_full(5, seed=17)
        restored = loads_hamiltonian(dumps_hamiltonian(h))
        self.assertEqual(restored.n_sites, h.n_sites)
        self.assertEqual(restored.tau, h.tau)
        self.assertEqual(restored.norm_bound, h.norm_bound)
        self.assertEqual(restored.terms, h.terms)

    def test_header_layout(self):
        text = dumps_hamiltonian(build_xxz_chain(2, 1.0, -1.0, periodic=False))
        lines = text.splitlines()
        self.assertEqual(len(lines), 4)
        self.assertEqual(lines[0].split()[0], '2')
        self.assertEqual(lines[1], '1.0 XX')
        self.assertEqual(lines[3], '-1.0 ZZ')

    def test_malformed(self):
        with self.assertRaises(ParameterError):
            loads_hamiltonian('2 0.5\n1.0 XX\n')
        with self.assertRaises(ParameterError):
            loads_hamiltonian('2 0.5 3.0\n1.0 XQ\n')


class HamiltonianSpecSerializerTests(SimpleTestCase):
    """Config section validation"""

    def test_heisenberg_requires_seed(self):
        serializer = HamiltonianSpecSerializer(data={'model': 'heisenberg', 'n': '6'})
        self.assertFalse(serializer.is_valid())
        self.assertIn('seed', serializer.errors)

    def test_string_values_are_coerced(self):
        serializer = HamiltonianSpecSerializer(data={'model': 'xxz', 'n': '4', 'periodic': 'false'})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['n'], 4)
        self.assertFalse(serializer.validated_data['periodic'])
        self.assertAlmostEqual(serializer.validated_data['margin'], 0.1)
