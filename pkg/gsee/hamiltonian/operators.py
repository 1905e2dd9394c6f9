"""
Spin Hamiltonians as weighted Pauli strings.

Site 0 is the leftmost character of an axes string and the most significant
bit of a basis index, so dense matrices follow Kronecker order s0 (x) s1 (x) ...
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations
import logging
import math

import numpy as np

from gsee.exceptions import ParameterError, SizeError
from gsee.streams import generator

logger = logging.getLogger(__name__)

PAULI_AXES = 'IXYZ'
COUPLING_AXES = 'XYZ'
MAX_SITES = 26
MAX_EXACT_NORM_SITES = 12
DEFAULT_MARGIN = 0.1


@lru_cache(maxsize=4)
def basis_indices(n_sites):
    """Read-only array 0..2^n - 1, shared by every kernel of that size"""
    indices = np.arange(1 << n_sites, dtype=np.int64)
    indices.setflags(write=False)
    return indices


def parity(values, mask):
    """Parity of popcount(values & mask), elementwise"""
    acc = np.zeros(values.shape, dtype=np.int64)
    bit = 0
    while mask >> bit:
        if (mask >> bit) & 1:
            acc ^= (values >> bit) & 1
        bit += 1
    return acc


# ==================== PAULI TERMS ====================

@dataclass(frozen=True)
class PauliTerm:
    """Real coefficient times a tensor product of single-site Pauli operators"""

    coefficient: float
    axes: str
    flip_mask: int = field(init=False, repr=False, compare=False)
    phase_mask: int = field(init=False, repr=False, compare=False)
    y_count: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coefficient = float(self.coefficient)
        if not math.isfinite(coefficient):
            raise ParameterError(f"Pauli coefficient must be finite, got {self.coefficient}")
        axes = str(self.axes).upper()
        if not axes or any(a not in PAULI_AXES for a in axes):
            raise ParameterError(f"axes must be a non-empty string over {PAULI_AXES}, got '{self.axes}'")
        n = len(axes)
        flip = phase = 0
        for site, axis in enumerate(axes):
            bit = 1 << (n - 1 - site)
            if axis in 'XY':
                flip |= bit
            if axis in 'ZY':
                phase |= bit
        object.__setattr__(self, 'coefficient', coefficient)
        object.__setattr__(self, 'axes', axes)
        object.__setattr__(self, 'flip_mask', flip)
        object.__setattr__(self, 'phase_mask', phase)
        object.__setattr__(self, 'y_count', axes.count('Y'))

    @property
    def n_sites(self):
        return len(self.axes)

    @property
    def is_identity(self):
        return self.flip_mask == 0 and self.phase_mask == 0

    def action(self):
        """Return (source indices, phases) with (P psi)[c] = phases[c] * psi[source[c]]"""
        indices = basis_indices(self.n_sites)
        source = indices ^ self.flip_mask
        signs = 1 - 2 * parity(source, self.phase_mask)
        phases = (1j ** self.y_count) * signs
        return source, phases

    def apply(self, amplitudes):
        """Pauli string (without coefficient) applied to a state vector"""
        source, phases = self.action()
        return phases * amplitudes[source]


def two_site_axes(n_sites, i, j, axis):
    axes = ['I'] * n_sites
    axes[i] = axis
    axes[j] = axis
    return ''.join(axes)


# ==================== HAMILTONIAN ====================

@dataclass(frozen=True)
class Hamiltonian:
    """Sum of Pauli terms with its scale factor tau and norm bound"""

    n_sites: int
    terms: tuple
    tau: float
    norm_bound: float

    def __post_init__(self):
        if self.n_sites < 1:
            raise SizeError(f"n_sites must be at least 1, got {self.n_sites}")
        terms = tuple(self.terms)
        for term in terms:
            if term.n_sites != self.n_sites:
                raise ParameterError(f"term {term.axes} does not act on {self.n_sites} sites")
        if any(term.is_identity for term in terms[1:]):
            raise ParameterError("an identity offset must be the first term")
        if not (self.tau > 0 and self.norm_bound > 0):
            raise ParameterError(f"tau and norm_bound must be positive, got {self.tau}, {self.norm_bound}")
        object.__setattr__(self, 'terms', terms)
        object.__setattr__(self, 'tau', float(self.tau))
        object.__setattr__(self, 'norm_bound', float(self.norm_bound))

    @classmethod
    def from_terms(cls, n_sites, terms, margin=DEFAULT_MARGIN, exact_norm=False):
        """Assemble and normalize in one step"""
        terms = tuple(terms)
        bound = sum(abs(t.coefficient) for t in terms)
        if bound == 0.0:
            raise ParameterError("Hamiltonian has no non-zero coefficient")
        draft = cls(n_sites=n_sites, terms=terms, tau=1.0, norm_bound=bound)
        return normalize(draft, margin=margin, exact_norm=exact_norm)

    @property
    def dimension(self):
        return 1 << self.n_sites

    @property
    def lambda_bound(self):
        """Bound on |tau * E| over the spectrum"""
        return self.tau * self.norm_bound

    def one_norm(self):
        return sum(abs(t.coefficient) for t in self.terms)

    def coefficients(self):
        return np.array([t.coefficient for t in self.terms])

    def to_dense(self):
        """Dense complex matrix of the unscaled operator"""
        if self.n_sites > 14:
            raise SizeError(f"dense matrices are limited to 14 sites, got {self.n_sites}")
        dim = self.dimension
        matrix = np.zeros((dim, dim), dtype=np.complex128)
        rows = basis_indices(self.n_sites)
        for term in self.terms:
            source, phases = term.action()
            matrix[rows, source] += term.coefficient * phases
        return matrix

    def apply(self, amplitudes):
        """H psi without forming the matrix"""
        out = np.zeros_like(amplitudes, dtype=np.complex128)
        for term in self.terms:
            out += term.coefficient * term.apply(amplitudes)
        return out

    def spectral_norm(self):
        if self.n_sites > MAX_EXACT_NORM_SITES:
            raise SizeError(
                f"exact spectral norm is limited to {MAX_EXACT_NORM_SITES} sites, got {self.n_sites}"
            )
        eigenvalues = np.linalg.eigvalsh(self.to_dense())
        return float(np.max(np.abs(eigenvalues)))


def normalize(h, margin=DEFAULT_MARGIN, exact_norm=False):
    """Choose tau so that tau * ||H|| stays below pi/2 with the given margin"""
    if margin < 0:
        raise ParameterError(f"margin must be non-negative, got {margin}")
    bound = h.spectral_norm() if exact_norm else h.one_norm()
    if bound <= 0.0:
        raise ParameterError("cannot normalize the zero operator")
    tau = math.pi / (2.0 * bound * (1.0 + margin))
    logger.info(
        f"Normalized {h.n_sites}-site Hamiltonian: norm_bound={bound:.6g} "
        f"({'spectral' if exact_norm else 'one-norm'}), tau={tau:.6g}"
    )
    return replace(h, tau=tau, norm_bound=bound)


# ==================== MODELS ====================

def build_heisenberg_full(n, seed, margin=DEFAULT_MARGIN, exact_norm=False):
    """Fully connected Heisenberg model with standard-normal couplings J_a^ij / n"""
    if not 2 <= n <= MAX_SITES:
        raise SizeError(f"Heisenberg model supports 2 <= n <= {MAX_SITES}, got {n}")
    pairs = list(combinations(range(n), 2))
    couplings = generator(seed, 'couplings').standard_normal(len(COUPLING_AXES) * len(pairs))
    terms = []
    for index, (i, j) in enumerate(pairs):
        for offset, axis in enumerate(COUPLING_AXES):
            coupling = couplings[len(COUPLING_AXES) * index + offset]
            terms.append(PauliTerm(coupling / n, two_site_axes(n, i, j, axis)))
    logger.info(f"Built fully connected Heisenberg model: n={n}, seed={seed}, terms={len(terms)}")
    return Hamiltonian.from_terms(n, terms, margin=margin, exact_norm=exact_norm)


def chain_bonds(n, periodic):
    bonds = {(i, i + 1) for i in range(n - 1)}
    if periodic:
        bonds.add((0, n - 1))
    return sorted(bonds)


def build_xxz_chain(n, jx, jz, periodic=True, margin=DEFAULT_MARGIN, exact_norm=False):
    """Nearest-neighbour jx (XX + YY) + jz ZZ on a ring or open chain"""
    if not 2 <= n <= MAX_SITES:
        raise SizeError(f"XXZ chain supports 2 <= n <= {MAX_SITES}, got {n}")
    terms = []
    for i, j in chain_bonds(n, periodic):
        terms.append(PauliTerm(jx, two_site_axes(n, i, j, 'X')))
        terms.append(PauliTerm(jx, two_site_axes(n, i, j, 'Y')))
        terms.append(PauliTerm(jz, two_site_axes(n, i, j, 'Z')))
    logger.info(f"Built XXZ chain: n={n}, jx={jx}, jz={jz}, periodic={periodic}, terms={len(terms)}")
    return Hamiltonian.from_terms(n, terms, margin=margin, exact_norm=exact_norm)


def build_hamiltonian(spec):
    """Build from a validated hamiltonian config section"""
    if spec['model'] == 'heisenberg':
        return build_heisenberg_full(
            spec['n'], spec['seed'], margin=spec['margin'], exact_norm=spec['exact_norm'],
        )
    return build_xxz_chain(
        spec['n'], spec['jx'], spec['jz'], periodic=spec['periodic'],
        margin=spec['margin'], exact_norm=spec['exact_norm'],
    )
