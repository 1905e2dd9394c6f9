"""
Initial states: random vectors, prescribed eigen-overlaps, sparsification.

Every constructor returns a unit-norm StateVector whose largest amplitude is
real and non-negative, so two states that differ by a global phase serialize
identically.
"""
from dataclasses import dataclass
import logging
from pathlib import Path
import struct

import numpy as np

from gsee.exceptions import (
    DimensionMismatch,
    DomainError,
    InfeasibleError,
    ParameterError,
    SizeError,
)
from gsee.streams import generator

logger = logging.getLogger(__name__)

MAX_SITES = 26
NORM_TOLERANCE = 1e-12

STATE_MAGIC = b'GSEESTV1'
_HEADER = struct.Struct('<8sI')


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex amplitudes over 2^n basis states"""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        dim = amplitudes.shape[0] if amplitudes.ndim == 1 else 0
        if dim < 2 or dim & (dim - 1):
            raise SizeError(f"state length must be a power of two >= 2, got shape {amplitudes.shape}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ParameterError(f"state is not normalized: norm={norm!r}")
        amplitudes = amplitudes.copy()
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes):
        """Normalize and fix the global phase"""
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amplitudes)
        if norm == 0.0:
            raise DomainError("cannot normalize an all-zero amplitude vector")
        return cls(canonical_phase(amplitudes / norm))

    @property
    def dimension(self):
        return self.amplitudes.shape[0]

    @property
    def n_sites(self):
        return self.dimension.bit_length() - 1

    def __len__(self):
        return self.dimension


def canonical_phase(amplitudes):
    """Rotate so the largest-magnitude amplitude (lowest index on ties) is real non-negative"""
    idx = int(np.argmax(np.abs(amplitudes)))
    pivot = amplitudes[idx]
    if pivot == 0:
        return amplitudes
    rotated = amplitudes * (np.conj(pivot) / abs(pivot))
    # the product leaves rounding residue in the pivot's imaginary part
    rotated[idx] = abs(pivot)
    return rotated


def _amplitudes(psi):
    if isinstance(psi, StateVector):
        return psi.amplitudes
    return np.asarray(psi, dtype=np.complex128)


def _eigenvectors(eigenbasis):
    vectors = getattr(eigenbasis, 'vectors', eigenbasis)
    return np.asarray(vectors, dtype=np.complex128)


# ==================== CONSTRUCTORS ====================

def random_state(n, seed):
    """I.i.d. complex standard-normal amplitudes, normalized"""
    if not 1 <= n <= MAX_SITES:
        raise SizeError(f"random_state supports 1 <= n <= {MAX_SITES}, got {n}")
    rng = generator(seed, 'state')
    dim = 1 << n
    raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    logger.info(f"Drew random {n}-site state with seed={seed}")
    return StateVector.from_amplitudes(raw)


def eigenstate(eigenbasis, k):
    vectors = _eigenvectors(eigenbasis)
    if not 0 <= k < vectors.shape[1]:
        raise ParameterError(f"eigenvector index {k} outside 0..{vectors.shape[1] - 1}")
    return StateVector.from_amplitudes(vectors[:, k])


def state_with_overlaps(eigenbasis, targets, seed):
    """State with |<E_k|psi>|^2 = p_k for each (k, p_k) in targets.

    Residual weight goes to the remaining eigenvectors with complex normal
    coefficients drawn from the ('state', 'residual') stream of ``seed``.
    """
    vectors = _eigenvectors(eigenbasis)
    dim = vectors.shape[1]
    targets = [(int(k), float(p)) for k, p in targets]
    indices = [k for k, _ in targets]
    if len(set(indices)) != len(indices):
        raise ParameterError(f"duplicate eigenvector index in targets {targets}")
    for k, p in targets:
        if not 0 <= k < dim:
            raise ParameterError(f"eigenvector index {k} outside 0..{dim - 1}")
        if p < 0.0:
            raise ParameterError(f"overlap must be non-negative, got p_{k}={p}")
    total = sum(p for _, p in targets)
    if total > 1.0 + NORM_TOLERANCE:
        raise InfeasibleError(f"target overlaps sum to {total!r} > 1")

    coefficients = np.zeros(dim, dtype=np.complex128)
    for k, p in targets:
        coefficients[k] = np.sqrt(p)

    residual = max(0.0, 1.0 - total)
    others = np.setdiff1d(np.arange(dim), indices)
    if residual > NORM_TOLERANCE:
        if others.size == 0:
            raise InfeasibleError(
                f"overlaps sum to {total!r} < 1 but every eigenvector already has a target"
            )
        rng = generator(seed, 'state', 'residual')
        spread = rng.standard_normal(others.size) + 1j * rng.standard_normal(others.size)
        coefficients[others] = np.sqrt(residual) * spread / np.linalg.norm(spread)

    logger.info(f"Built state with prescribed overlaps {targets}, residual weight {residual:.6g}")
    return StateVector.from_amplitudes(vectors @ coefficients)


# ==================== SPARSIFICATION ====================

def sparsify(psi, s):
    """Keep the s largest-magnitude amplitudes, lowest index first on ties, and renormalize"""
    amplitudes = _amplitudes(psi)
    dim = amplitudes.shape[0]
    if not 1 <= s <= dim:
        raise ParameterError(f"sparsity must satisfy 1 <= s <= {dim}, got {s}")
    order = np.lexsort((np.arange(dim), -np.abs(amplitudes)))
    kept = np.zeros_like(amplitudes)
    kept[order[:s]] = amplitudes[order[:s]]
    if not np.any(kept):
        raise DomainError("every retained amplitude is zero")
    return StateVector.from_amplitudes(kept)


def state_metrics(a, b):
    """Return (|<a|b>|, ||a - b||_2)"""
    a = _amplitudes(a)
    b = _amplitudes(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"states have dimensions {a.shape[0]} and {b.shape[0]}")
    return float(abs(np.vdot(a, b))), float(np.linalg.norm(a - b))


def sparsity_profile(psi, sizes):
    """Rows (S, overlap, l2_distance) for each sparsity S"""
    rows = []
    for s in sizes:
        overlap, distance = state_metrics(psi, sparsify(psi, int(s)))
        rows.append((int(s), overlap, distance))
    return rows


# ==================== BINARY FORMAT ====================

def dumps_state(psi):
    """Magic, uint32 n_sites, then little-endian float64 pairs (re, im)"""
    amplitudes = _amplitudes(psi)
    n_sites = amplitudes.shape[0].bit_length() - 1
    return _HEADER.pack(STATE_MAGIC, n_sites) + amplitudes.astype('<c16').tobytes()


def loads_state(payload):
    if len(payload) < _HEADER.size:
        raise ParameterError("state file is shorter than its header")
    magic, n_sites = _HEADER.unpack_from(payload)
    if magic != STATE_MAGIC:
        raise ParameterError(f"not a state file: magic {magic!r}")
    if not 1 <= n_sites <= MAX_SITES:
        raise SizeError(f"state file declares {n_sites} sites")
    body = payload[_HEADER.size:]
    expected = 16 * (1 << n_sites)
    if len(body) != expected:
        raise ParameterError(f"state file body has {len(body)} bytes, expected {expected}")
    return StateVector(np.frombuffer(body, dtype='<c16').astype(np.complex128))


def write_state(path, psi):
    path = Path(path)
    path.write_bytes(dumps_state(psi))
    logger.info(f"Wrote {psi.n_sites}-site state to {path}")


def read_state(path):
    try:
        payload = Path(path).read_bytes()
    except OSError as e:
        raise ParameterError(f"cannot read state file {path}: {str(e)}")
    return loads_state(payload)


# ==================== CONFIG ====================

def build_state(spec, n_sites, eigenbasis=None):
    """Build from a validated state config section"""
    kind = spec['kind']
    if kind == 'file':
        psi = read_state(spec['path'])
        if psi.n_sites != n_sites:
            raise DimensionMismatch(f"state file has {psi.n_sites} sites, Hamiltonian has {n_sites}")
    elif kind == 'random':
        psi = random_state(n_sites, spec['seed'])
    else:
        if eigenbasis is None:
            raise ParameterError(f"state kind '{kind}' needs an eigendecomposition")
        if kind == 'eigenstate':
            psi = eigenstate(eigenbasis, spec['index'])
        else:
            psi = state_with_overlaps(eigenbasis, spec['overlaps'], spec['seed'])
    if spec.get('sparsity'):
        psi = sparsify(psi, min(spec['sparsity'], psi.dimension))
    return psi
