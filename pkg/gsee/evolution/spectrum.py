"""
Exact backend: dense eigendecomposition, spectral measure, exact CDF and
Fourier moments g_j = sum_k p_k exp(-i lambda_k j).
"""
from dataclasses import dataclass
import logging
import math

import numpy as np

from gsee.exceptions import DimensionMismatch, ParameterError, SizeError
from states.vectors import StateVector

logger = logging.getLogger(__name__)

MAX_EXACT_SITES = 14
MEASURE_TOLERANCE = 1e-10
_MOMENT_CHUNK = 256


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Scaled eigenvalues lambda_k = tau E_k in ascending order with eigenvector columns"""

    lambdas: np.ndarray
    vectors: np.ndarray
    tau: float

    def __post_init__(self):
        if np.any(np.diff(self.lambdas) < 0):
            raise ParameterError("eigenvalues must be ascending")
        if np.any(np.abs(self.lambdas) >= math.pi / 2):
            raise ParameterError(
                f"scaled spectrum leaves (-pi/2, pi/2): [{self.lambdas[0]}, {self.lambdas[-1]}]"
            )

    @property
    def energies(self):
        return self.lambdas / self.tau

    @property
    def dimension(self):
        return self.vectors.shape[0]


def diagonalize(h):
    """Full scaled spectrum of a Hamiltonian of at most 14 sites"""
    if h.n_sites > MAX_EXACT_SITES:
        raise SizeError(f"exact backend is limited to {MAX_EXACT_SITES} sites, got {h.n_sites}")
    energies, vectors = np.linalg.eigh(h.to_dense())
    logger.info(
        f"Diagonalized {h.n_sites}-site Hamiltonian: E0={energies[0]:.8g}, E_max={energies[-1]:.8g}"
    )
    return EigenDecomposition(lambdas=h.tau * energies, vectors=vectors, tau=h.tau)


# ==================== SPECTRAL MEASURE ====================

@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Weights p_k of the initial state at the scaled eigenvalues lambda_k"""

    lambdas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.lambdas.shape != self.weights.shape:
            raise DimensionMismatch("lambdas and weights differ in length")
        if abs(float(self.weights.sum()) - 1.0) > MEASURE_TOLERANCE:
            raise ParameterError(f"spectral weights sum to {self.weights.sum()!r}")
        if np.any(np.diff(self.lambdas) < 0):
            raise ParameterError("lambdas must be ascending")

    @property
    def points(self):
        return list(zip(self.lambdas.tolist(), self.weights.tolist()))

    def cumulative(self):
        return np.cumsum(self.weights)

    def support(self, threshold=0.0):
        """(lambdas, weights) of the points whose weight exceeds ``threshold``"""
        keep = self.weights > threshold
        return self.lambdas[keep], self.weights[keep]


def spectral_measure(ed, psi):
    amplitudes = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    if amplitudes.shape[0] != ed.dimension:
        raise DimensionMismatch(
            f"state has dimension {amplitudes.shape[0]}, eigenbasis has {ed.dimension}"
        )
    weights = np.abs(ed.vectors.conj().T @ amplitudes) ** 2
    return SpectralMeasure(lambdas=ed.lambdas, weights=weights)


def exact_cdf(measure, x):
    """C(x) = sum of p_k over lambda_k <= x; accepts scalars or arrays"""
    cumulative = np.concatenate([[0.0], measure.cumulative()])
    idx = np.searchsorted(measure.lambdas, x, side='right')
    values = np.minimum(cumulative[idx], 1.0)
    if np.ndim(values) == 0:
        return float(values)
    return values


# ==================== MOMENTS ====================

def moment_indices(d):
    """0 followed by the odd indices 1, 3, ..., 2d + 1"""
    if d < 0:
        raise ParameterError(f"d must be non-negative, got {d}")
    return np.concatenate([[0], 2 * np.arange(d + 1) + 1]).astype(np.int64)


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Fourier moments g_j at non-negative j; negative j follow from conjugation"""

    j_values: np.ndarray
    values: np.ndarray
    backend: str = 'exact'
    steps: np.ndarray = None

    def __post_init__(self):
        j_values = np.asarray(self.j_values, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.complex128)
        if j_values.shape != values.shape:
            raise DimensionMismatch("j_values and values differ in length")
        if np.any(j_values < 0) or np.any(np.diff(j_values) <= 0):
            raise ParameterError("j_values must be non-negative and strictly ascending")
        if j_values.size and j_values[0] == 0 and abs(values[0] - 1.0) > 1e-12:
            raise ParameterError(f"g_0 must equal 1, got {values[0]}")
        if np.any(np.abs(values) > 1.0 + 1e-9):
            raise ParameterError("moments must satisfy |g_j| <= 1")
        object.__setattr__(self, 'j_values', j_values)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return self.j_values.size

    def __getitem__(self, j):
        value = self.lookup(np.array([abs(int(j))]))[0]
        return np.conj(value) if j < 0 else value

    @property
    def d(self):
        return int((self.j_values[-1] - 1) // 2)

    def lookup(self, j):
        """Moments for an array of non-negative j"""
        j = np.asarray(j, dtype=np.int64)
        idx = np.searchsorted(self.j_values, j)
        idx = np.clip(idx, 0, self.j_values.size - 1)
        if not np.array_equal(self.j_values[idx], j):
            missing = np.setdiff1d(j, self.j_values)
            raise ParameterError(f"moments not available for j={missing[:5].tolist()}")
        return self.values[idx]

    def rows(self):
        steps = self.steps.tolist() if self.steps is not None else [''] * len(self)
        for j, g, r in zip(self.j_values.tolist(), self.values.tolist(), steps):
            yield {'j': j, 're_g': g.real, 'im_g': g.imag, 'backend': self.backend, 'r': r}


def exact_moments(measure, d):
    """g_j for j = 0 and odd j up to 2d + 1"""
    j_values = moment_indices(d)
    lambdas, weights = measure.support()
    values = np.empty(j_values.size, dtype=np.complex128)
    for start in range(0, j_values.size, _MOMENT_CHUNK):
        chunk = j_values[start:start + _MOMENT_CHUNK]
        values[start:start + chunk.size] = np.exp(-1j * np.outer(chunk, lambdas)) @ weights
    values[0] = 1.0
    logger.info(f"Computed {j_values.size} exact moments up to j={j_values[-1]}")
    return MomentSet(j_values=j_values, values=values, backend='exact')
