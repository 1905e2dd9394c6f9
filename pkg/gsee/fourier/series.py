"""
Odd Fourier series of the smoothed Heaviside step,

    F(x; beta) = 1/2 + 2 sum_k |F_{2k+1}| sin((2k + 1) x),

whose untruncated limit is (1 + erf(sqrt(2 beta) sin x)) / 2.
"""
from dataclasses import dataclass
from functools import cached_property
import logging
import math

import numpy as np

from gsee.exceptions import DomainError, ParameterError
from specfun.functions import bessel_i_scaled_sequence, erf, harmonic, lambert_w0

logger = logging.getLogger(__name__)

_GRID_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Coefficient magnitudes |F_{2k+1}(beta)| for k = 0..d"""

    beta: float
    d: int
    coeff_mags: np.ndarray
    norm_F: float
    f0: float = 0.5

    @property
    def D(self):
        return 2 * self.d + 1

    @property
    def j_values(self):
        """Odd moment index j = 2k + 1 for every k"""
        return 2 * np.arange(self.d + 1) + 1

    @property
    def probabilities(self):
        return self.coeff_mags / self.norm_F

    @cached_property
    def alias_table(self):
        return AliasTable(self.probabilities)


def select_beta(delta, epsilon):
    """beta = max(1, W0(2 / (pi eps^2)) / (4 sin^2 delta))"""
    if not 0.0 < delta < math.pi / 6:
        raise DomainError(f"delta must lie in (0, pi/6), got {delta}")
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    w = lambert_w0(2.0 / (math.pi * epsilon ** 2))
    return max(1.0, w / (4.0 * math.sin(delta) ** 2))


def coefficients(beta, d):
    """Magnitudes from exponentially scaled Bessel values; the k = d term keeps only I_d"""
    if d < 0 or int(d) != d:
        raise ParameterError(f"d must be a non-negative integer, got {d}")
    d = int(d)
    scaled = bessel_i_scaled_sequence(d + 1, beta)
    prefactor = math.sqrt(beta / (2.0 * math.pi))
    odd = 2.0 * np.arange(d + 1) + 1.0
    mags = prefactor * (scaled[:d + 1] + scaled[1:d + 2]) / odd
    mags[d] = prefactor * scaled[d] / odd[d]
    norm = float(mags.sum())
    logger.info(f"Fourier series: beta={beta:.6g}, d={d}, D={2 * d + 1}, norm_F={norm:.6g}")
    return FourierSeries(beta=float(beta), d=d, coeff_mags=mags, norm_F=norm)


def evaluate_series(fs, x):
    """Truncated series F(x; beta); scalar in, scalar out"""
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    values = np.empty(xs.shape)
    j = fs.j_values
    for start in range(0, xs.size, _GRID_CHUNK):
        chunk = xs[start:start + _GRID_CHUNK]
        values[start:start + chunk.size] = fs.f0 + 2.0 * np.sin(np.outer(chunk, j)) @ fs.coeff_mags
    if np.ndim(x) == 0:
        return float(values[0])
    return values


def smoothed_step(beta, x):
    """Untruncated limit (1 + erf(sqrt(2 beta) sin x)) / 2"""
    scale = math.sqrt(2.0 * beta)
    if np.ndim(x) == 0:
        return 0.5 * (1.0 + erf(scale * math.sin(x)))
    return np.array([0.5 * (1.0 + erf(scale * math.sin(v))) for v in np.ravel(x)]).reshape(np.shape(x))


def norm_bound(D):
    """Upper bound (2.07 / 2 pi)(H_D + 2 ln 2) + 1/2 on norm_F"""
    return 2.07 / (2.0 * math.pi) * (harmonic(D) + 2.0 * math.log(2.0)) + 0.5


# ==================== SAMPLING ====================

class AliasTable:
    """Walker/Vose alias table: one uniform per draw"""

    def __init__(self, probabilities):
        probs = np.asarray(probabilities, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0 or np.any(probs < 0) or not probs.sum() > 0:
            raise ParameterError("alias table needs a non-empty, non-negative weight vector")
        n = probs.size
        scaled = probs * (n / probs.sum())
        self.size = n
        self.accept = np.ones(n)
        self.alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            self.accept[s] = scaled[s]
            self.alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        for i in small + large:
            self.accept[i] = 1.0

    def lookup(self, u):
        """Map uniforms in [0, 1) onto indices"""
        u = np.asarray(u, dtype=np.float64) * self.size
        column = np.minimum(u.astype(np.int64), self.size - 1)
        return np.where(u - column < self.accept[column], column, self.alias[column])

    def sample(self, rng, size):
        return self.lookup(rng.random(size))


def linear_scan_index(probabilities, u):
    """Inverse-CDF lookup by cumulative sums"""
    cumulative = np.cumsum(probabilities)
    cumulative /= cumulative[-1]
    return np.minimum(np.searchsorted(cumulative, u, side='right'), len(cumulative) - 1)


def sample_indices(fs, rng, size):
    """k_i ~ |F_{2k+1}| / norm_F"""
    if not fs.norm_F > 0:
        raise ParameterError("cannot sample from a series with zero norm")
    return fs.alias_table.sample(rng, size)


def sample_index(fs, rng):
    return int(sample_indices(fs, rng, 1)[0])
