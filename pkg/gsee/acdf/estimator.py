"""
Monte Carlo estimate of the approximate CDF

    G(x) = 1/2 + (2 norm_F / M) sum_i [X_i sin(j_i x) + Y_i cos(j_i x)],

with j_i = 2 k_i + 1 drawn from |F_{2k+1}| / norm_F, and its derivative.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from evolution.sampling import hadamard_shots
from fourier.series import sample_indices
from gsee.exceptions import ParameterError
from gsee.streams import generator

logger = logging.getLogger(__name__)

EXACT = 'exact'
SINGLE_SHOT = 'single-shot'
INFINITE = 'infinite'
SAMPLING_MODES = (EXACT, SINGLE_SHOT, INFINITE)

# how repetitions combine into one energy
ENERGIES = 'energies'
POINTWISE = 'pointwise'
AGGREGATE_CHOICES = [
    (ENERGIES, 'Median of the per-repetition refined energies'),
    (POINTWISE, 'Detection on the pointwise median of means of the curves'),
]

BELOW_ETA = 'below-eta'
ABOVE_ZERO = 'above-zero'

DEFAULT_GRID_CAP = 4096
_GRID_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class AcdfSampleBatch:
    """M sampled series indices with their observations"""

    k: np.ndarray
    re_obs: np.ndarray
    im_obs: np.ndarray
    mode: str
    seed: int
    repetition: int = 0

    def __len__(self):
        return self.k.size

    @property
    def j(self):
        return 2 * self.k + 1


@dataclass(frozen=True, eq=False)
class AcdfCurve:
    """G and G' sampled on a uniform grid over [-pi, pi)"""

    grid: np.ndarray
    g_values: np.ndarray
    grad_values: np.ndarray
    norm_F: float
    m_samples: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.grid.shape == self.g_values.shape == self.grad_values.shape):
            raise ParameterError("grid, g_values and grad_values must have the same length")

    @property
    def spacing(self):
        return float(self.grid[1] - self.grid[0])

    def rows(self):
        for x, g, grad in zip(self.grid.tolist(), self.g_values.tolist(), self.grad_values.tolist()):
            yield {'x': x, 'g': g, 'grad': grad}


def make_grid(delta, cap=DEFAULT_GRID_CAP):
    """Uniform grid on [-pi, pi) with spacing at most min(delta / 4, 2 pi / cap)"""
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    spacing = min(delta / 4.0, 2.0 * math.pi / cap)
    n_points = math.ceil(2.0 * math.pi / spacing * (1.0 - 1e-12))
    return -math.pi + 2.0 * math.pi * np.arange(n_points) / n_points


def _series_sum(j, w_re, w_im, grid, scale):
    """0.5 + scale * sum_j [w_re sin(jx) + w_im cos(jx)] and its derivative"""
    g_values = np.empty(grid.size)
    grad_values = np.empty(grid.size)
    for start in range(0, grid.size, _GRID_CHUNK):
        x = grid[start:start + _GRID_CHUNK]
        phase = np.outer(x, j)
        sin, cos = np.sin(phase), np.cos(phase)
        g_values[start:start + x.size] = 0.5 + scale * (sin @ w_re + cos @ w_im)
        grad_values[start:start + x.size] = scale * (cos @ (j * w_re) - sin @ (j * w_im))
    return g_values, grad_values


# ==================== SAMPLING ====================

def draw_batch(fs, moments, m, mode=SINGLE_SHOT, seed=0, repetition=0):
    """M index draws from the ('batch', repetition) stream, shots from ('shots', repetition)"""
    if m < 1:
        raise ParameterError(f"batch size must be at least 1, got {m}")
    if mode not in (EXACT, SINGLE_SHOT):
        raise ParameterError(f"batches are drawn in '{EXACT}' or '{SINGLE_SHOT}' mode, got '{mode}'")
    k = sample_indices(fs, generator(seed, 'batch', repetition), m)
    g = moments.lookup(2 * k + 1)
    if mode == EXACT:
        re_obs, im_obs = g.real.copy(), g.imag.copy()
    else:
        xs, ys = hadamard_shots(g, generator(seed, 'shots', repetition))
        re_obs, im_obs = xs.astype(np.float64), ys.astype(np.float64)
    return AcdfSampleBatch(k=k, re_obs=re_obs, im_obs=im_obs, mode=mode, seed=seed, repetition=repetition)


def evaluate_acdf(batch, fs, grid):
    """Direct sum over the batch, aggregated per distinct index"""
    m = len(batch)
    if m == 0:
        raise ParameterError("cannot evaluate an empty batch")
    w_re = np.bincount(batch.k, weights=batch.re_obs, minlength=fs.d + 1)
    w_im = np.bincount(batch.k, weights=batch.im_obs, minlength=fs.d + 1)
    used = np.flatnonzero((w_re != 0) | (w_im != 0))
    j = (2 * used + 1).astype(np.float64)
    g_values, grad_values = _series_sum(j, w_re[used], w_im[used], grid, 2.0 * fs.norm_F / m)
    return AcdfCurve(
        grid=grid, g_values=g_values, grad_values=grad_values, norm_F=fs.norm_F, m_samples=m,
        meta={'mode': batch.mode, 'seed': batch.seed, 'repetition': batch.repetition},
    )


def deterministic_acdf(fs, moments, grid):
    """Full-sum ACDF sum_k p_k F(x - lambda_k) from the moments (infinite statistics)"""
    j = fs.j_values
    g = moments.lookup(j)
    g_values, grad_values = _series_sum(
        j.astype(np.float64), fs.coeff_mags * g.real, fs.coeff_mags * g.imag, grid, 2.0,
    )
    return AcdfCurve(
        grid=grid, g_values=g_values, grad_values=grad_values, norm_F=fs.norm_F, m_samples=0,
        meta={'mode': INFINITE},
    )


# ==================== STATISTICS ====================

def estimator_stats(curves):
    """Pointwise mean and unbiased sample variance of G across independent curves"""
    if len(curves) < 2:
        raise ParameterError(f"need at least two curves, got {len(curves)}")
    values = np.vstack([c.g_values if isinstance(c, AcdfCurve) else np.asarray(c) for c in curves])
    # centered on the first curve so identical curves give exactly zero spread
    shifted = values - values[0]
    return values[0] + shifted.mean(axis=0), shifted.var(axis=0, ddof=1)


def estimator_variance(fs, moments, x, m, mode=SINGLE_SHOT):
    """Exact variance of G(x) for a batch of size m"""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    j = fs.j_values
    g = moments.lookup(j)
    pi = fs.probabilities
    phase = np.outer(x, j)
    sin, cos = np.sin(phase), np.cos(phase)
    mean = 2.0 * fs.norm_F * ((sin * g.real + cos * g.imag) @ pi)
    if mode == EXACT:
        second = 4.0 * fs.norm_F ** 2 * (((sin * g.real + cos * g.imag) ** 2) @ pi)
    elif mode == SINGLE_SHOT:
        # X and Y are independent +-1 with means Re g and Im g
        second = 4.0 * fs.norm_F ** 2 * ((1.0 + 2.0 * sin * cos * g.real * g.imag) @ pi)
    else:
        return np.zeros(x.size)
    return (second - mean ** 2) / m


def median_of_means(values):
    """Median of per-repetition estimates; lower median for even counts"""
    values = sorted(float(v) for v in values)
    if not values:
        raise ParameterError("median of an empty list")
    return values[(len(values) - 1) // 2]


def aggregate_curves(curves, groups=None):
    """Pointwise median of means of G and G' over repetition curves.

    The curves are split into ``groups`` contiguous groups (one curve each by
    default); every grid point takes the lower median of the group means.
    """
    if not curves:
        raise ParameterError("cannot aggregate an empty list of curves")
    if len(curves) == 1:
        return curves[0]
    grid = curves[0].grid
    if any(not np.array_equal(c.grid, grid) for c in curves[1:]):
        raise ParameterError("curves must share one grid to be aggregated")
    groups = len(curves) if groups is None else min(int(groups), len(curves))
    if groups < 1:
        raise ParameterError(f"need at least one group, got {groups}")
    middle = (groups - 1) // 2

    def pointwise(values):
        means = np.vstack([values[part].mean(axis=0) for part in np.array_split(np.arange(len(curves)), groups)])
        return np.sort(means, axis=0)[middle]

    return AcdfCurve(
        grid=grid,
        g_values=pointwise(np.vstack([c.g_values for c in curves])),
        grad_values=pointwise(np.vstack([c.grad_values for c in curves])),
        norm_F=curves[0].norm_F,
        m_samples=sum(c.m_samples for c in curves),
        meta={
            'mode': curves[0].meta.get('mode'),
            'seed': curves[0].meta.get('seed'),
            'aggregate': POINTWISE,
            'groups': groups,
        },
    )


def decide_jump(g_value, eta, epsilon):
    """'below-eta' when G < eta / 2, otherwise 'above-zero'"""
    if eta <= 2.0 * epsilon:
        raise ParameterError(
            f"eta={eta} must exceed 2 epsilon={2.0 * epsilon}: smaller jumps cannot be resolved"
        )
    return BELOW_ETA if g_value < 0.5 * eta else ABOVE_ZERO


# ==================== REPETITIONS ====================

def acdf_curves(fs, moments, grid, m, mode, seed, repetitions):
    """One curve per repetition; the infinite mode returns the deterministic curve once"""
    if mode == INFINITE:
        return [deterministic_acdf(fs, moments, grid)]
    curves = []
    for rep in range(repetitions):
        curves.append(evaluate_acdf(draw_batch(fs, moments, m, mode, seed, rep), fs, grid))
        logger.info(f"ACDF repetition {rep + 1}/{repetitions} done (M={m}, mode={mode})")
    return curves
