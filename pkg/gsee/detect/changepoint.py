"""
Single change point of a sampled ACDF.

A Gaussian-kernel two-segment cost picks the candidate split and a one-way
ANOVA with a monotone-increase condition decides whether it is a real jump.
"""
from dataclasses import dataclass
import logging
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist

from gsee.exceptions import DegenerateSignalError, DimensionMismatch, ParameterError, SignalTooShortError
from specfun.functions import f_distribution_cdf

logger = logging.getLogger(__name__)

STANDARD = 'standard'
AS_PRINTED = 'as-printed'
ORIENTATION_CHOICES = [
    (STANDARD, 'Standard one-way ANOVA: (n-2)(SS_w - SS_b) / SS_b'),
    (AS_PRINTED, 'Literal ratio (n-2) SS_b / SS_w'),
]

MIN_SEGMENT = 2
BANDWIDTH_FLOOR = 1e-12
# relative slack under which two split costs count as tied
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Signal:
    """ACDF samples y on ascending abscissas x"""

    y: np.ndarray
    x: np.ndarray = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        x = np.arange(y.size, dtype=np.float64) if self.x is None else np.asarray(self.x, dtype=np.float64)
        if y.ndim != 1 or x.shape != y.shape:
            raise DimensionMismatch(f"y and x must be 1-d of equal length, got {y.shape} and {x.shape}")
        if y.size > 1 and not np.all(np.diff(x) > 0):
            raise ParameterError("signal abscissas must be strictly ascending")
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'x', x)

    def __len__(self):
        return self.y.size

    def prefix(self, b):
        return Signal(self.y[:b], self.x[:b])


def _values(y):
    return y.y if isinstance(y, Signal) else np.asarray(y, dtype=np.float64)


def median_bandwidth(y):
    """Median pairwise |y_s - y_t|, floored"""
    if y.size < 2:
        return 1.0
    return max(float(np.median(pdist(y[:, None], 'cityblock'))), BANDWIDTH_FLOOR)


def first_minimum(costs):
    """Index of the smallest cost; near-equal costs resolve to the lowest index"""
    best = costs.min()
    return int(np.flatnonzero(costs <= best + TIE_TOLERANCE * max(1.0, abs(best)))[0])


def split_costs(y, min_seg=MIN_SEGMENT, bandwidth=None):
    """Kernel two-segment cost for every first-segment length b in [min_seg, n - min_seg].

    Per segment the cost is sum_t K(y_t, y_t) - (1/len) sum_{s,t} K(y_s, y_t)
    with K(a, b) = exp(-((a - b) / h)^2). Block sums grow one kernel row at a
    time, so memory stays linear in n.
    """
    y = _values(y)
    n = y.size
    if min_seg < 1 or n < 2 * min_seg:
        raise SignalTooShortError(f"need at least {2 * min_seg} samples for min_seg={min_seg}, got {n}")
    h = median_bandwidth(y) if bandwidth is None else float(bandwidth)

    left = np.zeros(n + 1)   # left[b]: kernel sum over y[:b] x y[:b]
    right = np.zeros(n + 1)  # right[b]: kernel sum over y[b:] x y[b:]
    rows_before = np.empty(n)
    rows_after = np.empty(n)
    for t in range(n):
        row = np.exp(-((y - y[t]) / h) ** 2)
        rows_before[t] = row[:t].sum()
        rows_after[t] = row[t + 1:].sum()
    left[1:] = np.cumsum(2.0 * rows_before + 1.0)
    right[:n] = np.cumsum((2.0 * rows_after + 1.0)[::-1])[::-1]

    b = np.arange(min_seg, n - min_seg + 1)
    return b, n - left[b] / b - right[b] / (n - b)


def kernel_breakpoint(y, min_seg=MIN_SEGMENT, bandwidth=None):
    """Length of the first segment of the cheapest two-segment split"""
    b, costs = split_costs(y, min_seg, bandwidth)
    return int(b[first_minimum(costs)])


# ==================== ANOVA ====================

class AnovaResult(NamedTuple):
    significant: bool
    f: float
    p: float


def anova_validate(y, b, alpha, orientation=STANDARD):
    """F-test of the split y[:b] | y[b:] plus the condition mean(y[b:]) > mean(y[:b])"""
    y = _values(y)
    n = y.size
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if orientation not in (STANDARD, AS_PRINTED):
        raise ParameterError(f"unknown orientation '{orientation}'")
    if b < 1 or b >= n:
        raise DegenerateSignalError(f"split at b={b} leaves an empty segment (n={n})")
    if n < 3:
        raise SignalTooShortError(f"ANOVA needs at least 3 samples, got {n}")

    head, tail = y[:b], y[b:]
    mean_head, mean_tail = head.mean(), tail.mean()
    ss_total = float(np.sum((y - y.mean()) ** 2))
    ss_split = float(np.sum((head - mean_head) ** 2) + np.sum((tail - mean_tail) ** 2))

    if orientation == STANDARD:
        if ss_split > 0:
            f = (n - 2) * max(ss_total - ss_split, 0.0) / ss_split
        else:
            f = float('inf') if ss_total > 0 else 0.0
    else:
        f = (n - 2) * ss_split / ss_total if ss_total > 0 else 0.0

    p = f_distribution_cdf(f, 1, n - 2)
    significant = bool(p > 1.0 - alpha and mean_tail > mean_head)
    return AnovaResult(significant, float(f), float(p))
