"""
Inflection-point search on an ACDF curve.

``detect_inflection`` is the entry point used by the pipeline and the
``detect`` command: it estimates the noise floor on an eigenvalue-free
region, restricts the curve to the admissible window, runs one of the three
detectors and refines the result at the steepest point of G nearby.
"""
from dataclasses import asdict, dataclass, field, replace
import logging
import math

import numpy as np

from acdf.estimator import ABOVE_ZERO, decide_jump
from gsee.exceptions import EmptyWindowError, NotDetectedError, ParameterError, SignalTooShortError

from .changepoint import MIN_SEGMENT, STANDARD, Signal, anova_validate, kernel_breakpoint

logger = logging.getLogger(__name__)

RUPTURE = 'rupture'
VARIANCE_SCAN = 'variance-scan'
CERTIFIED_SEARCH = 'certified-search'
METHOD_CHOICES = [
    (RUPTURE, 'Kernel change point with ANOVA validation'),
    (VARIANCE_SCAN, 'First point above s sigma with windowed confirmation'),
    (CERTIFIED_SEARCH, 'Binary search on the eta decision'),
]

DEFAULT_NOISE_REGION = (-math.pi, -math.pi / 2)


@dataclass(frozen=True)
class GuardParams:
    """Overshoot guard and the optional percentile gate"""

    k: float = 2.0
    l: int = 20
    percentile_gate: bool = False
    gate_percentile: float = 25.0
    gate_s: float = 1.0

    def __post_init__(self):
        if self.k < 0 or self.l < 1:
            raise ParameterError(f"guard needs k >= 0 and l >= 1, got k={self.k}, l={self.l}")
        if not 0.0 <= self.gate_percentile <= 100.0:
            raise ParameterError(f"gate percentile must lie in [0, 100], got {self.gate_percentile}")


@dataclass(frozen=True)
class TraceEntry:
    candidate: int
    f: float
    p: float
    accepted: bool
    reason: str = ''


@dataclass(frozen=True)
class DetectionResult:
    """Detected breakpoint with its abscissa, refined energy and audit trail"""

    breakpoint_index: int
    inflection_x: float
    refined_energy: float
    sigma_empirical: float
    noise_floor: float
    method: str
    trace: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    gradient_floor: float = None

    @property
    def detected(self):
        return self.inflection_x is not None

    def to_dict(self):
        data = asdict(self)
        data['detected'] = self.detected
        return data


# ==================== REGIONS ====================

def eigenvalue_free_region(lambda_bound, delta):
    """[Lambda - pi + delta, -Lambda - delta): no filtered step reaches it, wrapped or not"""
    if not 0 < lambda_bound < math.pi / 2:
        raise ParameterError(f"lambda_bound must lie in (0, pi/2), got {lambda_bound}")
    return lambda_bound - math.pi + delta, -lambda_bound - delta


def detection_window(lambda_bound, delta):
    return lambda_bound - math.pi + delta, lambda_bound + delta


def curve_signal(curve, window):
    """Curve restricted to lo <= x <= hi, with the index offset into the full grid"""
    lo, hi = window
    picked = np.flatnonzero((curve.grid >= lo) & (curve.grid <= hi))
    if picked.size == 0:
        raise EmptyWindowError(f"no grid point in [{lo:.6g}, {hi:.6g}]")
    return Signal(curve.g_values[picked], curve.grid[picked]), int(picked[0])


def _region_stats(values, curve, region):
    lo, hi = region if region is not None else DEFAULT_NOISE_REGION
    mask = (curve.grid >= lo) & (curve.grid < hi)
    if mask.sum() < 2 and region is not None:
        logger.warning(
            f"Noise region [{lo:.4g}, {hi:.4g}) holds {int(mask.sum())} grid points, "
            f"falling back to [-pi, -pi/2)"
        )
        lo, hi = DEFAULT_NOISE_REGION
        mask = (curve.grid >= lo) & (curve.grid < hi)
    if not mask.any():
        raise EmptyWindowError(f"no grid point in the noise region [{lo:.6g}, {hi:.6g})")
    values = values[mask]
    sigma = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return sigma, float(np.mean(np.abs(values)))


def noise_floor(curve, region=None):
    """(sigma, eps_tilde) of G over an eigenvalue-free region; default [-pi, -pi/2)"""
    return _region_stats(curve.g_values, curve, region)


def gradient_noise(curve, region=None):
    """(sigma, mean |G'|) of the derivative over the same region"""
    return _region_stats(curve.grad_values, curve, region)


# ==================== RUPTURE ====================

def _guard_fires(y, candidate, guard, sigma, eps_tilde):
    return float(y[candidate:candidate + guard.l].mean()) <= guard.k * sigma + eps_tilde


def _gate_blocks(y, candidate, end, guard, sigma):
    return float(np.percentile(y[candidate:end], guard.gate_percentile)) <= guard.gate_s * sigma


def find_smallest_breakpoint(signal, alpha, guard=None, sigma=0.0, eps_tilde=0.0,
                             orientation=STANDARD, min_seg=MIN_SEGMENT):
    """Shrink to the leftmost validated breakpoint.

    Each round proposes a split of the current prefix y[:b], validates it by
    ANOVA on the full signal and keeps it unless the overshoot guard or the
    percentile gate objects. ``breakpoint_index`` is len(signal) when the
    first candidate is already rejected.
    """
    guard = guard or GuardParams()
    y = signal.y
    n = len(signal)
    b = n
    trace = []
    while b >= 2 * min_seg:
        candidate = kernel_breakpoint(y[:b], min_seg)
        anova = anova_validate(y, candidate, alpha, orientation)
        accepted, reason = anova.significant, '' if anova.significant else 'anova'
        if accepted and _guard_fires(y, candidate, guard, sigma, eps_tilde):
            accepted, reason = False, 'guard'
        if accepted and guard.percentile_gate and _gate_blocks(y, candidate, b, guard, sigma):
            accepted, reason = False, 'percentile'
        trace.append(TraceEntry(candidate, anova.f, anova.p, accepted, reason))
        logger.debug(f"candidate b={candidate}: f={anova.f:.4g}, p={anova.p:.6f}, accepted={accepted} {reason}")
        if not accepted:
            break
        b = candidate

    detected = b < n
    x = float(signal.x[b]) if detected else None
    return DetectionResult(
        breakpoint_index=b, inflection_x=x, refined_energy=x,
        sigma_empirical=sigma, noise_floor=eps_tilde, method=RUPTURE, trace=trace,
    )


# ==================== ALTERNATIVE DETECTORS ====================

def variance_scan(y, s=3.0, window_l=40, fraction_x=0.8, lead=None):
    """First index i with y[i] > s sigma and at least fraction_x of y[i:i+L] above it too.

    sigma is the standard deviation of the first ``lead`` samples, which must
    hold no eigenvalue; by default max(L, n/8). Returns None when no index
    qualifies.
    """
    y = np.asarray(getattr(y, 'y', y), dtype=np.float64)
    n = y.size
    lead = max(window_l, n // 8) if lead is None else int(lead)
    if lead < 2 or lead >= n:
        raise SignalTooShortError(f"need more than lead={lead} samples to estimate sigma, got {n}")
    if window_l < 1 or not 0.0 < fraction_x <= 1.0:
        raise ParameterError(f"invalid window L={window_l} or fraction {fraction_x}")
    sigma = float(y[:lead].std(ddof=1))
    above = y > s * sigma
    if n < window_l:
        return None
    counts = np.convolve(above.astype(np.int64), np.ones(window_l, dtype=np.int64), mode='valid')
    hits = np.flatnonzero(above[:counts.size] & (counts >= fraction_x * window_l))
    return int(hits[0]) if hits.size else None


def certified_search(evaluate, eta, epsilon, x_lo, x_hi, delta, decisions=None):
    """Bisect on decide_jump until the bracket is at most 2 delta; return its midpoint.

    ``evaluate(x)`` returns G(x), ideally from a fresh batch per call.
    """
    if not x_lo < x_hi:
        raise ParameterError(f"empty search interval [{x_lo}, {x_hi}]")
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    decide_jump(0.0, eta, epsilon)
    lo, hi = float(x_lo), float(x_hi)
    while hi - lo > 2.0 * delta:
        mid = 0.5 * (lo + hi)
        g = float(evaluate(mid))
        decision = decide_jump(g, eta, epsilon)
        if decisions is not None:
            decisions.append({'x': mid, 'g': g, 'decision': decision})
        if decision == ABOVE_ZERO:
            hi = mid
        else:
            lo = mid
    logger.debug(f"certified search converged to [{lo:.6g}, {hi:.6g}]")
    return 0.5 * (lo + hi)


# ==================== REFINEMENT ====================

def first_significant_peak(curve, lo, hi, half_window, floor):
    """First grid point in [lo, hi] whose G' exceeds floor and every G' within half_window"""
    grid, grad = curve.grid, curve.grad_values
    for i in np.flatnonzero((grid >= lo) & (grid <= hi)):
        if grad[i] <= floor:
            continue
        near = np.abs(grid - grid[i]) <= half_window
        if grad[i] >= grad[near].max():
            return float(grid[i])
    return None


def locate_inflection(curve, breakpoint_x, half_window, reach, floor):
    """Advance from a breakpoint to the first significant peak of G' on the rise.

    The points from breakpoint_x - half_window to breakpoint_x + reach are
    scanned left to right; breakpoint_x itself is kept when none qualifies.
    """
    reach = max(reach, half_window)
    peak = first_significant_peak(curve, breakpoint_x - half_window, breakpoint_x + reach, half_window, floor)
    if peak is None:
        logger.debug(f"no gradient peak above {floor:.4g} within {reach:.4g} past x={breakpoint_x:.6g}")
        return breakpoint_x
    return peak


def refine_energy(curve, inflection_x, half_window):
    """Abscissa of the largest G' within half_window of inflection_x, ties going left"""
    mask = np.abs(curve.grid - inflection_x) <= half_window
    if not mask.any():
        raise EmptyWindowError(f"no grid point within {half_window:.6g} of x={inflection_x:.6g}")
    picked = np.flatnonzero(mask)
    return float(curve.grid[picked[np.argmax(curve.grad_values[picked])]])


def detect_inflection(curve, delta, lambda_bound, method=RUPTURE, alpha=0.01, guard=None,
                      orientation=STANDARD, scan_s=3.0, scan_window=40, scan_fraction=0.8,
                      half_window=None, eta=None, epsilon=None, evaluate=None):
    """Noise floor, detector and gradient refinement for one curve.

    A rupture or variance-scan breakpoint marks where G leaves the noise
    band; the inflection is the first significant G' peak within the
    confirmation window past it (guard.l or scan_window grid points), with
    floor k sigma + mean |G'| of G' on the eigenvalue-free region. The
    refined energy is the largest G' within half_window of the inflection.
    Raises NotDetectedError when the detector finds nothing.
    """
    guard = guard or GuardParams()
    half_window = delta if half_window is None else half_window
    region = eigenvalue_free_region(lambda_bound, delta)
    sigma, eps_tilde = noise_floor(curve, region)
    grad_sigma, grad_mean = gradient_noise(curve, region)
    signal, offset = curve_signal(curve, detection_window(lambda_bound, delta))
    floor = None

    if method == RUPTURE:
        result = find_smallest_breakpoint(signal, alpha, guard, sigma, eps_tilde, orientation)
        if not result.detected:
            raise NotDetectedError(f"no validated breakpoint ({len(result.trace)} candidates tried)")
        index, x = result.breakpoint_index, result.inflection_x
        floor = guard.k * grad_sigma + grad_mean
        x = locate_inflection(curve, x, half_window, guard.l * curve.spacing, floor)
    elif method == VARIANCE_SCAN:
        lead = int(np.count_nonzero(signal.x < region[1]))
        index = variance_scan(signal.y, scan_s, scan_window, scan_fraction, lead=lead if lead >= 2 else None)
        if index is None:
            raise NotDetectedError(f"variance scan found no point above {scan_s} sigma")
        floor = scan_s * grad_sigma + grad_mean
        x = locate_inflection(curve, float(signal.x[index]), half_window, scan_window * curve.spacing, floor)
        result = DetectionResult(index, x, x, sigma, eps_tilde, VARIANCE_SCAN)
    elif method == CERTIFIED_SEARCH:
        if eta is None or epsilon is None:
            raise ParameterError("certified search needs eta and epsilon")
        if evaluate is None:
            def evaluate(x):
                return np.interp(x, curve.grid, curve.g_values)
        decisions = []
        x = certified_search(evaluate, eta, epsilon, signal.x[0], signal.x[-1], delta, decisions)
        index = int(np.argmin(np.abs(signal.x - x)))
        result = DetectionResult(index, x, x, sigma, eps_tilde, CERTIFIED_SEARCH, decisions=decisions)
    else:
        raise ParameterError(f"unknown detection method '{method}'")

    refined = refine_energy(curve, x, half_window)
    logger.info(f"{method}: inflection at x={x:.6g}, refined x={refined:.6g} (sigma={sigma:.3g})")
    return replace(
        result, breakpoint_index=offset + index, inflection_x=x, refined_energy=refined, gradient_floor=floor,
    )
