"""
Special functions needed by the Fourier filter, the resource theorems and the
ANOVA F-test. Scalar, pure and dependency-free apart from numpy.
"""
import logging
import math

import numpy as np

from gsee.exceptions import DomainError

logger = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)
# Rounded value used by the sample-count theorem
EULER_GAMMA_ROUNDED = 0.57721567

INV_E = math.exp(-1.0)

HARMONIC_MODES = ('exact', 'asymptotic')

_SQRT_PI = math.sqrt(math.pi)
_RESCALE = 1e-250
_RESCALE_TRIGGER = 1e250


# ==================== LAMBERT W ====================

def lambert_w0(x):
    """Principal branch W0 of the Lambert W function, w * exp(w) = x."""
    x = float(x)
    if math.isnan(x) or x < -INV_E - 1e-15:
        raise DomainError(f"lambert_w0 is defined for x >= -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf

    if x < -0.25:
        # branch-point series in p = sqrt(2(ex + 1))
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
        if p < 1e-8:
            return w
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    tol = 1e-12 * max(1.0, abs(x))
    for iteration in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 1e-3 * tol:
            break
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    logger.debug(f"lambert_w0({x}) converged after {iteration + 1} Halley steps")
    return w


# ==================== MODIFIED BESSEL ====================

def _check_beta(beta):
    beta = float(beta)
    if not beta > 0.0 or math.isinf(beta):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    return beta


def _check_order(n):
    if int(n) != n or n < 0:
        raise DomainError(f"Bessel order must be a non-negative integer, got {n}")
    return int(n)


def _bessel_series(n, beta):
    """Ascending series for exp(-beta) I_n(beta); used for beta < 1."""
    half = 0.5 * beta
    log_prefix = n * math.log(half) - math.lgamma(n + 1) - beta if n else -beta
    if log_prefix < -745.0:
        return 0.0
    quarter_sq = half * half
    term = 1.0
    total = 1.0
    m = 0
    while term > 1e-17 * total:
        m += 1
        term *= quarter_sq / (m * (m + n))
        total += term
    return math.exp(log_prefix) * total


def _miller_start(nmax, beta):
    return nmax + 16 + int(math.sqrt(40.0 * (nmax + 1))) + int(9.0 * math.sqrt(beta))


def _miller(nmax, beta, keep_all):
    """Backward recurrence normalised by exp(-b)[I_0 + 2 sum I_k] = 1.

    Returns the array of scaled values for orders 0..nmax when ``keep_all``,
    otherwise the single scaled value of order ``nmax``.
    """
    start = _miller_start(nmax, beta)
    two_over_beta = 2.0 / beta
    raw = np.zeros(nmax + 1) if keep_all else None
    stamp = np.zeros(nmax + 1, dtype=np.int64) if keep_all else None
    rescales = 0
    value = 0.0

    upper, current = 0.0, 1.0
    total = 0.0
    for k in range(start, 0, -1):
        lower = upper + k * two_over_beta * current
        upper, current = current, lower
        # upper holds I_k, current holds I_{k-1}
        total += 2.0 * upper
        if k <= nmax:
            if keep_all:
                raw[k] = upper
                stamp[k] = rescales
            elif k == nmax:
                value = upper
        if current > _RESCALE_TRIGGER:
            current *= _RESCALE
            upper *= _RESCALE
            total *= _RESCALE
            value *= _RESCALE
            rescales += 1
    total += current

    logger.debug(f"Miller recurrence for beta={beta} started at order {start} with {rescales} rescales")
    if keep_all:
        raw[0] = current
        stamp[0] = rescales
        return raw * np.power(_RESCALE, rescales - stamp) / total
    if nmax == 0:
        value = current
    return value / total


def bessel_i_scaled(n, beta):
    """Exponentially scaled modified Bessel function exp(-beta) * I_n(beta)."""
    n = _check_order(n)
    beta = _check_beta(beta)
    if beta < 1.0:
        return _bessel_series(n, beta)
    return float(_miller(n, beta, keep_all=False))


def bessel_i_scaled_sequence(nmax, beta):
    """Scaled values exp(-beta) * I_n(beta) for n = 0..nmax from one recurrence."""
    nmax = _check_order(nmax)
    beta = _check_beta(beta)
    if beta < 1.0:
        return np.array([_bessel_series(n, beta) for n in range(nmax + 1)])
    return _miller(nmax, beta, keep_all=True)


# ==================== ERROR FUNCTION ====================

def _erf_series(x):
    # 2/sqrt(pi) exp(-x^2) sum 2^n x^(2n+1) / (2n+1)!!, all terms positive
    x2 = x * x
    term = x
    total = x
    n = 0
    while term > 1e-17 * total:
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
    return 2.0 / _SQRT_PI * math.exp(-x2) * total


def _erfc_continued_fraction(x):
    # modified Lentz on x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))
    tiny = 1e-300
    f = x
    c = f
    d = 0.0
    for i in range(1, 500):
        a = 0.5 * i
        d = x + a * d
        d = 1.0 / (d if d != 0.0 else tiny)
        c = x + a / c
        if c == 0.0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x * x) / (_SQRT_PI * f)


def erf(x):
    """Error function, odd by construction."""
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x < 0.0:
        return -erf(-x)
    if x == 0.0:
        return 0.0
    if x < 2.5:
        return min(1.0, _erf_series(x))
    if x > 6.0:
        return 1.0
    return 1.0 - _erfc_continued_fraction(x)


# ==================== F DISTRIBUTION ====================

def _beta_continued_fraction(a, b, x):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def regularized_incomplete_beta(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError(f"incomplete beta needs a, b > 0, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # symmetry switch keeps the continued fraction in its fast-converging region
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def f_distribution_cdf(f, d1, d2):
    """Cumulative probability of the F(d1, d2) distribution at f."""
    if int(d1) != d1 or int(d2) != d2 or d1 < 1 or d2 < 1:
        raise DomainError(f"degrees of freedom must be positive integers, got ({d1}, {d2})")
    f = float(f)
    if math.isnan(f):
        raise DomainError("F statistic is NaN")
    if f <= 0.0:
        return 0.0
    if math.isinf(f):
        return 1.0
    x = d1 * f / (d1 * f + d2)
    return min(1.0, max(0.0, regularized_incomplete_beta(0.5 * d1, 0.5 * d2, x)))


# ==================== HARMONIC NUMBERS ====================

def harmonic(n, mode='exact'):
    """n-th harmonic number, summed exactly or from its asymptotic expansion."""
    if int(n) != n or n < 1:
        raise DomainError(f"harmonic numbers need an integer n >= 1, got {n}")
    if mode not in HARMONIC_MODES:
        raise DomainError(f"unknown harmonic mode '{mode}', expected one of {HARMONIC_MODES}")
    n = int(n)
    if mode == 'exact':
        # smallest terms first
        return float(np.sum(1.0 / np.arange(n, 0, -1, dtype=np.float64)))
    inv = 1.0 / n
    inv2 = inv * inv
    return math.log(n) + EULER_GAMMA + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0
