"""
Closed-form resource estimates: maximal runtime D, sample count M, the
resolvable jump height, Trotter step counts and circuit depth.
"""
from dataclasses import asdict, dataclass, field
import logging
import math

import numpy as np

from fourier.series import coefficients, select_beta
from gsee.exceptions import DomainError, ParameterError
from specfun.functions import EULER_GAMMA_ROUNDED, lambert_w0

logger = logging.getLogger(__name__)

# Relative slack removed before every ceiling
CEIL_SLACK = 1e-12


def _ceil(value):
    return math.ceil(value * (1.0 - CEIL_SLACK))


def _check_epsilon(epsilon):
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")


# ==================== MAXIMAL RUNTIME ====================

def runtime_f(beta, epsilon_prime):
    """f(beta, e) = -(ln e + beta) / W0(-(1 + ln(e) / beta) / e)"""
    log_e = math.log(epsilon_prime)
    argument = -(1.0 + log_e / beta) * math.exp(-1.0)
    w = lambert_w0(max(argument, -math.exp(-1.0)))
    if abs(w) < 1e-12:
        # removable singularity at ln e = -beta
        return math.e * beta
    return -(log_e + beta) / w


def max_runtime(epsilon, delta):
    """Odd maximal runtime D for filter error epsilon at precision delta"""
    _check_epsilon(epsilon)
    beta = select_beta(delta, epsilon)
    w = lambert_w0(18.0 / (math.pi * epsilon ** 2))
    epsilon_prime = min(1.0, 4.0 * math.exp(-0.5 * w))
    f = runtime_f(beta, epsilon_prime)
    D = 2 * _ceil(math.sqrt(f * w)) + 1
    logger.debug(f"max_runtime: beta={beta:.6g}, w={w:.6g}, f={f:.6g}, D={D}")
    return D


def design_filter(epsilon, delta, D=None, beta=None):
    """FourierSeries for (epsilon, delta); explicit D or beta override the closed forms"""
    beta = beta if beta is not None else select_beta(delta, epsilon)
    D = D if D is not None else max_runtime(epsilon, delta)
    if D < 1 or D % 2 == 0:
        raise ParameterError(f"D must be a positive odd integer, got {D}")
    return coefficients(beta, (D - 1) // 2)


# ==================== SAMPLE COUNT ====================

def _prefactor(D):
    return 2.07 / math.pi * (math.log(4.0 * D) + EULER_GAMMA_ROUNDED) + 1.0


def _confidence_log(tau, epsilon, vartheta):
    if not 0.0 < vartheta < 1.0:
        raise DomainError(f"vartheta must lie in (0, 1), got {vartheta}")
    if not 0.0 < tau * epsilon < math.exp(-1.0):
        raise ParameterError(f"tau * epsilon must lie in (0, 1/e), got {tau * epsilon}")
    return math.log(math.log(1.0 / (tau * epsilon))) + math.log(1.0 / vartheta)


def sample_count(D, eta, epsilon, tau, vartheta):
    """Samples needed to decide a jump of height eta with probability 1 - vartheta"""
    if eta <= 2.0 * epsilon:
        raise ParameterError(
            f"eta={eta} must exceed 2 epsilon={2.0 * epsilon}: smaller jumps cannot be resolved"
        )
    ratio = _prefactor(D) / (eta - 2.0 * epsilon)
    return max(1, _ceil(2.0 * ratio ** 2 * _confidence_log(tau, epsilon, vartheta)))


def resolvable_eta(M, D, epsilon, tau, vartheta):
    """Smallest eta that M samples resolve; tends to 2 epsilon as M grows"""
    if M < 1:
        raise ParameterError(f"M must be at least 1, got {M}")
    spread = math.sqrt(2.0 * _confidence_log(tau, epsilon, vartheta) / M)
    return 2.0 * epsilon + _prefactor(D) * spread


def resolvable_eta_sweep(Ms, D, epsilon, tau, vartheta):
    return [(int(M), resolvable_eta(int(M), D, epsilon, tau, vartheta)) for M in Ms]


def log_grid(lo, hi, points):
    """Integer sample counts spaced evenly in log10"""
    return sorted({int(round(m)) for m in np.logspace(math.log10(lo), math.log10(hi), points)})


# ==================== CIRCUITS ====================

def trotter_steps(C, p, tau, D, epsilon):
    """r = ceil(C^(1/p) (tau D)^(1 + 1/p) epsilon^(-1/p))"""
    if not C > 0 or p < 1 or not tau > 0 or D < 1 or not epsilon > 0:
        raise ParameterError(f"invalid Trotter inputs C={C}, p={p}, tau={tau}, D={D}, epsilon={epsilon}")
    value = C ** (1.0 / p) * (tau * D) ** (1.0 + 1.0 / p) * epsilon ** (-1.0 / p)
    return max(1, _ceil(value))


def circuit_depth(n_sites, r, D):
    if min(n_sites, r, D) < 1:
        raise ParameterError(f"depth inputs must be positive, got N={n_sites}, r={r}, D={D}")
    return 2 * int(n_sites) * int(r) * int(D)


@dataclass(frozen=True)
class ResourceEstimate:
    """Closed-form costs of one experiment"""

    D: int
    M: int
    r: int
    depth: int
    t_max: float
    depth_fast_forward: int
    inputs: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def estimate_resources(epsilon, delta, tau, n_sites, eta=None, vartheta=0.05,
                       prefactor=1.0, order=2, steps_policy='fixed', steps_per_unit=8, D=None):
    """Bundle D, M, r and depth; eta defaults to 4 epsilon"""
    _check_epsilon(epsilon)
    D = D if D is not None else max_runtime(epsilon, delta)
    eta = eta if eta is not None else 4.0 * epsilon
    M = sample_count(D, eta, epsilon, tau, vartheta)
    if steps_policy == 'formula':
        r = math.ceil(trotter_steps(prefactor, order, tau, D, epsilon) / D)
    else:
        r = int(steps_per_unit)
    depth = circuit_depth(n_sites, r, D)
    estimate = ResourceEstimate(
        D=D,
        M=M,
        r=r,
        depth=depth,
        t_max=tau * D,
        depth_fast_forward=depth // 2,
        inputs={
            'epsilon': epsilon,
            'delta': delta,
            'eta': eta,
            'vartheta': vartheta,
            'tau': tau,
            'trotter_prefactor': prefactor,
            'trotter_order': order,
            'steps_policy': steps_policy,
            'n_sites': n_sites,
        },
    )
    logger.info(f"Resources: D={D}, M={M}, r={r}, depth={depth}, T_max={tau * D:.6g}")
    return estimate
