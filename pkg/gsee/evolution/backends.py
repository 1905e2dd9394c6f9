"""Choice between the exact and the Trotter moment backends."""
import logging

from gsee.exceptions import ParameterError, SizeError

from .spectrum import MAX_EXACT_SITES, diagonalize, exact_moments, moment_indices, spectral_measure
from .trotter import StepsPolicy, trotter_moments

logger = logging.getLogger(__name__)

BACKENDS = ('exact', 'trotter')


def resolve_backend(kind, n_sites):
    """'auto' picks the exact backend whenever the dense eigensolver can handle the size"""
    if kind == 'auto':
        return 'exact' if n_sites <= MAX_EXACT_SITES else 'trotter'
    if kind not in BACKENDS:
        raise ParameterError(f"unknown backend '{kind}', expected one of {BACKENDS} or 'auto'")
    if kind == 'exact' and n_sites > MAX_EXACT_SITES:
        raise SizeError(f"exact backend is limited to {MAX_EXACT_SITES} sites, got {n_sites}")
    return kind


def build_policy(spec, epsilon=None):
    return StepsPolicy(
        kind=spec['steps_policy'],
        steps_per_unit=spec['steps_per_unit'],
        prefactor=spec['prefactor'],
        order=spec['order'],
        epsilon=epsilon,
    )


def compute_moments(h, psi, d, backend, policy=None, eigen=None):
    """Moments g_0, g_1, g_3, ..., g_{2d+1} from the selected backend"""
    if backend == 'exact':
        eigen = eigen if eigen is not None else diagonalize(h)
        return exact_moments(spectral_measure(eigen, psi), d)
    logger.info(f"Running Trotter backend for d={d} on {h.n_sites} sites")
    return trotter_moments(h, psi, moment_indices(d)[1:], policy)
