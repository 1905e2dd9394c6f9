"""
Trotter backend: second-order product formula on a statevector.

Each exponential exp(-i theta P) is applied as cos(theta) psi - i sin(theta) P psi,
with P psi gathered through the term's bit-mask action, so no matrix is formed.
"""
from dataclasses import dataclass
import logging
import math

import numpy as np

from gsee.exceptions import ParameterError
from resources.estimates import trotter_steps
from states.vectors import StateVector

from .spectrum import MomentSet

logger = logging.getLogger(__name__)

STEPS_POLICIES = ('fixed', 'formula')
# Entries of cached (source, phase) tables kept per propagator
_ACTION_CACHE_LIMIT = 1 << 21


def pauli_exponential(term, theta, amplitudes, action=None):
    """exp(-i theta P) applied to amplitudes"""
    if term.is_identity:
        return np.exp(-1j * theta) * amplitudes
    source, phases = action if action is not None else term.action()
    return math.cos(theta) * amplitudes - 1j * math.sin(theta) * (phases * amplitudes[source])


class TrotterPropagator:
    """Symmetric product formula over the Hamiltonian's term order"""

    def __init__(self, h):
        self.h = h
        cache = len(h.terms) * h.dimension <= _ACTION_CACHE_LIMIT
        self._actions = [
            term.action() if cache and not term.is_identity else None
            for term in h.terms
        ]
        self._sweep = list(zip(h.terms, self._actions))

    def step(self, amplitudes, dt):
        half = 0.5 * dt
        for term, action in self._sweep:
            amplitudes = pauli_exponential(term, term.coefficient * half, amplitudes, action)
        for term, action in reversed(self._sweep):
            amplitudes = pauli_exponential(term, term.coefficient * half, amplitudes, action)
        return amplitudes

    def evolve(self, amplitudes, dt, steps):
        for _ in range(int(steps)):
            amplitudes = self.step(amplitudes, dt)
        return amplitudes


def trotter_step_2nd(h, dt, psi):
    """One second-order step of length dt under the unscaled Hamiltonian"""
    return StateVector(TrotterPropagator(h).step(psi.amplitudes, dt))


def trotter_evolve(h, psi, time, steps):
    if steps < 1:
        raise ParameterError(f"steps must be at least 1, got {steps}")
    return StateVector(TrotterPropagator(h).evolve(psi.amplitudes, time / steps, steps))


# ==================== STEPS POLICY ====================

@dataclass(frozen=True)
class StepsPolicy:
    """How many Trotter steps approximate exp(-i H tau j)"""

    kind: str = 'fixed'
    steps_per_unit: int = 8
    prefactor: float = 1.0
    order: int = 2
    epsilon: float = None

    def __post_init__(self):
        if self.kind not in STEPS_POLICIES:
            raise ParameterError(f"unknown steps policy '{self.kind}', expected one of {STEPS_POLICIES}")
        if self.kind == 'fixed' and self.steps_per_unit < 1:
            raise ParameterError(f"steps_per_unit must be at least 1, got {self.steps_per_unit}")
        if self.kind == 'formula' and not (self.epsilon and self.epsilon > 0):
            raise ParameterError("the formula steps policy needs a positive epsilon")

    def steps_for(self, j, tau):
        if self.kind == 'fixed':
            return self.steps_per_unit * int(j)
        return trotter_steps(self.prefactor, self.order, tau, int(j), self.epsilon)


def trotter_moments(h, psi, j_values, policy=None):
    """g_j = <psi| U_trotter(tau j) |psi> for each requested j (0 is added)"""
    policy = policy or StepsPolicy()
    js = sorted({int(j) for j in j_values if int(j) != 0})
    if any(j < 1 or j % 2 == 0 for j in js):
        raise ParameterError(f"Trotter moments need positive odd j, got {js[:5]}")
    propagator = TrotterPropagator(h)
    start = psi.amplitudes

    values = [1.0 + 0.0j]
    steps = [0]
    if policy.kind == 'fixed':
        # one shared dt, so each moment continues from the previous state
        dt = h.tau / policy.steps_per_unit
        current = start
        elapsed = 0
        for j in js:
            current = propagator.evolve(current, dt, policy.steps_for(j - elapsed, h.tau))
            elapsed = j
            values.append(np.vdot(start, current))
            steps.append(policy.steps_for(j, h.tau))
    else:
        for j in js:
            n_steps = policy.steps_for(j, h.tau)
            evolved = propagator.evolve(start, h.tau * j / n_steps, n_steps)
            values.append(np.vdot(start, evolved))
            steps.append(n_steps)
            logger.debug(f"Trotter moment j={j} with {n_steps} steps")

    logger.info(
        f"Computed {len(js)} Trotter moments up to j={js[-1] if js else 0} "
        f"({policy.kind} policy, longest evolution {max(steps)} steps)"
    )
    return MomentSet(
        j_values=np.array([0] + js), values=np.array(values), backend='trotter', steps=np.array(steps),
    )
