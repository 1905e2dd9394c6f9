"""Hadamard-test shots: +-1 outcomes whose means are Re g_j and Im g_j."""
from dataclasses import dataclass

import numpy as np

from gsee.exceptions import DomainError

_SLACK = 1e-12


@dataclass(frozen=True)
class ShotRecord:
    """One real-part and one imaginary-part Hadamard test at index j"""

    j: int
    x_outcome: int
    y_outcome: int


def _check(re, im):
    if np.any(np.abs(re) > 1.0 + _SLACK) or np.any(np.abs(im) > 1.0 + _SLACK):
        raise DomainError("Hadamard test needs |Re g| <= 1 and |Im g| <= 1")


def hadamard_shots(g, rng):
    """Vectorized shots for an array of moments.

    Entry i consumes uniforms 2i (real part) and 2i + 1 (imaginary part) of
    ``rng``, matching a sequence of single ``hadamard_shot`` calls.
    """
    g = np.asarray(g, dtype=np.complex128)
    _check(g.real, g.imag)
    u = rng.random((g.size, 2))
    xs = np.where(u[:, 0] < 0.5 * (1.0 + g.real), 1, -1).astype(np.int8)
    ys = np.where(u[:, 1] < 0.5 * (1.0 + g.imag), 1, -1).astype(np.int8)
    return xs, ys


def hadamard_shot(g_j, rng, j=0):
    xs, ys = hadamard_shots(np.array([g_j]), rng)
    return ShotRecord(j=int(j), x_outcome=int(xs[0]), y_outcome=int(ys[0]))
