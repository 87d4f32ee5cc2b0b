"""Seeded random models, states and sequences.

Hermitian matrices come from standard-normal real and imaginary parts,
symmetrized; density matrices from G G^dagger normalized by the trace.
Multi-particle entries are averaged over particle permutations so that
they describe identical particles.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial

import numpy as np

from .model import ModelSpec, swap_matrix
from .sequences import OperatorSequence, canonical
from .tensor import LabeledOperator, permutation_matrix


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_hermitian(rng, side: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng, side: int, rank: int | None = None) -> np.ndarray:
    rank = side if rank is None else rank
    g = rng.standard_normal((side, rank)) + 1j * rng.standard_normal((side, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, d: int) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def symmetrize(matrix: np.ndarray, d: int, n: int) -> np.ndarray:
    """Average P M P^dagger over all permutations P of the n tensor factors."""
    if n <= 1:
        return matrix
    acc = np.zeros_like(matrix, dtype=complex)
    for perm in permutations(range(n)):
        P = permutation_matrix(perm, d)
        acc += P @ matrix @ P.conj().T
    return acc / factorial(n)


def random_model(seed, d: int = 2, epsilon: float = 1.0, n_max: int = 4, scale: float = 0.5) -> ModelSpec:
    """Random h and exchange-symmetric phi; entries of order ``scale``."""
    rng = rng_from(seed)
    h = random_hermitian(rng, d, scale)
    phi = random_hermitian(rng, d * d, scale)
    sw = swap_matrix(d)
    phi = 0.5 * (phi + sw @ phi @ sw)
    return ModelSpec(d, h, phi, epsilon, n_max)


def random_state_sequence(seed, d: int, support: int, weights=None) -> OperatorSequence:
    """D = (I, D_1, ..., D_support): symmetric positive D_n with Tr D_n = n! w_n.

    Default weights w_n = 0.5^n keep the normalization factor of order one.
    """
    rng = rng_from(seed)
    weights = weights or [0.5**n for n in range(1, support + 1)]
    entries = {}
    for n in range(1, support + 1):
        rho = symmetrize(random_density(rng, d**n), d, n)
        entries[n] = LabeledOperator(canonical(n), d, factorial(n) * weights[n - 1] * rho)
    return OperatorSequence(d, entries, 1.0)


def random_hermitian_sequence(seed, d: int, support: int, scale: float = 0.3, symmetric: bool = True) -> OperatorSequence:
    rng = rng_from(seed)
    entries = {}
    for n in range(1, support + 1):
        m = random_hermitian(rng, d**n, scale)
        if symmetric:
            m = symmetrize(m, d, n)
        entries[n] = LabeledOperator(canonical(n), d, m)
    return OperatorSequence(d, entries, 1.0)


def random_one_particle_state(seed, d: int, trace: float = 1.0) -> LabeledOperator:
    rng = rng_from(seed)
    return LabeledOperator((1,), d, trace * random_density(rng, d))


def chaos_sequence(g1: LabeledOperator, support: int) -> OperatorSequence:
    """(0, g1, 0, ...) as a correlation sequence."""
    return OperatorSequence(g1.dim, {1: g1}, 0.0)
