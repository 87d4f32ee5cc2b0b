"""Conjugation groups, their generators, and the two mean-value functionals."""

from __future__ import annotations

from itertools import combinations
from math import factorial
from typing import Iterable

import numpy as np

from .errors import DegenerateStateError, DomainError
from .model import ModelSpec
from .sequences import OperatorSequence, canonical
from .tensor import LabeledOperator, embed, identity, partial_trace

FORWARD = "forward"
INVERSE = "inverse"


def hamiltonian(model: ModelSpec, n: int) -> LabeledOperator:
    model.check_capacity(n)
    return LabeledOperator(canonical(n), model.d, model.hamiltonian_matrix(n))


def conjugate(U: np.ndarray, op: LabeledOperator) -> LabeledOperator:
    return LabeledOperator(op.labels, op.dim, U @ op.matrix @ U.conj().T)


def propagate(
    model: ModelSpec,
    op: LabeledOperator,
    t: float,
    direction: str = FORWARD,
    subset: Iterable[int] | None = None,
) -> LabeledOperator:
    """G*(t) op = exp(-itH) op exp(itH) for the particles in ``subset``.

    ``subset`` defaults to all labels of ``op``; the inverse group uses -t.
    """
    if direction not in (FORWARD, INVERSE):
        raise DomainError(f"direction must be {FORWARD!r} or {INVERSE!r}")
    subset = op.labels if subset is None else tuple(subset)
    if not set(subset) <= set(op.labels):
        raise DomainError(f"subset {tuple(subset)} not within {op.labels}")
    model.check_capacity(len(subset))
    tt = t if direction == FORWARD else -t
    return conjugate(model.group_unitary(subset, op.labels, tt), op)


def _commutator(A: np.ndarray, f: np.ndarray) -> np.ndarray:
    return -1j * (A @ f - f @ A)


def generator_apply(model: ModelSpec, op: LabeledOperator, which="full") -> LabeledOperator:
    """Apply -i[H, .] (``full``), its free part (``free``), or one pair term.

    ``which=("interaction", j1, j2)`` gives -i[eps*phi(j1,j2), .]; the
    coupling epsilon of the model is part of every interaction term.
    """
    if which == "full":
        return subsystem_generator(model, op, op.labels)
    elif which == "free":
        A = sum(embed(model.one_body(j), op.labels).matrix for j in op.labels)
    elif isinstance(which, tuple) and len(which) == 3 and which[0] == "interaction":
        _, j1, j2 = which
        if j1 == j2 or j1 not in op.labels or j2 not in op.labels:
            raise DomainError(f"interaction labels ({j1}, {j2}) not valid for {op.labels}")
        A = embed(model.pair(j1, j2), op.labels).matrix
    else:
        raise DomainError(f"unknown generator part {which!r}")
    return LabeledOperator(op.labels, op.dim, _commutator(A, op.matrix))


def free_generator(model: ModelSpec, op: LabeledOperator, subset: Iterable[int]) -> LabeledOperator:
    """sum_{j in subset} -i[h(j), .]."""
    A = np.zeros_like(op.matrix)
    for j in subset:
        A = A + embed(model.one_body(j), op.labels).matrix
    return LabeledOperator(op.labels, op.dim, _commutator(A, op.matrix))


def interaction(model: ModelSpec, op: LabeledOperator, j1: int, j2: int, coupled: bool = True) -> LabeledOperator:
    """-i[phi(j1, j2), op], with the model coupling unless ``coupled`` is False."""
    A = embed(model.pair(j1, j2, coupled=coupled), op.labels).matrix
    return LabeledOperator(op.labels, op.dim, _commutator(A, op.matrix))


def subsystem_generator(model: ModelSpec, op: LabeledOperator, subset: Iterable[int]) -> LabeledOperator:
    """Generator of the group of the particles in ``subset`` applied to ``op``."""
    subset = tuple(sorted(subset))
    model.check_capacity(len(subset))
    H = LabeledOperator(subset, model.d, model.hamiltonian_matrix(len(subset)))
    A = embed(H, op.labels).matrix
    return LabeledOperator(op.labels, op.dim, _commutator(A, op.matrix))


def normalization(D: OperatorSequence) -> complex:
    """(I, D) = D_0 + sum_n Tr D_n / n!."""
    return D.scalar_0 + sum(op.trace() / factorial(n) for n, op in D.entries.items())


def mean_value(A: OperatorSequence, D: OperatorSequence, return_imag: bool = False):
    """<A> = (I,D)^-1 sum_n Tr(A_n D_n) / n!."""
    norm = normalization(D)
    if abs(norm) < 1e-300:
        raise DegenerateStateError("normalization factor (I, D) vanishes")
    acc = A.scalar_0 * D.scalar_0
    for n, Dn in D.entries.items():
        An = A.get(n)
        if An is not None:
            acc += np.trace(An.matrix @ Dn.matrix) / factorial(n)
    value = acc / norm
    if return_imag:
        return float(value.real), float(value.imag)
    return float(value.real)


def reduce_observable(A: OperatorSequence, s_max: int) -> OperatorSequence:
    """Reduced observables B_s = sum_{S subset of 1..s} (-1)^(s-|S|) A_{|S|}(S).

    This is the alternating sum over distinct removed labels with the 1/n!
    absorbing the orderings of each removed set. B_0 = A_0.
    """
    out = {}
    for s in range(1, s_max + 1):
        labels = canonical(s)
        acc = identity(labels, A.dim).scale(A.scalar_0 * (-1) ** s)
        for k in range(1, s + 1):
            Ak = A.get(k)
            if Ak is None:
                continue
            sign = (-1) ** (s - k)
            for S in combinations(labels, k):
                acc = acc + embed(Ak.relabel(S), labels).scale(sign)
        out[s] = acc
    return OperatorSequence(A.dim, out, A.scalar_0)


def mean_value_reduced(B: OperatorSequence, F: OperatorSequence, return_imag: bool = False):
    """sum_s Tr(B_s F_s) / s!, with F_0 = 1."""
    acc = complex(B.scalar_0 * F.scalar_0)
    for s, Fs in F.entries.items():
        Bs = B.get(s)
        if Bs is not None:
            acc += np.trace(Bs.matrix @ Fs.matrix) / factorial(s)
    if return_imag:
        return float(acc.real), float(acc.imag)
    return float(acc.real)


def trace_out_tail(op: LabeledOperator, s: int) -> LabeledOperator:
    """Tr_{s+1,...} of an operator on labels 1..s+n."""
    return partial_trace(op, [lab for lab in op.labels if lab > s])
