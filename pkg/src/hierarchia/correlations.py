"""Cluster expansions, cumulants of groups, and the dynamics of correlations.

Sequences are handled in graded form (see ``sequences``): a product of
entries over the blocks of a partition has order equal to the sum of the
orders of its factors, and ``max_order`` drops every term above it.
Plain ``OperatorSequence`` inputs are graded homogeneously.
"""

from __future__ import annotations

from itertools import product as cartesian
from typing import Sequence

import numpy as np

from .dynamics import subsystem_generator, interaction
from .errors import DomainError
from .model import ModelSpec
from .partitions import declusterize, enumerate_partitions, enumerate_two_block, mobius_weight
from .sequences import GradedSequence, OperatorSequence, canonical, graded_sum, total_of
from .tensor import LabeledOperator, tensor

Graded = dict  # order -> LabeledOperator


def as_graded(seq: OperatorSequence | GradedSequence) -> GradedSequence:
    if isinstance(seq, GradedSequence):
        return seq
    return GradedSequence.homogeneous(seq)


def block_product(
    seq: GradedSequence,
    blocks: Sequence[Sequence[int]],
    max_order: int | None = None,
) -> Graded:
    """prod_X seq_{|X|}(X) over disjoint label blocks, split by total order."""
    choices = []
    for X in blocks:
        comps = seq.orders(len(X))
        if not comps:
            return {}
        choices.append([(k, op.relabel(tuple(sorted(X)))) for k, op in sorted(comps.items())])
    out: Graded = {}
    for combo in cartesian(*choices):
        k = sum(c[0] for c in combo)
        if max_order is not None and k > max_order:
            continue
        op = tensor(*(c[1] for c in combo))
        out[k] = op if k not in out else out[k] + op
    return out


def _scale(g: Graded, c) -> Graded:
    return {k: op.scale(c) for k, op in g.items()}


def _cluster_sum(seq, labels, weighted: bool, max_order, max_size=None) -> Graded:
    seq = as_graded(seq)
    terms = []
    for P in enumerate_partitions(labels):
        if max_size is not None and any(len(X) > max_size for X in P):
            continue
        w = mobius_weight(P) if weighted else 1
        terms.append(_scale(block_product(seq, P.blocks, max_order), w))
    return graded_sum(terms)


def _finish(g: Graded, labels, dim, graded: bool):
    if graded:
        return g
    if not g:
        return LabeledOperator(labels, dim, np.zeros((dim ** len(labels),) * 2, dtype=complex))
    return total_of(g)


def cluster_compose(g, n: int, max_order: int | None = None, graded: bool = False):
    """D_n = sum over all partitions P of (1..n) of prod_{X in P} g_{|X|}(X)."""
    return _finish(_cluster_sum(g, canonical(n), False, max_order), canonical(n), g.dim, graded)


def cluster_invert(D, s: int, max_order: int | None = None, graded: bool = False):
    """g_s = sum_P (-1)^(|P|-1) (|P|-1)! prod_{X in P} D_{|X|}(X)."""
    return _finish(_cluster_sum(D, canonical(s), True, max_order), canonical(s), D.dim, graded)


def compose_sequence(g, n_max: int, max_order: int | None = None, graded: bool = False):
    return _map_sequence(cluster_compose, g, n_max, max_order, graded)


def invert_sequence(D, n_max: int, max_order: int | None = None, graded: bool = False):
    return _map_sequence(cluster_invert, D, n_max, max_order, graded)


def _map_sequence(fn, seq, n_max, max_order, graded):
    if graded:
        return GradedSequence(seq.dim, {n: fn(seq, n, max_order, graded=True) for n in range(1, n_max + 1)})
    return OperatorSequence(seq.dim, {n: fn(seq, n, max_order) for n in range(1, n_max + 1)})


def group_cumulant(
    model: ModelSpec,
    clusters: Sequence[Sequence[int]],
    t: float,
    operand: LabeledOperator,
    blocks: Sequence[Sequence[int]] | None = None,
) -> LabeledOperator:
    """Cumulant of groups A_k(t, {X_1}, ..., {X_k}) applied to ``operand``.

    Sum over partitions P' of the clusters of (-1)^(|P'|-1)(|P'|-1)! times
    the product of the groups of the declusterized blocks. ``blocks``
    switches off interactions between different blocks (decoupled groups).
    """
    clusters = [tuple(sorted(c)) for c in clusters]
    support = declusterize(clusters)
    if not set(support) <= set(operand.labels):
        raise DomainError(f"operand labels {operand.labels} do not cover clusters {clusters}")
    acc = np.zeros_like(operand.matrix)
    f = operand.matrix
    for P in enumerate_partitions(range(len(clusters))):
        U = None
        for Z in P:
            Uz = model.group_unitary(declusterize(clusters[i] for i in Z), operand.labels, t, blocks)
            U = Uz if U is None else U @ Uz
        acc = acc + mobius_weight(P) * (U @ f @ U.conj().T)
    return LabeledOperator(operand.labels, operand.dim, acc)


def nonlinear_group(
    model: ModelSpec,
    g0,
    t: float,
    s: int,
    max_order: int | None = None,
    graded: bool = False,
    blocks: Sequence[Sequence[int]] | None = None,
):
    """g_s(t) = sum_P A_|P|(t, {X_1}, ..., {X_|P|}) prod_j g0_{|X_j|}(X_j).

    With ``blocks`` the groups are those of the dynamics decoupled between
    blocks; this realizes the compositions of nonlinear groups of
    noninteracting particle groups.
    """
    g0 = as_graded(g0)
    labels = canonical(s)
    terms = []
    for P in enumerate_partitions(labels):
        prod = block_product(g0, P.blocks, max_order)
        if not prod:
            continue
        terms.append({k: group_cumulant(model, P.blocks, t, op, blocks) for k, op in prod.items()})
    return _finish(graded_sum(terms), labels, g0.dim, graded)


def vn_hierarchy_rhs(model: ModelSpec, g, s: int, max_order: int | None = None, graded: bool = False):
    """N*_s g_s + sum over two-block splits of sum_{i1 in X1, i2 in X2} N_int(i1,i2) g(X1) g(X2)."""
    gg = as_graded(g)
    labels = canonical(s)
    terms = [{k: subsystem_generator(model, op, labels) for k, op in gg.orders(s).items()
              if max_order is None or k <= max_order}]
    if s >= 2:
        for X1, X2 in enumerate_two_block(labels):
            prod = block_product(gg, (X1, X2), max_order)
            for k, op in prod.items():
                acc = None
                for i1 in X1:
                    for i2 in X2:
                        term = interaction(model, op, i1, i2)
                        acc = term if acc is None else acc + term
                terms.append({k: acc})
    return _finish(graded_sum(terms), labels, gg.dim, graded)
