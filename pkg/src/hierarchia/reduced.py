"""Reduced density and reduced correlation operators and their hierarchies.

All series over the number n of traced particles are finite: they stop at
the support of the initial data or at ``max_order`` (total particle order,
see ``sequences``). Functions with ``graded=True`` return the terms split by
order as a dict ``{order: LabeledOperator}``.
"""

from __future__ import annotations

from math import factorial
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .correlations import (
    as_graded,
    block_product,
    cluster_compose,
    cluster_invert,
    group_cumulant,
    nonlinear_group,
    _finish,
)
from .dynamics import interaction, normalization, subsystem_generator
from .errors import DegenerateStateError, DomainError
from .model import ModelSpec
from .partitions import ClusterGround, declusterize, enumerate_partitions, enumerate_two_block, mobius_weight
from .quadrature import default_nodes, simplex_rule
from .sequences import GradedSequence, OperatorSequence, canonical, graded_sum
from .results import REDUCED_COLUMNS, ResultTable
from .tensor import LabeledOperator, max_abs_diff, tensor, trace_norm, trace_over

BY_TRACE = "by-trace"
BY_SERIES = "by-series"
BY_CLUSTER = "by-cluster-from-G"
PROVENANCES = (BY_TRACE, BY_SERIES, BY_CLUSTER)


@dataclass(frozen=True)
class ReducedState:
    """Reduced density operators F with the route that produced them."""

    F: OperatorSequence
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class ReducedCorrelation:
    """Reduced correlation operators G (vacuum component 1) with their route."""

    G: OperatorSequence
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")


def route_row(s: int, t: float, route_a: str, route_b: str, a: LabeledOperator, b: LabeledOperator) -> tuple:
    """A row for a table with columns REDUCED_COLUMNS comparing two routes."""
    return (s, float(t), route_a, route_b, max_abs_diff(a, b), trace_norm(a - b))


def route_table(rows) -> ResultTable:
    return ResultTable(REDUCED_COLUMNS, list(rows))


def _max_entry(seq) -> int:
    if isinstance(seq, GradedSequence):
        return max((s for s, c in seq.entries.items() if c), default=0)
    return max(seq.entries, default=0)


def _tail_trace(op: LabeledOperator, s: int) -> LabeledOperator:
    return trace_over(op, canonical(s))


# ---------------------------------------------------------------- by trace


def reduce_density(D: OperatorSequence, s: int) -> LabeledOperator:
    """F_s = (I,D)^-1 sum_n Tr_{s+1..s+n} D_{s+n} / n!."""
    norm = normalization(D)
    if abs(norm) < 1e-300:
        raise DegenerateStateError("normalization factor (I, D) vanishes")
    acc = None
    for n in range(0, _max_entry(D) - s + 1):
        Dn = D.get(s + n)
        if Dn is None:
            continue
        term = _tail_trace(Dn, s).scale(1.0 / factorial(n))
        acc = term if acc is None else acc + term
    if acc is None:
        return LabeledOperator(canonical(s), D.dim, np.zeros((D.dim**s,) * 2, dtype=complex))
    return acc.scale(1.0 / norm)


def reduce_sequence(D: OperatorSequence, s_max: int | None = None) -> OperatorSequence:
    s_max = _max_entry(D) if s_max is None else s_max
    return OperatorSequence(D.dim, {s: reduce_density(D, s) for s in range(1, s_max + 1)}, 1.0)


def reduce_density_graded(D: OperatorSequence, s: int, max_order: int) -> dict[int, LabeledOperator]:
    """Order components of F_s when every D_n carries order n.

    The division by (I, D) is done as a power series: with a_n the traced
    numerator terms and b_n = Tr D_n / n!, q_n = (a_n - sum_k b_k q_{n-k}) / b_0.
    Component s + n is q_n.
    """
    b = [complex(D.scalar_0)] + [
        (D.get(n).trace() / factorial(n) if D.get(n) is not None else 0.0) for n in range(1, max_order + 1)
    ]
    if abs(b[0]) < 1e-300:
        raise DegenerateStateError("vacuum component of D vanishes")
    q: list[LabeledOperator] = []
    for n in range(0, max_order - s + 1):
        Dn = D.get(s + n)
        a = _tail_trace(Dn, s).scale(1.0 / factorial(n)) if Dn is not None else None
        acc = a.matrix.copy() if a is not None else np.zeros((D.dim**s,) * 2, dtype=complex)
        for k in range(1, n + 1):
            acc = acc - b[k] * q[n - k].matrix
        q.append(LabeledOperator(canonical(s), D.dim, acc / b[0]))
    return {s + n: op for n, op in enumerate(q)}


# ---------------------------------------------------------------- by series


def _cluster_elements(s: int, n: int) -> list[tuple[int, ...]]:
    return ClusterGround(canonical(s), tuple(range(s + 1, s + n + 1))).elements


def reduced_series(model: ModelSpec, F0, t: float, s: int, max_order: int | None = None, graded: bool = False):
    """F_s(t) = sum_n Tr_{s+1..s+n} A_{1+n}(t, {1..s}, s+1, ..., s+n) F0_{s+n} / n!."""
    F0g = as_graded(F0)
    top = _max_entry(F0g)
    if max_order is not None:
        top = min(top, max_order)
    terms = []
    for n in range(0, top - s + 1):
        comps = F0g.orders(s + n)
        elements = _cluster_elements(s, n)
        part = {}
        for k, op in comps.items():
            if max_order is not None and k > max_order:
                continue
            val = group_cumulant(model, elements, t, op)
            part[k] = _tail_trace(val, s).scale(1.0 / factorial(n))
        terms.append(part)
    return _finish(graded_sum(terms), canonical(s), F0g.dim, graded)


def bbgky_rhs(model: ModelSpec, F, s: int, max_order: int | None = None, graded: bool = False):
    """N*_s F_s + sum_{j<=s} Tr_{s+1} N_int(j, s+1) F_{s+1}."""
    Fg = as_graded(F)
    labels = canonical(s)
    terms = [{k: subsystem_generator(model, op, labels) for k, op in Fg.orders(s).items()
              if max_order is None or k <= max_order}]
    for k, op in Fg.orders(s + 1).items():
        if max_order is not None and k > max_order:
            continue
        acc = None
        for j in labels:
            term = interaction(model, op, j, s + 1)
            acc = term if acc is None else acc + term
        terms.append({k: _tail_trace(acc, s)})
    return _finish(graded_sum(terms), labels, Fg.dim, graded)


def _dyson_term(model: ModelSpec, operand: LabeledOperator, s: int, times, group, coupled: bool):
    """Apply group(s+n; t_n), then alternate interaction sums and groups.

    Reading the iterated product from the right: G_{s+n}(t_n) first, then
    sum_j N_int(j, s+n), then G_{s+n-1}(t_{n-1} - t_n), ..., G_s(t - t_1).
    ``times`` = (t, t_1, ..., t_n).
    """
    n = len(times) - 1
    op = group(operand, s + n, times[n])
    for k in range(n, 0, -1):
        acc = None
        for j in range(1, s + k):
            term = interaction(model, op, j, s + k, coupled=coupled)
            acc = term if acc is None else acc + term
        op = group(acc, s + k - 1, times[k - 1] - times[k])
    return op


def _interacting_group(model: ModelSpec):
    def group(op: LabeledOperator, m: int, tau: float) -> LabeledOperator:
        U = model.group_unitary(canonical(m), op.labels, tau)
        return LabeledOperator(op.labels, op.dim, U @ op.matrix @ U.conj().T)

    return group


def iterated_series(model, operand_for, t, s, order, nodes, group, coupled) -> LabeledOperator:
    """sum_{n<=order} of simplex integrals of Dyson terms, traced to 1..s."""
    acc = None
    for n in range(0, order + 1):
        operand = operand_for(s + n)
        if operand is None:
            continue
        pts, wts = simplex_rule(t, n, nodes or default_nodes(order))
        term = None
        for row, w in zip(pts, wts):
            val = _dyson_term(model, operand, s, (t, *row), group, coupled).scale(w)
            term = val if term is None else term + val
        term = _tail_trace(term, s)
        acc = term if acc is None else acc + term
    return acc


def perturbation_series(model: ModelSpec, F0: OperatorSequence, t: float, s: int, order: int, nodes: int | None = None):
    """Truncated iterated-integral (Dyson) series of the BBGKY hierarchy."""
    if order > 3:
        raise DomainError("perturbation series supports order <= 3")
    return iterated_series(model, F0.get, t, s, order, nodes, _interacting_group(model), True)


# ---------------------------------------------------- clusters of particles


def initial_cluster_correlation(g0, cluster: ClusterGround, max_order: int | None = None) -> dict:
    """g0_{1+k}({Y}, tail): sum over partitions of Y+tail whose blocks all meet Y."""
    g0 = as_graded(g0)
    head = set(cluster.head)
    terms = []
    for P in enumerate_partitions(cluster.labels):
        if all(head & set(X) for X in P):
            terms.append(block_product(g0, P.blocks, max_order))
    return graded_sum(terms)


def cluster_particle_correlations(
    model: ModelSpec,
    g0,
    t: float,
    cluster: ClusterGround,
    max_order: int | None = None,
    graded: bool = False,
    time_sign: int = 1,
):
    """Correlation operator g_{1+n}(t, {Y}, tail) of the cluster Y with the tail.

    sum over partitions P of the cluster ground of A_|P|(t, {theta(X)}...)
    applied to the product of initial correlations, where the block holding
    the cluster carries the initial cluster correlation. ``time_sign=-1``
    evaluates the cumulants at -t.
    """
    g0 = as_graded(g0)
    labels = cluster.labels
    terms = []
    for P in enumerate_partitions(cluster.elements):
        flat = [declusterize(X) for X in P]
        factors = []
        for X, theta in zip(P, flat):
            if tuple(cluster.head) in X:
                tail_part = tuple(e[0] for e in X if e != tuple(cluster.head))
                comps = initial_cluster_correlation(g0, ClusterGround(tuple(cluster.head), tail_part), max_order)
                factors.append({k: op for k, op in comps.items()})
            else:
                factors.append({k: op.relabel(theta) for k, op in g0.orders(len(theta)).items()})
        prod = _graded_tensor(factors, max_order)
        terms.append({k: group_cumulant(model, flat, time_sign * t, op) for k, op in prod.items()})
    return _finish(graded_sum(terms), labels, g0.dim, graded)


def _graded_tensor(factors: Sequence[dict], max_order: int | None) -> dict:
    out = {0: None}
    for f in factors:
        nxt = {}
        for k1, a in out.items():
            for k2, b in f.items():
                k = k1 + k2
                if max_order is not None and k > max_order:
                    continue
                op = b if a is None else tensor(a, b)
                nxt[k] = op if k not in nxt else nxt[k] + op
        out = nxt
    return {k: v for k, v in out.items() if v is not None}


def reduced_density_from_clusters(
    model: ModelSpec, g0, t: float, s: int, max_order: int, graded: bool = False, time_sign: int = 1
):
    """F_s(t) = sum_{n} Tr_{s+1..s+n} g_{1+n}(t, {1..s}, s+1..s+n) / n!, orders <= max_order."""
    terms = []
    for n in range(0, max_order - s + 1):
        cluster = ClusterGround(canonical(s), tuple(range(s + 1, s + n + 1)))
        comps = cluster_particle_correlations(model, g0, t, cluster, max_order, graded=True, time_sign=time_sign)
        terms.append({k: _tail_trace(op, s).scale(1.0 / factorial(n)) for k, op in comps.items()})
    return _finish(graded_sum(terms), canonical(s), as_graded(g0).dim, graded)


# --------------------------------------------------- reduced correlations


def reduced_corr_from_F(F, s: int, max_order: int | None = None, graded: bool = False):
    """G_s = sum_P (-1)^(|P|-1) (|P|-1)! prod F_{|X|}(X)."""
    return cluster_invert(F, s, max_order, graded)


def F_from_reduced_corr(G, s: int, max_order: int | None = None, graded: bool = False):
    """F_s = sum_P prod G_{|X|}(X)."""
    return cluster_compose(G, s, max_order, graded)


def reduced_corr_from_correlations(g, s: int, max_order: int, graded: bool = False):
    """G_s = sum_n Tr_{s+1..s+n} g_{s+n} / n! for orders <= max_order."""
    gg = as_graded(g)
    terms = []
    for n in range(0, max_order - s + 1):
        terms.append({k: _tail_trace(op, s).scale(1.0 / factorial(n))
                      for k, op in gg.orders(s + n).items() if k <= max_order})
    return _finish(graded_sum(terms), canonical(s), gg.dim, graded)


def nonlinear_cumulant(model: ModelSpec, G0, t: float, s: int, n: int, max_order: int | None = None, graded: bool = False):
    """A_{1+n}(t; {1..s}, s+1, ..., s+n | G(0)).

    Moebius sum over partitions P of the cluster ground of the nonlinear
    group with interactions between the declusterized blocks of P switched
    off (the composition of groups of noninteracting particle groups).
    """
    G0 = as_graded(G0)
    terms = []
    for P in enumerate_partitions(_cluster_elements(s, n)):
        blocks = [declusterize(X) for X in P]
        val = nonlinear_group(model, G0, t, s + n, max_order, graded=True, blocks=blocks)
        terms.append({k: op.scale(mobius_weight(P)) for k, op in val.items()})
    return _finish(graded_sum(terms), canonical(s + n), G0.dim, graded)


def reduced_corr_series(model: ModelSpec, G0, t: float, s: int, max_order: int, graded: bool = False):
    """G_s(t) = sum_n Tr_{s+1..s+n} A_{1+n}(t; {1..s}, s+1..s+n | G(0)) / n!."""
    terms = []
    for n in range(0, max_order - s + 1):
        val = nonlinear_cumulant(model, G0, t, s, n, max_order, graded=True)
        terms.append({k: _tail_trace(op, s).scale(1.0 / factorial(n)) for k, op in val.items()})
    return _finish(graded_sum(terms), canonical(s), as_graded(G0).dim, graded)


def chaos_corr_series(model: ModelSpec, g1_0: LabeledOperator, t: float, s: int, max_order: int | None = None, graded: bool = False):
    """G_s(t) = sum_n Tr_{s+1..s+n} A_{s+n}(t; 1..s+n) prod_i G_1^0(i) / n!.

    Term n has order s+n; the series stops at ``max_order`` (default n_max).
    """
    max_order = model.n_max if max_order is None else max_order
    out = {}
    for n in range(0, max_order - s + 1):
        m = s + n
        operand = tensor(*(g1_0.relabel((i,)) for i in range(1, m + 1)))
        val = group_cumulant(model, [(i,) for i in range(1, m + 1)], t, operand)
        out[m] = _tail_trace(val, s).scale(1.0 / factorial(n))
    return _finish(out, canonical(s), g1_0.dim, graded)


def chaos_corr_sequence(model: ModelSpec, g1_0: LabeledOperator, t: float, s_max: int, max_order: int | None = None) -> GradedSequence:
    return GradedSequence(g1_0.dim, {s: chaos_corr_series(model, g1_0, t, s, max_order, graded=True)
                                     for s in range(1, s_max + 1)})


def nonlinear_bbgky_rhs(model: ModelSpec, G, s: int, max_order: int | None = None, graded: bool = False):
    """Right-hand side of the nonlinear BBGKY hierarchy for G_s.

    N*_s G_s + two-block interaction within 1..s + Tr_{s+1} of
    sum_{i<=s} N_int(i, s+1) (G_{s+1} + sum_{i in X1, s+1 in X2} G(X1) G(X2)).
    """
    Gg = as_graded(G)
    labels = canonical(s)
    ext = canonical(s + 1)
    ok = lambda k: max_order is None or k <= max_order  # noqa: E731
    terms = [{k: subsystem_generator(model, op, labels) for k, op in Gg.orders(s).items() if ok(k)}]
    if s >= 2:
        for X1, X2 in enumerate_two_block(labels):
            for k, op in block_product(Gg, (X1, X2), max_order).items():
                acc = None
                for i1 in X1:
                    for i2 in X2:
                        term = interaction(model, op, i1, i2)
                        acc = term if acc is None else acc + term
                terms.append({k: acc})
    splits = enumerate_two_block(ext)
    for i in labels:
        parts = [{k: op for k, op in Gg.orders(s + 1).items() if ok(k)}]
        for X1, X2 in splits:
            if s + 1 in X1:
                X1, X2 = X2, X1
            if i in X1:
                parts.append(block_product(Gg, (X1, X2), max_order))
        for k, op in graded_sum(parts).items():
            terms.append({k: _tail_trace(interaction(model, op, i, s + 1), s)})
    return _finish(graded_sum(terms), labels, Gg.dim, graded)


def dispersion(a1: LabeledOperator, G, form: str = "exact") -> float:
    """Dispersion of the additive observable sum_i a1(i) from G_1 and G_2.

    ``exact``: Tr a1^2 G_1 + Tr a1(1) a1(2) G_2, which equals <(A - <A>)^2>.
    ``printed``: Tr (a1^2 - <A>^2) G_1 + Tr a1(1) a1(2) G_2; it differs from
    the exact value by <A>^2 Tr G_1.
    """
    G1, G2 = G[1], G[2]
    a = a1.relabel((1,)).matrix
    mean = np.trace(a @ G1.matrix)
    aa = np.kron(a, a)
    two = np.trace(aa @ G2.matrix)
    if form == "exact":
        val = np.trace(a @ a @ G1.matrix) + two
    elif form == "printed":
        val = np.trace(a @ a @ G1.matrix) - mean**2 * np.trace(G1.matrix) + two
    else:
        raise DomainError(f"unknown dispersion form {form!r}")
    return float(np.real(val))
