"""Kinetic description by the one-particle correlation operator and the mean-field limit.

Series here are graded like everything else (see ``sequences``): the
one-particle initial operator carries order 1, so term n of a series for
an s-particle object has order s + n. ``max_order`` defaults to n_max.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import ceil, factorial
from typing import Callable, Sequence

import numpy as np

from .correlations import cluster_invert, group_cumulant
from .dynamics import interaction, propagate, subsystem_generator
from .errors import DivergenceError, DomainError
from .model import ModelSpec
from .partitions import enumerate_dissections
from .quadrature import default_nodes
from .reduced import chaos_corr_series, iterated_series
from .results import MEANFIELD_COLUMNS, ResultTable
from .sequences import OperatorSequence, canonical, total_of
from .tensor import LabeledOperator, partial_trace, tensor, trace_norm, trace_over

Transform = Callable[[LabeledOperator], LabeledOperator]

DIVERGENCE_NORM = 1e3


@dataclass(frozen=True)
class KineticState:
    g1: LabeledOperator
    t: float


@dataclass(frozen=True)
class ScalingSchedule:
    """Decreasing couplings; the initial data is (1/eps + shift) g1_0."""

    epsilons: tuple[float, ...]
    shift: float = 0.0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(e <= 0 for e in eps):
            raise DomainError("schedule epsilons must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("schedule epsilons must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)


def _product_state(g1: LabeledOperator, m: int) -> LabeledOperator:
    return tensor(*(g1.relabel((i,)) for i in range(1, m + 1)))


# ------------------------------------------------------- one-particle series


def one_particle_series(model: ModelSpec, g1_0: LabeledOperator, t: float,
                        max_order: int | None = None, graded: bool = False):
    """G_1(t) = sum_n Tr_{2..1+n} A_{1+n}(t) prod G_1^0(i) / n!.

    Computed as cumulants of evolved product states: A_m(t) prod g(i) is the
    m-th correlation of the sequence m -> U_m g^{(x)m} U_m^dagger.
    """
    max_order = model.n_max if max_order is None else max_order
    evolved = OperatorSequence(g1_0.dim, {
        m: propagate(model, _product_state(g1_0, m), t) for m in range(1, max_order + 1)
    })
    out = {}
    for m in range(1, max_order + 1):
        corr = cluster_invert(evolved, m, max_order)
        out[m] = trace_over(corr, (1,)).scale(1.0 / factorial(m - 1))
    return out if graded else total_of(out)


# ------------------------------------------------ scattering cumulants, V


def inverse_one_particle(model: ModelSpec, t: float, labels: Sequence[int]) -> Transform:
    """prod_i A_1^{-1}(t, i) = prod_i G*_1(-t, i)."""
    def apply(op: LabeledOperator) -> LabeledOperator:
        for i in labels:
            op = propagate(model, op, -t, subset=(i,))
        return op
    return apply


def scattering_cumulant(model: ModelSpec, t: float, clusters: Sequence[Sequence[int]]) -> Transform:
    """A_k(t, {X_1}, ..., {X_k}) followed by the inverse one-particle groups of all particles."""
    clusters = [tuple(c) for c in clusters]
    labels = sorted(x for c in clusters for x in c)
    inverse = inverse_one_particle(model, t, labels)

    def apply(op: LabeledOperator) -> LabeledOperator:
        return group_cumulant(model, clusters, t, inverse(op))
    return apply


def _singletons(labels) -> list[tuple[int]]:
    return [(i,) for i in labels]


def _compositions(n: int):
    """Ordered tuples of positive integers with sum <= n, the empty one included."""
    yield ()
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def _attachment(model: ModelSpec, t: float, targets: int, Z: Sequence[int]) -> Transform:
    """sum over dissections D of Z into <= targets blocks of (1/|D|!) times
    sum over distinct i_1..i_|D| <= targets of prod_X A^_{1+|X|}(t, i_X, X) / |X|!."""
    def apply(op: LabeledOperator) -> LabeledOperator:
        acc = None
        for D in enumerate_dissections(Z, targets):
            weight = 1.0 / factorial(len(D))
            for idx in permutations(range(1, targets + 1), len(D)):
                val = op
                w = weight
                for i, X in zip(idx, D):
                    w /= factorial(len(X))
                    val = scattering_cumulant(model, t, _singletons((i,) + tuple(X)))(val)
                val = val.scale(w)
                acc = val if acc is None else acc + val
        return acc
    return apply


def generating_operator_V(model: ModelSpec, t: float, s: int, n: int, experimental: bool = False) -> Transform:
    """Generating operator V_{s+n}(t, theta({1..s}), s+1, ..., s+n) as a transform.

    Alternating sum over ordered tuples (n_1, ..., n_k): the scattering
    cumulant of the first s+n-n_1-...-n_k particles applied after the
    attachments of the particle groups Z_1, ..., Z_k (Z_1 is applied first).
    Orders n <= 2 are validated; n >= 3 needs ``experimental``.
    """
    if n < 0 or s < 1:
        raise DomainError("need s >= 1 and n >= 0")
    if n >= 3 and not experimental:
        raise DomainError("generating operators with n >= 3 are experimental")
    model.check_capacity(s + n)

    def apply(op: LabeledOperator) -> LabeledOperator:
        acc = None
        for comp in _compositions(n):
            rest = n - sum(comp)
            coef = (-1) ** len(comp) * factorial(n) / factorial(rest)
            val = op
            top = s + n
            for nj in comp:
                Z = tuple(range(top - nj + 1, top + 1))
                top -= nj
                val = _attachment(model, t, top, Z)(val)
            val = scattering_cumulant(model, t, _singletons(range(1, top + 1)))(val).scale(coef)
            acc = val if acc is None else acc + val
        return acc
    return apply


def correlation_functional(model: ModelSpec, g1_t, t: float, s: int, order: int,
                           max_order: int | None = None, graded: bool = False,
                           experimental: bool = False):
    """G_s(t | G_1(t)) = sum_{n<=order} Tr_{s+1..s+n} V_{s+n} prod G_1(t, i) / n!.

    ``g1_t`` is an operator or its order components {k: op}; products are
    truncated at ``max_order`` when given.
    """
    comps = g1_t if isinstance(g1_t, dict) else {1: g1_t}
    out: dict[int, LabeledOperator] = {}
    for n in range(0, order + 1):
        m = s + n
        V = generating_operator_V(model, t, s, n, experimental)
        for k, prod in _graded_power(comps, m, max_order).items():
            val = trace_over(V(prod), canonical(s)).scale(1.0 / factorial(n))
            out[k] = val if k not in out else out[k] + val
    if graded:
        return out
    return total_of(out)


def _graded_power(comps: dict, m: int, max_order: int | None) -> dict:
    out = {0: None}
    for i in range(1, m + 1):
        nxt = {}
        for k1, a in out.items():
            for k2, b in comps.items():
                k = k1 + k2
                if max_order is not None and k > max_order:
                    continue
                b = b.relabel((i,))
                op = b if a is None else tensor(a, b)
                nxt[k] = op if k not in nxt else nxt[k] + op
        out = nxt
    return out


# ---------------------------------------------------------- kinetic equations


def gke_rhs(model: ModelSpec, g1: LabeledOperator, g2: LabeledOperator) -> LabeledOperator:
    """N*(1)G_1 + Tr_2 N_int(1,2) G_1 G_1 + Tr_2 N_int(1,2) G_2."""
    g1 = g1.relabel((1,))
    pair = tensor(g1, g1.relabel((2,))) + g2.relabel((1, 2))
    return subsystem_generator(model, g1, (1,)) + partial_trace(interaction(model, pair, 1, 2), (2,))


def gke_rhs_graded(model: ModelSpec, g1: dict, g2: dict, max_order: int) -> dict:
    out = {k: subsystem_generator(model, op.relabel((1,)), (1,)) for k, op in g1.items() if k <= max_order}
    for k1, a in g1.items():
        for k2, b in g1.items():
            if k1 + k2 <= max_order:
                val = partial_trace(interaction(model, tensor(a.relabel((1,)), b.relabel((2,))), 1, 2), (2,))
                out[k1 + k2] = out[k1 + k2] + val if k1 + k2 in out else val
    for k, op in g2.items():
        if k <= max_order:
            val = partial_trace(interaction(model, op.relabel((1, 2)), 1, 2), (2,))
            out[k] = out[k] + val if k in out else val
    return out


def mean_field_potential(model: ModelSpec, g1: np.ndarray) -> np.ndarray:
    """Tr_2 phi(1,2) (I x g1), with the bare interaction."""
    d = model.d
    t = (model.phi @ np.kron(np.eye(d), g1)).reshape(d, d, d, d)
    return np.einsum("ajbj->ab", t)


def vlasov_rhs(model: ModelSpec, g1: LabeledOperator) -> LabeledOperator:
    """N*(1)g_1 + Tr_2 N_int(1,2) g_1(1) g_1(2) with the bare (unscaled) interaction."""
    g1 = g1.relabel((1,))
    pair = tensor(g1, g1.relabel((2,)))
    collision = partial_trace(interaction(model, pair, 1, 2, coupled=False), (2,))
    return subsystem_generator(model, g1, (1,)) + collision


def _vlasov_field(model: ModelSpec, g: np.ndarray) -> np.ndarray:
    A = model.h + mean_field_potential(model, g)
    return -1j * (A @ g - g @ A)


def _hartree_field(model: ModelSpec, psi: np.ndarray) -> np.ndarray:
    A = model.h + mean_field_potential(model, np.outer(psi, psi.conj()))
    return -1j * (A @ psi)


def _rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(f, y0, t_grid, dt, post=None):
    t_grid = [float(x) for x in t_grid]
    if dt <= 0:
        raise DomainError("dt must be positive")
    if any(b < a for a, b in zip(t_grid, t_grid[1:])) or (t_grid and t_grid[0] < 0):
        raise DomainError("t_grid must be nondecreasing and nonnegative")
    y, now, out = np.array(y0, dtype=complex), 0.0, []
    for target in t_grid:
        steps = ceil((target - now) / dt - 1e-12)
        if steps > 0:
            h = (target - now) / steps
            for _ in range(steps):
                y = _rk4_step(f, y, h)
                if post is not None:
                    y = post(y)
                if not np.all(np.isfinite(y)) or np.linalg.norm(y) > DIVERGENCE_NORM:
                    raise DivergenceError(f"integration diverged near t = {now:.4g}")
        now = target
        out.append(y.copy())
    return out


def integrate_vlasov(model: ModelSpec, g1_0: LabeledOperator, t_grid, dt: float = 1e-3) -> list[KineticState]:
    """Classical RK4 for the Vlasov equation; Hermitian part kept after every step."""
    ys = _integrate(lambda g: _vlasov_field(model, g), g1_0.matrix, t_grid, dt,
                    post=lambda g: 0.5 * (g + g.conj().T))
    return [KineticState(LabeledOperator((1,), model.d, y), t) for y, t in zip(ys, t_grid)]


def integrate_hartree(model: ModelSpec, psi0, t_grid, dt: float = 1e-3) -> list[np.ndarray]:
    """RK4 for i d/dt psi = (h + Tr_2 phi(1,2)|psi><psi|(2)) psi."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (model.d,):
        raise DomainError(f"psi0 must have length {model.d}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise DomainError("psi0 must be a unit vector")
    return _integrate(lambda p: _hartree_field(model, p), psi0, t_grid, dt)


def _free_group(model: ModelSpec):
    def group(op: LabeledOperator, m: int, tau: float) -> LabeledOperator:
        for i in range(1, m + 1):
            op = propagate(model, op, tau, subset=(i,))
        return op
    return group


def vlasov_series(model: ModelSpec, g1_0: LabeledOperator, t: float, order: int, nodes: int | None = None) -> LabeledOperator:
    """Iterated-integral mean-field series: free one-particle groups between
    bare collision insertions, n insertions acting on n+1 copies of g1_0."""
    if order > 3:
        raise DomainError("mean-field series supports order <= 3")
    return iterated_series(model, lambda m: _product_state(g1_0, m), t, 1, order,
                           nodes or default_nodes(order), _free_group(model), False)


# ------------------------------------------------------------- mean field


def _fit_slope(eps: Sequence[float], err: Sequence[float]) -> float:
    x, y = np.log(np.asarray(eps)), np.log(np.asarray(err))
    if not np.all(np.isfinite(y)):
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def scaled_cumulant_norm(model: ModelSpec, g1_0: LabeledOperator, t: float, s: int, n: int) -> float:
    """||A_{s+n}(t, 1, ..., s+n) prod g1_0(i)||_1 / eps^n for the model's coupling."""
    val = group_cumulant(model, _singletons(range(1, s + n + 1)), t, _product_state(g1_0, s + n))
    return trace_norm(val) / model.epsilon**n


def cumulant_decay(model: ModelSpec, g1_0: LabeledOperator, t: float) -> float:
    """||A_2(t, 1, 2) g1_0(1) g1_0(2)||_1 / eps, the reported cumulant column."""
    return scaled_cumulant_norm(model, g1_0, t, 1, 1)


def mean_field_experiment(model: ModelSpec, schedule: ScalingSchedule, g1_0: LabeledOperator,
                          t: float, limit: LabeledOperator | None = None) -> ResultTable:
    """Sweep the coupling with initial data (1/eps + shift) g1_0.

    The error of eps G_1(t) is measured against ``limit`` (default: the
    mean-field series of order n_max - 1, which is the eps -> 0 limit of the
    one-particle series truncated at n_max particles).
    """
    g1_0 = g1_0.relabel((1,))
    n_max = model.n_max
    if limit is None:
        limit = vlasov_series(model, g1_0, t, min(n_max - 1, 3))
    rows = []
    for eps in schedule.epsilons:
        m = model.with_epsilon(eps)
        G10 = g1_0.scale(1.0 / eps + schedule.shift)
        G1 = one_particle_series(m, G10, t, n_max)
        G2 = chaos_corr_series(m, G10, t, 2, n_max)
        rows.append((eps, float(t),
                     trace_norm(G1.scale(eps) - limit),
                     trace_norm(G2.scale(eps**2)),
                     cumulant_decay(m, g1_0, t)))
    slope = _fit_slope([r[0] for r in rows], [r[2] for r in rows])
    table = ResultTable(MEANFIELD_COLUMNS)
    for r in rows:
        table.append(*r, slope)
    return table
