"""Verification suites driven by an experiment configuration.

Every suite emits rows (suite, check, s, t, epsilon, value, tolerance,
passed). Identity checks report a max-abs discrepancy against an upper
tolerance; residual checks report the observed central-difference order
against a lower bound. Library errors become failed rows.
"""

from __future__ import annotations

import math
import os
from datetime import datetime, timezone

import numpy as np

from . import correlations as C
from . import kinetic as K
from . import reduced as R
from .config import ExperimentConfig
from .dynamics import mean_value, mean_value_reduced, propagate, reduce_observable
from .errors import HierarchiaError
from .instances import (
    random_hermitian_sequence,
    random_one_particle_state,
    random_state_sequence,
)
from .results import VERSION, ResultTable, config_hash
from .sequences import GradedSequence, OperatorSequence
from .tensor import embed, max_abs_diff

RUN_COLUMNS = ("suite", "check", "s", "t", "epsilon", "value", "tolerance", "passed")
ETAS = (1e-3, 5e-4)
NAN = float("nan")


def graded_diff(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    out = 0.0
    for k in keys:
        if k not in a or k not in b:
            other = a.get(k, b.get(k))
            out = max(out, float(np.max(np.abs(other.matrix))))
        else:
            out = max(out, max_abs_diff(a[k], b[k]))
    return out


def observed_order(residual, etas=ETAS) -> tuple[float, float]:
    """(order, coarse residual) from residual(eta) at the two step sizes."""
    e = [residual(eta) for eta in etas]
    if e[1] == 0.0 or e[0] == 0.0:
        return math.inf, e[0]
    return math.log(e[0] / e[1]) / math.log(etas[0] / etas[1]), e[0]


def central_difference(f, t: float, eta: float) -> dict:
    p, m = f(t + eta), f(t - eta)
    return {k: (p[k] - m[k]).scale(1.0 / (2 * eta)) for k in p}


class _Rows:
    def __init__(self, suite: str, epsilon: float):
        self.suite, self.epsilon = suite, epsilon
        self.rows: list[tuple] = []

    def identity(self, check, s, t, value, tol):
        self.rows.append((self.suite, check, s, float(t), self.epsilon, float(value), tol, bool(value < tol)))

    def order(self, check, s, t, order_and_err, tol):
        order, err = order_and_err
        # a residual already at roundoff has no measurable order
        ok = order >= tol or err < 1e-12
        self.rows.append((self.suite, check, s, float(t), self.epsilon, float(order), tol, bool(ok)))

    def report(self, check, s, t, value, passed=True, epsilon=None):
        eps = self.epsilon if epsilon is None else epsilon
        self.rows.append((self.suite, check, s, float(t), eps, float(value), NAN, bool(passed)))

    def guard(self, check, s, t, fn):
        try:
            fn()
        except (HierarchiaError, FloatingPointError, ValueError) as exc:
            self.rows.append((self.suite, f"{check}:error:{type(exc).__name__}", s, float(t), self.epsilon, NAN, NAN, False))


def _state(cfg: ExperimentConfig, offset: int) -> OperatorSequence:
    m = cfg.model
    return random_state_sequence(cfg.seed * 1009 + offset, m.d, m.n_max)


def suite_roundtrip(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances["roundtrip"]
    n = m.n_max

    def run():
        g = random_hermitian_sequence(cfg.seed * 1009 + 1, m.d, n)
        D = C.compose_sequence(g, n, n)
        back = C.invert_sequence(D, n, n)
        rows.identity("invert-compose", n, 0.0, max(max_abs_diff(back[k], g[k]) for k in range(1, n + 1)), tol)
        D2 = C.compose_sequence(C.invert_sequence(g, n, n), n, n)
        rows.identity("compose-invert", n, 0.0, max(max_abs_diff(D2[k], g[k]) for k in range(1, n + 1)), tol)
        G = OperatorSequence(m.d, {s: R.reduced_corr_from_F(g, s, n) for s in range(1, n + 1)})
        F = OperatorSequence(m.d, {s: R.F_from_reduced_corr(G, s, n) for s in range(1, n + 1)})
        rows.identity("F-G-F", n, 0.0, max(max_abs_diff(F[k], g[k]) for k in range(1, n + 1)), tol)
    rows.guard("roundtrip", n, 0.0, run)


def suite_vn(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances
    n = m.n_max
    D0 = _state(cfg, 2)
    g0 = C.invert_sequence(D0, n, n, graded=True)
    for t in cfg.times:
        for s in range(1, min(3, n) + 1):
            def run():
                Dt = OperatorSequence(m.d, {k: propagate(m, op, t) for k, op in D0.entries.items()})
                ref = C.cluster_invert(GradedSequence.homogeneous(Dt), s, n, graded=True)
                got = C.nonlinear_group(m, g0, t, s, n, graded=True)
                rows.identity("nonlinear-group-vs-oracle", s, t, graded_diff(ref, got), tol["identity"])
                f = lambda tt: C.nonlinear_group(m, g0, tt, s, n, graded=True)  # noqa: E731
                seq = GradedSequence(m.d, {k: C.nonlinear_group(m, g0, t, k, n, graded=True) for k in range(1, s + 1)})
                res = lambda eta: graded_diff(central_difference(f, t, eta), C.vn_hierarchy_rhs(m, seq, s, n, graded=True))  # noqa: E731
                rows.order("vn-residual-order", s, t, observed_order(res), tol["order"])
            rows.guard("vn-hierarchy", s, t, run)


def suite_bbgky(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances
    n = m.n_max
    D0 = _state(cfg, 3)
    F0 = R.reduce_sequence(D0)
    g0 = C.invert_sequence(D0, n, n)

    def Ft(t):
        return R.reduce_sequence(OperatorSequence(m.d, {k: propagate(m, op, t) for k, op in D0.entries.items()}))

    for t in cfg.times:
        for s in range(1, min(2, n) + 1):
            def run():
                Dt = OperatorSequence(m.d, {k: propagate(m, op, t) for k, op in D0.entries.items()})
                by_trace = R.reduce_density(Dt, s)
                rows.identity("by-trace-vs-series", s, t, max_abs_diff(by_trace, R.reduced_series(m, F0, t, s)), tol["identity"])
                ref = R.reduce_density_graded(Dt, s, n)
                got = R.reduced_density_from_clusters(m, g0, t, s, n, graded=True)
                rows.identity("by-trace-vs-clusters", s, t, graded_diff(ref, got), tol["identity"])
                F = Ft(t)
                res = lambda eta: max_abs_diff((Ft(t + eta)[s] - Ft(t - eta)[s]).scale(0.5 / eta), R.bbgky_rhs(m, F, s))  # noqa: E731
                rows.order("bbgky-residual-order", s, t, observed_order(res), tol["order"])
            rows.guard("bbgky", s, t, run)


def suite_nonlinear_bbgky(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances
    n = m.n_max
    D0 = _state(cfg, 4)
    F0 = GradedSequence(m.d, {s: R.reduce_density_graded(D0, s, n) for s in range(1, n + 1)})
    G0 = GradedSequence(m.d, {s: R.reduced_corr_from_F(F0, s, n, graded=True) for s in range(1, n + 1)})

    def Gt(t):
        return GradedSequence(m.d, {s: R.reduced_corr_series(m, G0, t, s, n, graded=True) for s in range(1, n + 1)})

    for t in cfg.times:
        for s in range(1, min(2, n) + 1):
            def run():
                Dt = OperatorSequence(m.d, {k: propagate(m, op, t) for k, op in D0.entries.items()})
                Ft = GradedSequence(m.d, {k: R.reduce_density_graded(Dt, k, n) for k in range(1, n + 1)})
                ref = R.reduced_corr_from_F(Ft, s, n, graded=True)
                G = Gt(t)
                rows.identity("series-vs-cluster-of-F", s, t, graded_diff(ref, G.orders(s)), tol["identity"])
                f = lambda tt: Gt(tt).orders(s)  # noqa: E731
                res = lambda eta: graded_diff(central_difference(f, t, eta), R.nonlinear_bbgky_rhs(m, G, s, n, graded=True))  # noqa: E731
                rows.order("nonlinear-bbgky-residual-order", s, t, observed_order(res), tol["order"])
            rows.guard("nonlinear-bbgky", s, t, run)


def suite_gke(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances
    n = m.n_max
    g1 = random_one_particle_state(cfg.seed * 1009 + 5, m.d)
    for t in cfg.times:
        def run():
            G1 = K.one_particle_series(m, g1, t, graded=True)
            rows.identity("one-particle-vs-chaos-series", 1, t, graded_diff(G1, R.chaos_corr_series(m, g1, t, 1, graded=True)), tol["identity"])
            if n >= 2:
                G2 = R.chaos_corr_series(m, g1, t, 2, graded=True)
                f = lambda tt: K.one_particle_series(m, g1, tt, graded=True)  # noqa: E731
                res = lambda eta: graded_diff(central_difference(f, t, eta), K.gke_rhs_graded(m, G1, G2, n))  # noqa: E731
                rows.order("gke-residual-order", 1, t, observed_order(res), tol["order"])
            top = n - 2 if cfg.experimental_skrrc else min(n - 2, 2)
            for s in range(2, n + 1):
                order = min(n - s, top)
                if order < 0:
                    continue
                ref = R.chaos_corr_series(m, g1, t, s, s + order, graded=True)
                got = K.correlation_functional(m, G1, t, s, order, max_order=s + order, graded=True,
                                               experimental=cfg.experimental_skrrc)
                rows.identity(f"functional-vs-chaos-series-order{order}", s, t, graded_diff(ref, got), tol["identity"])
        rows.guard("gke", 1, t, run)


def suite_meanfield(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances
    mf = cfg.meanfield
    g1 = random_one_particle_state(cfg.seed * 1009 + 6, m.d)

    def run():
        table = K.mean_field_experiment(m, K.ScalingSchedule(mf.epsilons, mf.shift), g1, mf.t)
        for eps, t, e1, e2, decay, slope in table.rows:
            rows.report("err_g1_tracenorm", 1, t, e1, epsilon=eps)
            rows.report("err_g2_scaled", 2, t, e2, epsilon=eps)
            rows.report("cumulant_decay", 2, t, decay, epsilon=eps)
        e1 = table.column("err_g1_tracenorm")
        e2 = table.column("err_g2_scaled")
        rows.report("g1-error-decreasing", 1, mf.t, float(all(b < a for a, b in zip(e1, e1[1:]))),
                    all(b < a for a, b in zip(e1, e1[1:])))
        rows.report("g2-scaled-decreasing", 2, mf.t, float(all(b < a for a, b in zip(e2, e2[1:]))),
                    all(b < a for a, b in zip(e2, e2[1:])))
        slope = table.rows[0][-1]
        rows.report("fitted-slope", 1, mf.t, slope, tol["slope_low"] <= slope <= tol["slope_high"])
    rows.guard("meanfield", 1, mf.t, run)


def suite_functional(cfg: ExperimentConfig, rows: _Rows):
    m, tol = cfg.model, cfg.tolerances
    n = m.n_max

    def run():
        worst = 0.0
        for k in range(5):
            D = random_state_sequence(cfg.seed * 1009 + 100 + k, m.d, n)
            A = random_hermitian_sequence(cfg.seed * 1009 + 200 + k, m.d, n)
            B = reduce_observable(A, n)
            F = R.reduce_sequence(D)
            worst = max(worst, abs(mean_value(A, D) - mean_value_reduced(B, F)))
        rows.identity("mean-value-two-routes", n, 0.0, worst, tol["identity"])
        if n >= 2:
            D = random_state_sequence(cfg.seed * 1009 + 300, m.d, n)
            a1 = random_hermitian_sequence(cfg.seed * 1009 + 301, m.d, 1)[1]
            F = R.reduce_sequence(D)
            G = OperatorSequence(m.d, {s: R.reduced_corr_from_F(F, s) for s in (1, 2)})
            rows.identity("dispersion-two-routes", 2, 0.0,
                          abs(R.dispersion(a1, G) - moment_dispersion(a1, D)), tol["identity"])
    rows.guard("functional-equality", n, 0.0, run)


def moment_dispersion(a1, D: OperatorSequence) -> float:
    """<(A - <A>)^2> for A = sum_i a1(i), from mean values over the full sequence."""
    A, A2 = {}, {}
    for n in D.entries:
        labels = tuple(range(1, n + 1))
        terms = [embed(a1.relabel((i,)), labels) for i in labels]
        total = terms[0]
        for op in terms[1:]:
            total = total + op
        A[n] = total
        A2[n] = total @ total
    first = mean_value(OperatorSequence(D.dim, A, 0.0), D)
    second = mean_value(OperatorSequence(D.dim, A2, 0.0), D)
    return second - first**2


SUITE_FUNCTIONS = {
    "roundtrip": suite_roundtrip,
    "vn-hierarchy": suite_vn,
    "bbgky": suite_bbgky,
    "nonlinear-bbgky": suite_nonlinear_bbgky,
    "gke": suite_gke,
    "meanfield": suite_meanfield,
    "functional-equality": suite_functional,
}


def _timestamp() -> str:
    # deterministic unless SOURCE_DATE_EPOCH says otherwise
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def run_suite(cfg: ExperimentConfig) -> tuple[ResultTable, int]:
    """Run the configured suites; returns the table and the exit code (0 pass, 1 fail)."""
    table = ResultTable(RUN_COLUMNS, metadata={
        "config_hash": config_hash(cfg.document),
        "timestamp": _timestamp(),
        "version": VERSION,
    })
    for name in sorted(set(cfg.suites), key=list(SUITE_FUNCTIONS).index):
        rows = _Rows(name, cfg.model.epsilon)
        SUITE_FUNCTIONS[name](cfg, rows)
        table.rows.extend(rows.rows)
    code = 0 if all(row[-1] for row in table.rows) else 1
    return table, code
