"""Finitely supported operator sequences indexed by particle number.

Every series in this package is a power series in the number of particles
carried by the initial data: an n-particle initial operator is a term of
order n. ``GradedSequence`` keeps those orders apart, which is what makes
truncated nonlinear identities exact order by order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError
from .tensor import LabeledOperator, zeros


def canonical(n: int) -> tuple[int, ...]:
    return tuple(range(1, n + 1))


@dataclass(frozen=True, eq=False)
class OperatorSequence:
    """(scalar_0, A_1(1), A_2(1,2), ...); missing entries are zero."""

    dim: int
    entries: Mapping[int, LabeledOperator] = field(default_factory=dict)
    scalar_0: complex = 1.0

    def __post_init__(self):
        entries = {}
        for n, op in dict(self.entries).items():
            if n < 1 or op.labels != canonical(n) or op.dim != self.dim:
                raise DomainError(f"entry {n} must live on labels 1..{n} with dim {self.dim}")
            entries[n] = op
        object.__setattr__(self, "entries", dict(sorted(entries.items())))

    @property
    def support_max(self) -> int:
        nonzero = [n for n, op in self.entries.items() if np.any(op.matrix != 0)]
        return max(nonzero, default=0)

    def __getitem__(self, n: int) -> LabeledOperator:
        if n in self.entries:
            return self.entries[n]
        return zeros(canonical(n), self.dim)

    def get(self, n: int) -> LabeledOperator | None:
        return self.entries.get(n)

    def on(self, n: int, labels: Iterable[int]) -> LabeledOperator:
        """Entry n placed on ``labels`` (sorted), e.g. g_2(X) for X = (1, 3)."""
        return self[n].relabel(tuple(sorted(labels)))

    def with_entry(self, n: int, op: LabeledOperator) -> OperatorSequence:
        e = dict(self.entries)
        e[n] = op
        return OperatorSequence(self.dim, e, self.scalar_0)

    def __len__(self) -> int:
        return self.support_max


@dataclass(frozen=True, eq=False)
class GradedSequence:
    """Sequence whose s-particle entry is split by order: entries[s][k]."""

    dim: int
    entries: Mapping[int, Mapping[int, LabeledOperator]] = field(default_factory=dict)

    def component(self, s: int, k: int) -> LabeledOperator | None:
        return self.entries.get(s, {}).get(k)

    def orders(self, s: int) -> dict[int, LabeledOperator]:
        return dict(self.entries.get(s, {}))

    def total(self, max_order: int | None = None) -> OperatorSequence:
        out = {}
        for s, comps in self.entries.items():
            acc = None
            for k, op in comps.items():
                if max_order is not None and k > max_order:
                    continue
                acc = op if acc is None else acc + op
            if acc is not None:
                out[s] = acc
        return OperatorSequence(self.dim, out)

    @classmethod
    def homogeneous(cls, seq: OperatorSequence) -> GradedSequence:
        """Grade a sequence of initial data: entry n has order n."""
        return cls(seq.dim, {n: {n: op} for n, op in seq.entries.items()})


def graded_sum(parts: Iterable[Mapping[int, LabeledOperator]]) -> dict[int, LabeledOperator]:
    out: dict[int, LabeledOperator] = {}
    for part in parts:
        for k, op in part.items():
            out[k] = op if k not in out else out[k] + op
    return out


def total_of(comps: Mapping[int, LabeledOperator], max_order: int | None = None) -> LabeledOperator:
    ops = [op for k, op in sorted(comps.items()) if max_order is None or k <= max_order]
    if not ops:
        raise DomainError("empty graded component")
    acc = ops[0]
    for op in ops[1:]:
        acc = acc + op
    return acc
