"""Labeled operators on tensor products of identical d-level particles.

Index convention: labels sorted ascending map to tensor factors left to
right, row-major mixed-radix encoding (the same layout as ``np.kron``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError

MAX_SIDE = 4096


def _check_labels(labels: Sequence[int]) -> None:
    if len(set(labels)) != len(labels):
        raise DomainError(f"labels must be distinct, got {tuple(labels)}")
    if any(int(lab) < 1 for lab in labels):
        raise DomainError(f"labels must be positive integers, got {tuple(labels)}")


def _permute_factors(matrix: np.ndarray, dim: int, perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor k is old factor perm[k]."""
    k = len(perm)
    if k <= 1 or list(perm) == list(range(k)):
        return matrix
    t = matrix.reshape((dim,) * (2 * k))
    axes = list(perm) + [k + p for p in perm]
    return t.transpose(axes).reshape(dim**k, dim**k)


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """A complex matrix acting on the particles named by ``labels``."""

    labels: tuple[int, ...]
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        labels = tuple(int(lab) for lab in self.labels)
        _check_labels(labels)
        if self.dim < 2:
            raise DomainError(f"single-particle dimension must be >= 2, got {self.dim}")
        side = self.dim ** len(labels)
        if side > MAX_SIDE:
            raise CapacityError(f"matrix side {side} exceeds {MAX_SIDE}")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (side, side):
            raise DomainError(f"matrix shape {m.shape} does not match {len(labels)} particles of dim {self.dim}")
        order = sorted(range(len(labels)), key=labels.__getitem__)
        m = _permute_factors(m, self.dim, order)
        m.setflags(write=False)
        object.__setattr__(self, "labels", tuple(labels[i] for i in order))
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return len(self.labels)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def dagger(self) -> LabeledOperator:
        return LabeledOperator(self.labels, self.dim, self.matrix.conj().T)

    def relabel(self, labels: Sequence[int]) -> LabeledOperator:
        """Place this operator positionally on new labels.

        The i-th current label (ascending) becomes ``labels[i]``; e.g. g2 on
        (1, 2) relabeled to (1, 3) is g2(1, 3).
        """
        if len(labels) != self.n:
            raise DomainError(f"need {self.n} labels, got {len(labels)}")
        return LabeledOperator(tuple(labels), self.dim, self.matrix)

    def scale(self, c: complex) -> LabeledOperator:
        return LabeledOperator(self.labels, self.dim, c * self.matrix)

    def _aligned(self, other: LabeledOperator) -> np.ndarray:
        if other.labels != self.labels or other.dim != self.dim:
            raise DomainError(f"label mismatch: {self.labels} vs {other.labels}")
        return other.matrix

    def __add__(self, other: LabeledOperator) -> LabeledOperator:
        return LabeledOperator(self.labels, self.dim, self.matrix + self._aligned(other))

    def __sub__(self, other: LabeledOperator) -> LabeledOperator:
        return LabeledOperator(self.labels, self.dim, self.matrix - self._aligned(other))

    def __neg__(self) -> LabeledOperator:
        return self.scale(-1.0)

    def __rmul__(self, c) -> LabeledOperator:
        return self.scale(c)

    def __matmul__(self, other: LabeledOperator) -> LabeledOperator:
        return LabeledOperator(self.labels, self.dim, self.matrix @ self._aligned(other))

    def __repr__(self) -> str:
        return f"LabeledOperator(labels={self.labels}, dim={self.dim})"


def identity(labels: Sequence[int], dim: int) -> LabeledOperator:
    return LabeledOperator(tuple(labels), dim, np.eye(dim ** len(labels), dtype=complex))


def zeros(labels: Sequence[int], dim: int) -> LabeledOperator:
    side = dim ** len(labels)
    return LabeledOperator(tuple(labels), dim, np.zeros((side, side), dtype=complex))


def scalar(value: complex, dim: int) -> LabeledOperator:
    """Operator on the empty label set (a 1x1 matrix)."""
    return LabeledOperator((), dim, np.array([[value]], dtype=complex))


def tensor(*ops: LabeledOperator) -> LabeledOperator:
    """Product of operators on pairwise disjoint label sets."""
    if not ops:
        raise DomainError("tensor needs at least one factor")
    dim = ops[0].dim
    labels: list[int] = []
    m = np.ones((1, 1), dtype=complex)
    for op in ops:
        if op.dim != dim:
            raise DomainError("tensor factors must share the single-particle dimension")
        labels.extend(op.labels)
        m = np.kron(m, op.matrix)
    return LabeledOperator(tuple(labels), dim, m)


def embed(op: LabeledOperator, target_labels: Iterable[int]) -> LabeledOperator:
    """Extend ``op`` by the identity on ``target_labels`` minus its own labels."""
    target = tuple(sorted(set(int(t) for t in target_labels)))
    missing = set(op.labels) - set(target)
    if missing:
        raise DomainError(f"labels {sorted(missing)} not contained in target {target}")
    rest = [lab for lab in target if lab not in op.labels]
    if not rest:
        return op
    return tensor(op, identity(rest, op.dim))


def partial_trace(op: LabeledOperator, traced_labels: Iterable[int]) -> LabeledOperator:
    """Trace out ``traced_labels``; tracing everything leaves a 1x1 operator."""
    traced = set(int(t) for t in traced_labels)
    unknown = traced - set(op.labels)
    if unknown:
        raise DomainError(f"cannot trace unknown labels {sorted(unknown)} of {op.labels}")
    if not traced:
        return op
    k, d = op.n, op.dim
    keep = [i for i, lab in enumerate(op.labels) if lab not in traced]
    drop = [i for i, lab in enumerate(op.labels) if lab in traced]
    t = op.matrix.reshape((d,) * (2 * k))
    # bring traced axes to the end on both sides, then contract them pairwise
    t = t.transpose(keep + drop + [k + i for i in keep] + [k + i for i in drop])
    kk, dd = d ** len(keep), d ** len(drop)
    t = t.reshape(kk, dd, kk, dd)
    m = np.einsum("ajbj->ab", t)
    return LabeledOperator(tuple(op.labels[i] for i in keep), d, m)


def trace_over(op: LabeledOperator, keep: Iterable[int]) -> LabeledOperator:
    """Trace out every label not in ``keep``."""
    keep = set(keep)
    return partial_trace(op, [lab for lab in op.labels if lab not in keep])


def product(*ops: LabeledOperator) -> LabeledOperator:
    """Operator product after embedding every factor into the union of labels."""
    labels = sorted(set().union(*(op.labels for op in ops)))
    out = embed(ops[0], labels).matrix
    for op in ops[1:]:
        out = out @ embed(op, labels).matrix
    return LabeledOperator(tuple(labels), ops[0].dim, out)


def trace_norm(op: LabeledOperator | np.ndarray) -> float:
    m = op.matrix if isinstance(op, LabeledOperator) else np.asarray(op)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def max_abs_diff(a: LabeledOperator, b: LabeledOperator) -> float:
    if a.labels != b.labels:
        raise DomainError(f"label mismatch: {a.labels} vs {b.labels}")
    return float(np.max(np.abs(a.matrix - b.matrix)))


def validate_state(op: LabeledOperator, tol: float = 1e-10) -> list[str]:
    """Return human-readable violations of self-adjointness and positivity."""
    violations = []
    m = op.matrix
    herm_err = float(np.max(np.abs(m - m.conj().T)))
    if herm_err > tol:
        violations.append(f"not self-adjoint: max |A - A^dagger| = {herm_err:.3e}")
    lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
    if lam_min < -tol:
        violations.append(f"not positive: minimum eigenvalue {lam_min:.3e}")
    return violations


def permutation_matrix(perm: Sequence[int], dim: int) -> np.ndarray:
    """Unitary P with P (A_0 x ... x A_{k-1}) P^dagger placing A_i at position perm[i]."""
    k = len(perm)
    inverse = [0] * k
    for i, p in enumerate(perm):
        inverse[p] = i
    t = np.eye(dim**k, dtype=complex).reshape((dim,) * (2 * k))
    # permute only the output (row) factors
    t = t.transpose(list(inverse) + list(range(k, 2 * k)))
    return t.reshape(dim**k, dim**k)
