"""Set partitions, two-block splits, dissections and Moebius weights.

Partitions are generated as restricted growth strings (RGS) in
lexicographic order, so every enumeration is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Hashable, Iterator, Sequence

from .errors import CapacityError, DomainError

MAX_PARTITION_GROUND = 12
MAX_DISSECTION_GROUND = 8


@dataclass(frozen=True)
class Partition:
    """Blocks ordered by their first element; each block keeps ground order."""

    blocks: tuple[tuple, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def rgs(self, ground: Sequence | None = None) -> tuple[int, ...]:
        if ground is None:
            ground = sorted(x for b in self.blocks for x in b)
        where = {x: i for i, block in enumerate(self.blocks) for x in block}
        return tuple(where[x] for x in ground)


# a dissection is represented by the same block structure; see enumerate_dissections
Dissection = Partition


@dataclass(frozen=True)
class ClusterGround:
    """The set ({head...}, tail_1, ..., tail_n): the head counts as one element."""

    head: tuple[int, ...]
    tail: tuple[int, ...] = ()

    def __post_init__(self):
        if set(self.head) & set(self.tail):
            raise DomainError("cluster head and tail must be disjoint")
        if not self.head:
            raise DomainError("cluster head must be nonempty")

    @property
    def elements(self) -> tuple[tuple[int, ...], ...]:
        """Elements of the ground set, each as a tuple of particle labels."""
        return (tuple(self.head),) + tuple((t,) for t in self.tail)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(self.head + self.tail))


def declusterize(elements) -> tuple[int, ...]:
    """Flatten a collection of clusters into the sorted union of their labels."""
    return tuple(sorted(lab for cluster in elements for lab in cluster))


def _rgs_iter(n: int, max_blocks: int) -> Iterator[list[int]]:
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield list(a)
            return
        for v in range(min(used + 1, max_blocks)):
            a[i] = v
            yield from rec(i + 1, max(used, v + 1))

    a[0] = 0
    yield from rec(1, 1)


@lru_cache(maxsize=None)
def _partition_rgs(n: int, max_blocks: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(r) for r in _rgs_iter(n, max_blocks))


def _from_rgs(ground: Sequence, rgs: Sequence[int]) -> Partition:
    nblocks = max(rgs) + 1 if rgs else 0
    blocks: list[list] = [[] for _ in range(nblocks)]
    for x, b in zip(ground, rgs):
        blocks[b].append(x)
    return Partition(tuple(tuple(b) for b in blocks))


def enumerate_partitions(ground: Sequence[Hashable], max_blocks: int | None = None) -> list[Partition]:
    """All set partitions of ``ground`` (Bell(|ground|) of them), RGS order."""
    ground = tuple(ground)
    if len(set(ground)) != len(ground):
        raise DomainError("ground set elements must be distinct")
    if len(ground) > MAX_PARTITION_GROUND:
        raise CapacityError(f"ground set of size {len(ground)} exceeds {MAX_PARTITION_GROUND}")
    if not ground:
        return []
    cap = len(ground) if max_blocks is None else max_blocks
    return [_from_rgs(ground, r) for r in _partition_rgs(len(ground), cap)]


def enumerate_two_block(ground: Sequence[Hashable]) -> list[tuple[tuple, tuple]]:
    """Unordered splits into two nonempty blocks; X1 holds the first element."""
    ground = tuple(ground)
    if len(ground) < 2:
        raise DomainError("a two-block split needs at least two elements")
    return [p.blocks for p in enumerate_partitions(ground) if len(p) == 2]


def mobius_weight(p: Partition | int) -> int:
    """(-1)^(k-1) (k-1)! for a partition with k blocks."""
    k = p if isinstance(p, int) else len(p)
    return (-1) ** (k - 1) * factorial(k - 1)


DISSECTION_SEMANTICS = ("intervals", "partitions")


def enumerate_dissections(ground: Sequence[Hashable], max_blocks: int, semantics: str = "intervals") -> list[Dissection]:
    """Dissections of a linearly ordered set into at most ``max_blocks`` blocks.

    ``intervals``: cuts of the ordered ground set into consecutive runs
    (2^(n-1) of them without a cap). ``partitions``: any set partition with
    blocks keeping ground order. Both are listed in RGS order.
    """
    ground = tuple(ground)
    if semantics not in DISSECTION_SEMANTICS:
        raise DomainError(f"unknown dissection semantics {semantics!r}")
    if len(ground) > MAX_DISSECTION_GROUND:
        raise CapacityError(f"ground set of size {len(ground)} exceeds {MAX_DISSECTION_GROUND}")
    if max_blocks < 1:
        return []
    parts = enumerate_partitions(ground, max_blocks=max_blocks)
    if semantics == "partitions":
        return parts
    pos = {x: i for i, x in enumerate(ground)}
    return [P for P in parts if all(pos[b[-1]] - pos[b[0]] == len(b) - 1 for b in P)]


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]
