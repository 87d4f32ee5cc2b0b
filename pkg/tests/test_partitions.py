from math import prod

import pytest
from hypothesis import given, settings, strategies as st

from hierarchia.errors import CapacityError, DomainError
from hierarchia.partitions import (
    ClusterGround,
    bell,
    declusterize,
    enumerate_dissections,
    enumerate_partitions,
    enumerate_two_block,
    mobius_weight,
)


def brute_partitions(items):
    """Independent recursive enumeration: insert the first item into every block."""
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for p in brute_partitions(rest):
        out.append([[first]] + p)
        for i in range(len(p)):
            out.append(p[:i] + [[first] + p[i]] + p[i + 1:])
    return out


def canon(p):
    return sorted(tuple(sorted(b)) for b in p)


@pytest.mark.parametrize("n, count", [(1, 1), (3, 5), (5, 52)])
def test_partition_counts(n, count):
    parts = enumerate_partitions(range(1, n + 1))
    assert len(parts) == count == bell(n)
    assert len({tuple(canon(p.blocks)) for p in parts}) == count


@pytest.mark.parametrize("n", range(1, 7))
def test_partitions_match_recursive_oracle(n):
    ours = sorted(tuple(canon(p.blocks)) for p in enumerate_partitions(range(1, n + 1)))
    ref = sorted(tuple(canon(p)) for p in brute_partitions(list(range(1, n + 1))))
    assert ours == ref


def test_partitions_are_rgs_ordered():
    rgs = [p.rgs() for p in enumerate_partitions(range(1, 5))]
    assert rgs == sorted(rgs) and rgs[0] == (0, 0, 0, 0)


def test_partition_ground_too_large():
    with pytest.raises(CapacityError):
        enumerate_partitions(range(13))


def test_two_block():
    assert enumerate_two_block((1, 2)) == [((1,), (2,))]
    assert len(enumerate_two_block((1, 2, 3))) == 3
    assert len(enumerate_two_block((1, 2, 3, 4))) == 7
    with pytest.raises(DomainError):
        enumerate_two_block((1,))


@pytest.mark.parametrize("n", range(2, 8))
def test_two_block_is_slice(n):
    ground = tuple(range(1, n + 1))
    assert len(enumerate_two_block(ground)) == 2 ** (n - 1) - 1
    assert enumerate_two_block(ground) == [p.blocks for p in enumerate_partitions(ground) if len(p) == 2]


def test_mobius_values():
    assert [mobius_weight(k) for k in (1, 2, 4)] == [1, -1, -6]


@pytest.mark.parametrize("n", range(1, 7))
def test_mobius_sum_is_delta(n):
    assert sum(mobius_weight(p) for p in enumerate_partitions(range(n))) == (1 if n == 1 else 0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 5), data=st.data())
def test_mobius_inversion_on_scalars(n, data):
    # g on subsets -> D by cluster sums -> back by Moebius weights
    ground = tuple(range(n))
    subsets = {tuple(b) for p in enumerate_partitions(ground) for b in p}
    g = {b: data.draw(st.integers(-5, 5)) for b in subsets}

    def D(block):
        return sum(prod(g[x] for x in p) for p in enumerate_partitions(block))

    back = sum(mobius_weight(p) * prod(D(b) for b in p) for p in enumerate_partitions(ground))
    assert back == g[ground]


def test_dissections_examples():
    assert [d.blocks for d in enumerate_dissections((1,), 3)] == [((1,),)]
    assert {d.blocks for d in enumerate_dissections((1, 2), 2)} == {((1, 2),), ((1,), (2,))}
    assert [d.blocks for d in enumerate_dissections((1, 2, 3), 1)] == [((1, 2, 3),)]


@pytest.mark.parametrize("n", range(1, 7))
def test_dissection_counts(n):
    ground = tuple(range(1, n + 1))
    assert len(enumerate_dissections(ground, n)) == 2 ** (n - 1)
    assert len(enumerate_dissections(ground, n, semantics="partitions")) == bell(n)
    for d in enumerate_dissections(ground, n):
        assert all(b == tuple(range(b[0], b[-1] + 1)) for b in d)


def test_dissection_cap_and_errors():
    assert all(len(d) <= 2 for d in enumerate_dissections(range(1, 6), 2))
    with pytest.raises(CapacityError):
        enumerate_dissections(range(9), 3)
    with pytest.raises(DomainError):
        enumerate_dissections((1, 2), 2, semantics="other")


def test_cluster_ground():
    c = ClusterGround((1, 2), (3, 4))
    assert c.elements == ((1, 2), (3,), (4,))
    assert declusterize(c.elements) == (1, 2, 3, 4)
    assert len(enumerate_partitions(c.elements)) == 5
    with pytest.raises(DomainError):
        ClusterGround((1,), (1,))


def test_bell_numbers():
    assert [bell(n) for n in range(7)] == [1, 1, 2, 5, 15, 52, 203]
