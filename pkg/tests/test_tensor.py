import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hierarchia.errors import CapacityError, DomainError
from hierarchia.instances import random_density, random_hermitian
from hierarchia.tensor import (
    LabeledOperator,
    embed,
    identity,
    partial_trace,
    permutation_matrix,
    product,
    tensor,
    trace_norm,
    validate_state,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)


def rand_op(rng, labels, d=2):
    side = d ** len(labels)
    return LabeledOperator(labels, d, rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side)))


def test_embed_identity():
    out = embed(identity((1,), 2), (1, 2))
    assert np.array_equal(out.matrix, np.eye(4))


def test_embed_second_factor_matches_kron():
    out = embed(LabeledOperator((2,), 2, X), (1, 2))
    assert np.array_equal(out.matrix, np.kron(np.eye(2), X))


def test_embed_trace_scales():
    A = rand_op(np.random.default_rng(0), (1,))
    assert np.isclose(embed(A, (1, 2, 3)).trace(), 4 * A.trace())


def test_embed_rejects_missing_label():
    with pytest.raises(DomainError):
        embed(identity((4,), 2), (1, 2))


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    A, B = rand_op(rng, (1,)), rand_op(rng, (2,))
    out = partial_trace(tensor(A, B), (2,))
    assert np.allclose(out.matrix, A.matrix * B.trace())


def test_partial_trace_everything_is_trace():
    A = rand_op(np.random.default_rng(2), (1, 2))
    out = partial_trace(A, (1, 2))
    assert out.labels == () and np.isclose(out.matrix[0, 0], A.trace())


def test_partial_trace_matches_block_sum():
    rho = LabeledOperator((1, 2), 2, random_density(np.random.default_rng(3), 4))
    m = rho.matrix
    # tracing particle 2: sum the diagonal of each 2x2 block
    expect = np.array([[m[2 * i, 2 * j] + m[2 * i + 1, 2 * j + 1] for j in range(2)] for i in range(2)])
    assert np.allclose(partial_trace(rho, (2,)).matrix, expect)
    # tracing particle 1: sum of the diagonal blocks
    assert np.allclose(partial_trace(rho, (1,)).matrix, m[:2, :2] + m[2:, 2:])


def test_partial_trace_unknown_label():
    with pytest.raises(DomainError):
        partial_trace(identity((1, 2), 2), (3,))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), nA=st.integers(1, 2), extra=st.integers(0, 1))
def test_embed_partial_trace_adjoint(seed, nA, extra):
    rng = np.random.default_rng(seed)
    Y = tuple(range(1, nA + extra + 2))
    labels_A = tuple(sorted(rng.choice(Y, nA, replace=False).tolist()))
    A, B = rand_op(rng, labels_A), rand_op(rng, Y)
    lhs = np.trace(embed(A, Y).matrix @ B.matrix)
    rest = [y for y in Y if y not in labels_A]
    rhs = np.trace(A.matrix @ partial_trace(B, rest).matrix)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_partial_trace_of_embed(seed):
    rng = np.random.default_rng(seed)
    A = rand_op(rng, (2,))
    out = partial_trace(embed(A, (1, 2, 3)), (1, 3))
    assert np.max(np.abs(out.matrix - 4 * A.matrix)) < 1e-13


def test_canonicalization_is_order_independent():
    rng = np.random.default_rng(4)
    A, B, C = rand_op(rng, (1,)), rand_op(rng, (2,)), rand_op(rng, (3,))
    assert np.allclose(tensor(A, B, C).matrix, tensor(C, A, B).matrix)
    assert tensor(C, A, B).labels == (1, 2, 3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_permutation_round_trip(seed):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(3).tolist()
    P = permutation_matrix(perm, 2)
    M = rng.standard_normal((8, 8))
    assert np.allclose(P.conj().T @ (P @ M @ P.conj().T) @ P, M)


def test_permutation_matrix_moves_factors():
    rng = np.random.default_rng(5)
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    P = permutation_matrix([2, 0, 1], 2)
    assert np.allclose(P @ np.kron(np.kron(a, b), c) @ P.T, np.kron(np.kron(b, c), a))


def test_product_embeds_factors():
    rng = np.random.default_rng(6)
    A, B = rand_op(rng, (1,)), rand_op(rng, (2,))
    assert np.allclose(product(A, B).matrix, np.kron(A.matrix, B.matrix))


def test_trace_norm_examples():
    assert trace_norm(identity((1,), 2)) == pytest.approx(2.0)
    assert trace_norm(LabeledOperator((1,), 2, np.diag([1.0, -1.0]))) == pytest.approx(2.0)
    H = random_hermitian(np.random.default_rng(7), 4)
    assert trace_norm(H) == pytest.approx(np.abs(np.linalg.eigvalsh(H)).sum())


def test_validate_state():
    assert validate_state(LabeledOperator((1,), 2, np.eye(2) / 2)) == []
    bad = validate_state(LabeledOperator((1,), 2, np.diag([1.0, -0.1])))
    assert len(bad) == 1 and "positive" in bad[0]
    rho = random_density(np.random.default_rng(8), 4)
    H = random_hermitian(np.random.default_rng(9), 4)
    lam, V = np.linalg.eigh(H)
    U = (V * np.exp(-1.3j * lam)) @ V.conj().T
    assert validate_state(LabeledOperator((1, 2), 2, U @ rho @ U.conj().T)) == []


def test_constructor_checks():
    with pytest.raises(DomainError):
        LabeledOperator((1, 1), 2, np.eye(4))
    with pytest.raises(DomainError):
        LabeledOperator((1,), 2, np.eye(3))
    with pytest.raises(CapacityError):
        LabeledOperator(tuple(range(1, 14)), 2, np.zeros((1, 1)))
