import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hierarchia.dynamics import (
    INVERSE,
    generator_apply,
    hamiltonian,
    mean_value,
    mean_value_reduced,
    propagate,
    reduce_observable,
)
from hierarchia.errors import CapacityError, DegenerateStateError, DomainError
from hierarchia.instances import random_density, random_hermitian_sequence, random_model, random_state_sequence
from hierarchia.model import ModelSpec, swap_matrix
from hierarchia.reduced import reduce_sequence
from hierarchia.sequences import OperatorSequence
from hierarchia.tensor import LabeledOperator, embed, identity, permutation_matrix, tensor, trace_norm, validate_state


def rho(seed, n, d=2):
    return LabeledOperator(tuple(range(1, n + 1)), d, random_density(np.random.default_rng(seed), d**n))


def test_model_validation():
    d = 2
    with pytest.raises(DomainError):
        ModelSpec(d, np.array([[0, 1], [0, 0]]), np.zeros((4, 4)))
    asym = np.zeros((4, 4))
    asym[0, 1] = asym[1, 0] = 1.0  # |00><01| + h.c. is not swap-symmetric
    with pytest.raises(DomainError, match="exchange"):
        ModelSpec(d, np.eye(2), asym)
    with pytest.raises(CapacityError):
        ModelSpec(d, np.eye(2), np.zeros((4, 4)), n_max=13)


def test_hamiltonian_symmetric_under_permutations(model):
    H = hamiltonian(model, 3).matrix
    assert np.max(np.abs(H - H.conj().T)) < 1e-12
    for perm in ([1, 0, 2], [2, 0, 1], [0, 2, 1]):
        P = permutation_matrix(perm, 2)
        assert np.max(np.abs(P @ H @ P.T - H)) < 1e-12


def test_swap_matrix_is_nontrivial():
    assert not np.allclose(swap_matrix(2), np.eye(4))


def test_propagate_zero_and_capacity(model):
    r = rho(0, 2)
    assert np.allclose(propagate(model, r, 0.0).matrix, r.matrix)
    with pytest.raises(CapacityError):
        propagate(model, rho(0, 5), 0.1)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**5), t=st.floats(-2, 2), s=st.floats(-2, 2))
def test_group_law_isometry_positivity(seed, t, s):
    model = random_model(seed % 7, n_max=3)
    r = rho(seed, 3)
    a = propagate(model, propagate(model, r, t), s)
    b = propagate(model, r, t + s)
    assert np.max(np.abs(a.matrix - b.matrix)) < 1e-10
    assert abs(trace_norm(b) - trace_norm(r)) < 1e-10
    assert validate_state(b) == []
    back = propagate(model, b, t + s, direction=INVERSE)
    assert np.max(np.abs(back.matrix - r.matrix)) < 1e-10


def test_unitarity(model):
    U = model.unitary_matrix(3, 0.8)
    assert np.max(np.abs(U.conj().T @ U - np.eye(8))) < 1e-10


def test_noninteracting_product_factorizes(model):
    m0 = model.with_epsilon(0.0)
    a, b = rho(1, 1), rho(2, 1).relabel((2,))
    out = propagate(m0, tensor(a, b), 0.7)
    expect = tensor(propagate(m0, a, 0.7), propagate(m0, b, 0.7, subset=(2,)))
    assert np.allclose(out.matrix, expect.matrix)


def test_generator_examples(model):
    assert np.allclose(generator_apply(model, identity((1, 2), 2)).matrix, 0)
    H = hamiltonian(model, 2).matrix
    lam, V = np.linalg.eigh(H)
    proj = LabeledOperator((1, 2), 2, np.outer(V[:, 0], V[:, 0].conj()))
    assert np.max(np.abs(generator_apply(model, proj).matrix)) < 1e-12
    r = rho(3, 2)
    for which in ("full", "free", ("interaction", 1, 2)):
        out = generator_apply(model, r, which)
        assert abs(out.trace()) < 1e-12
        assert np.allclose(out.matrix, out.matrix.conj().T)
    with pytest.raises(DomainError):
        generator_apply(model, r, ("interaction", 1, 3))


def test_generator_is_derivative(model):
    r = rho(4, 2)
    G = generator_apply(model, r).matrix
    errs = [np.max(np.abs((propagate(model, r, eta).matrix - r.matrix) / eta - G)) for eta in (1e-3, 5e-4)]
    assert 1.8 < errs[0] / errs[1] < 2.2


def test_mean_value_examples():
    d = 2
    r = rho(5, 1)
    A = OperatorSequence(d, {1: identity((1,), d)}, 0.0)
    assert mean_value(A, OperatorSequence(d, {1: r}, 0.0)) == pytest.approx(1.0)
    # fixed-N sequence reduces to the conventional normalized trace
    D3 = rho(6, 3).scale(2.5)
    A3 = random_hermitian_sequence(7, d, 3)
    D = OperatorSequence(d, {3: D3}, 0.0)
    expect = np.trace(A3[3].matrix @ D3.matrix).real / D3.trace().real
    assert mean_value(A3, D) == pytest.approx(expect)
    with pytest.raises(DegenerateStateError):
        mean_value(A3, OperatorSequence(d, {}, 0.0))


def test_reduce_observable_examples():
    d = 2
    a = random_hermitian_sequence(8, d, 1)[1]
    additive = OperatorSequence(d, {
        1: a,
        2: embed(a, (1, 2)) + embed(a.relabel((2,)), (1, 2)),
        3: sum((embed(a.relabel((i,)), (1, 2, 3)) for i in (2, 3)), embed(a, (1, 2, 3))),
    }, 0.0)
    B = reduce_observable(additive, 3)
    assert np.allclose(B[1].matrix, a.matrix)
    assert np.allclose(B[2].matrix, 0) and np.allclose(B[3].matrix, 0)
    assert B.scalar_0 == 0.0


def test_reduce_observable_of_identity_gives_one(state):
    d = 2
    A = OperatorSequence(d, {n: identity(tuple(range(1, n + 1)), d) for n in range(1, 5)}, 1.0)
    B = reduce_observable(A, 4)
    assert mean_value_reduced(B, reduce_sequence(state)) == pytest.approx(1.0, abs=1e-12)


def test_mean_value_reduced_unit_observable(state):
    assert mean_value_reduced(OperatorSequence(2, {}, 1.0), reduce_sequence(state)) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_functional_equality(seed):
    D = random_state_sequence(100 + seed, 2, 3)
    A = random_hermitian_sequence(200 + seed, 2, 3)
    a = mean_value(A, D)
    b = mean_value_reduced(reduce_observable(A, 3), reduce_sequence(D))
    assert abs(a - b) < 1e-10


def test_duality_of_groups(model):
    D = OperatorSequence(2, {2: rho(9, 2)}, 0.0)
    A = random_hermitian_sequence(10, 2, 2)
    Dt = OperatorSequence(2, {2: propagate(model, D[2], 0.6)}, 0.0)
    At = OperatorSequence(2, {2: propagate(model, A[2], 0.6, direction=INVERSE)}, 0.0)
    assert abs(mean_value(A, Dt) - mean_value(At, D)) < 1e-12
