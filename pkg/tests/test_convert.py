import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hqmm.convert import (
    col_stochastic_to_unitary,
    complete_orthonormal,
    hmm_to_hqmm_circuit,
    hmm_to_hqmm_sqrt,
    prior_state,
)
from hqmm.givens import HRotation, check_unitary, factor_unitary, h_matrix, product, rotate_rows
from hqmm.hmm import HmmParams, hmm_forward, hmm_sample
from hqmm.model import HqmmState, hqmm_loglik, hqmm_output_probs, hqmm_step
from hqmm.models import handwritten_hmm_6x6

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_hmm(n, s, rng):
    return HmmParams(rng.dirichlet(np.ones(n), n).T, rng.dirichlet(np.ones(s), n).T, rng.dirichlet(np.ones(n)))


def random_unitary(dim, rng):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def test_unitary_from_identity_transition():
    U = col_stochastic_to_unitary(np.eye(3))
    np.testing.assert_allclose(U.conj().T @ U, np.eye(9), atol=1e-12)
    for i in range(3):
        np.testing.assert_allclose(U[3 * i:3 * i + 3, 3 * i], np.eye(3)[i])


def test_unitary_from_single_column():
    U = col_stochastic_to_unitary([[0.5], [0.5]])
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(U, [[r, r], [r, -r]], atol=1e-12)


def test_unitary_block_structure():
    A = np.random.default_rng(0).dirichlet(np.ones(3), 2).T
    U = col_stochastic_to_unitary(A)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(6), atol=1e-12)
    np.testing.assert_array_equal(U[:3, 3:], 0)
    np.testing.assert_array_equal(U[3:, :3], 0)
    np.testing.assert_allclose(U[:3, 0], np.sqrt(A[:, 0]), atol=1e-12)
    np.testing.assert_allclose(U[3:, 3], np.sqrt(A[:, 1]), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), seeds)
def test_completion_is_orthonormal(s, seed):
    v = np.sqrt(np.random.default_rng(seed).dirichlet(np.ones(s)))
    Q = complete_orthonormal(v)
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(s), atol=1e-12)
    np.testing.assert_allclose(Q[:, 0], v, atol=1e-12)


def test_identity_hmm_conversion():
    p = HmmParams(np.eye(2), np.eye(2), [1.0, 0.0])
    for convert in (hmm_to_hqmm_circuit, hmm_to_hqmm_sqrt):
        kraus = convert(p)
        assert hqmm_loglik(kraus, [0, 0, 0, 0], prior_state(p)) == pytest.approx(0.0, abs=1e-14)
    ops = hmm_to_hqmm_sqrt(p).ops
    for y in range(2):
        for w in range(2):
            expected = np.outer(np.eye(2)[y], np.eye(2)[y]) if w == y else np.zeros((2, 2))
            np.testing.assert_array_equal(ops[y, w], expected)


def test_handwritten_hmm_conversion():
    p = handwritten_hmm_6x6()
    rng = np.random.default_rng(1)
    circuit, root = hmm_to_hqmm_circuit(p), hmm_to_hqmm_sqrt(p)
    assert circuit.completeness_error() < 1e-12 and root.completeness_error() < 1e-12
    rho0 = prior_state(p)
    for _ in range(50):
        seq = hmm_sample(p, 10, burn_in=int(rng.integers(0, 20)), rng_seed=rng)
        ref = hmm_forward(p, seq)[0]
        assert hqmm_loglik(circuit, seq, rho0) == pytest.approx(ref, abs=1e-10)
        assert hqmm_loglik(root, seq, rho0) == pytest.approx(ref, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), seeds)
def test_constructions_agree(n, s, seed):
    rng = np.random.default_rng(seed)
    p = random_hmm(n, s, rng)
    a, b = hmm_to_hqmm_circuit(p), hmm_to_hqmm_sqrt(p)
    rho0 = prior_state(p)
    for seq in rng.integers(0, s, (5, 12)):
        assert hqmm_loglik(a, seq, rho0) == pytest.approx(hqmm_loglik(b, seq, rho0), abs=1e-8)


def test_filtered_diagonal_is_classical_belief():
    rng = np.random.default_rng(2)
    p = random_hmm(3, 2, rng)
    kraus = hmm_to_hqmm_circuit(p)
    seq = hmm_sample(p, 30, rng_seed=3)
    state = HqmmState(prior_state(p))
    for t, y in enumerate(seq):
        state = hqmm_step(state, kraus, int(y))
        belief = hmm_forward(p, seq[:t + 1])[1]
        np.testing.assert_allclose(np.diag(state.rho).real, belief, atol=1e-8)
        np.testing.assert_allclose(hqmm_output_probs(kraus, state.rho), p.C @ p.A @ belief, atol=1e-8)


def test_h_matrix_examples():
    assert np.array_equal(h_matrix(HRotation(0, 2), 3), np.eye(3))
    H = h_matrix(HRotation(1, 2, np.pi / 2), 3)
    np.testing.assert_allclose(H, [[1, 0, 0], [0, 0, 1], [0, -1, 0]], atol=1e-15)
    rng = np.random.default_rng(4)
    for _ in range(20):
        H = h_matrix(HRotation(0, 3, *rng.uniform(-np.pi, np.pi, 4)), 5)
        np.testing.assert_allclose(H.conj().T @ H, np.eye(5), atol=1e-12)
    with pytest.raises(ValueError):
        HRotation(2, 1)
    with pytest.raises(IndexError):
        rotate_rows(np.eye(2), HRotation(0, 2))


def test_rotation_inverse():
    rot = HRotation(0, 1, 0.3, -1.1, 0.7, 2.0)
    np.testing.assert_allclose(h_matrix(rot, 2) @ h_matrix(rot.inverse(), 2), np.eye(2), atol=1e-15)


def test_factor_identity_is_empty():
    assert factor_unitary(np.eye(4)) == []
    assert factor_unitary(np.eye(1)) == []


def test_factor_two_by_two_is_single_rotation():
    rng = np.random.default_rng(5)
    for _ in range(50):
        U = random_unitary(2, rng)
        rots = factor_unitary(U)
        assert len(rots) == 1
        np.testing.assert_allclose(h_matrix(rots[0], 2), U, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), seeds)
def test_factor_reconstructs(dim, seed):
    U = random_unitary(dim, np.random.default_rng(seed))
    rots = factor_unitary(U)
    assert len(rots) <= dim * (dim - 1) // 2
    assert np.linalg.norm(product(rots, dim) - U) <= 1e-8


def test_factor_rejects_non_unitary():
    with pytest.raises(ValueError):
        factor_unitary(np.ones((3, 3)))
    with pytest.raises(ValueError):
        factor_unitary(np.ones((2, 3)))
    with pytest.raises(ValueError):
        factor_unitary([[1j]])
    check_unitary(random_unitary(3, np.random.default_rng(0)))
