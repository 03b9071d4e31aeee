import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from robustctl import qmat
from robustctl.qmat import I2, X, Y, Z, commutator, expm_unitary, hs_inner, kron, op_norm

from conftest import random_hermitian, random_matrix, seeds


def test_kron_examples():
    np.testing.assert_array_equal(kron(X, I2), np.block([[np.zeros((2, 2)), I2], [I2, np.zeros((2, 2))]]))
    np.testing.assert_array_equal(kron(I2, I2), np.eye(4))
    np.testing.assert_array_equal(kron(Z, Z), np.diag([1, -1, -1, 1]))


def test_commutator_examples():
    np.testing.assert_allclose(commutator(X, Y), 2j * Z)
    np.testing.assert_array_equal(commutator(Z, Z), np.zeros((2, 2)))


def test_double_commutator_isolates_local_term():
    w = 1.3
    zz = kron(Z, Z)
    hd = w * kron(X, I2) + kron(X, X) + kron(Y, Y) + zz
    # ZZ squares to I, so [ZZ, [H, ZZ]] = 2 ZZ H ZZ - 2 H
    got = commutator(zz, commutator(hd, zz))
    np.testing.assert_allclose(got, 2 * (zz @ hd @ zz) - 2 * hd, atol=1e-12)
    # ZZ anticommutes with XI and commutes with the exchange terms
    np.testing.assert_allclose(got, -4 * w * kron(X, I2), atol=1e-12)


def test_commutator_shape_mismatch():
    with pytest.raises(qmat.DimensionError):
        commutator(X, np.eye(4))


def test_expm_examples():
    np.testing.assert_allclose(expm_unitary(Z, np.pi / 2), np.diag([-1j, 1j]), atol=1e-15)
    np.testing.assert_array_equal(expm_unitary(kron(X, Y), 0.0), np.eye(4))
    np.testing.assert_allclose(expm_unitary(X, np.pi), -I2, atol=1e-15)


def test_expm_rejects_non_hermitian():
    with pytest.raises(qmat.NotHermitianError):
        expm_unitary(np.array([[0, 1], [0, 0]]), 1.0)


def test_op_norm_examples():
    assert op_norm(kron(Z, Z)) == pytest.approx(1.0, abs=1e-15)
    assert op_norm(np.zeros((4, 4))) == 0.0
    heis = kron(X, X) + kron(Y, Y) + kron(Z, Z)
    evals = np.linalg.eigvalsh(heis)
    np.testing.assert_allclose(np.sort(evals), [-3, 1, 1, 1], atol=1e-14)
    assert op_norm(heis) == pytest.approx(np.max(np.abs(evals)), abs=1e-14)
    assert op_norm(heis) == pytest.approx(3.0, abs=1e-14)


def test_hs_inner_examples():
    assert hs_inner(X, X) == 2
    assert hs_inner(X, Y) == 0
    assert hs_inner(kron(X, I2), kron(X, X)) == 0


def test_pauli_labels():
    np.testing.assert_array_equal(qmat.pauli("XZ"), np.kron(X, Z))
    with pytest.raises(ValueError):
        qmat.pauli("XQ")


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=st.integers(1, 64), t=st.floats(-100, 100))
def test_expm_is_unitary(seed, dim, t):
    rng = np.random.default_rng(seed)
    u = expm_unitary(random_hermitian(rng, dim), t)
    assert op_norm(u.conj().T @ u - np.eye(dim)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=st.integers(1, 16), s=st.floats(-20, 20), t=st.floats(-20, 20))
def test_expm_group_law_and_reference(seed, dim, s, t):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, dim)
    np.testing.assert_allclose(expm_unitary(h, s) @ expm_unitary(h, t), expm_unitary(h, s + t),
                               atol=1e-10)
    np.testing.assert_allclose(expm_unitary(h, t), expm(-1j * h * t), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_kron_associative_bilinear(seed, a, b):
    rng = np.random.default_rng(seed)
    p, q, r, s = (random_matrix(rng, k) for k in (2, 3, 2, 3))
    np.testing.assert_allclose(kron(kron(p, q), r), kron(p, kron(q, r)), atol=1e-12)
    np.testing.assert_allclose(kron(a * p + b * r, q), a * kron(p, q) + b * kron(r, q), atol=1e-12)
    np.testing.assert_allclose(kron(p, a * q + b * s), a * kron(p, q) + b * kron(p, s), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=st.integers(1, 8))
def test_commutator_antisymmetric_jacobi(seed, dim):
    rng = np.random.default_rng(seed)
    a, b, c = (random_matrix(rng, dim) for _ in range(3))
    np.testing.assert_allclose(commutator(a, b), -commutator(b, a), atol=1e-10)
    jac = (commutator(a, commutator(b, c)) + commutator(b, commutator(c, a))
           + commutator(c, commutator(a, b)))
    assert np.max(np.abs(jac)) <= 1e-10
