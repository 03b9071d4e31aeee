"""Dense complex matrix helpers.

Matrices are plain ``numpy`` complex128 arrays. The Hermitian exponential is
computed from an eigendecomposition so that propagators are unitary to
machine precision and their derivatives have a closed form.
"""

from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(ValueError):
    """A matrix that must be Hermitian is not."""


def as_matrix(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _check_square_pair(a, b):
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def pauli(label):
    """Tensor product of single-qubit Paulis, e.g. ``pauli("XI")``."""
    try:
        return reduce(np.kron, [PAULI[c] for c in label.upper()])
    except KeyError as exc:
        raise ValueError(f"unknown Pauli label {label!r}") from exc


def kron(a, b):
    return np.kron(as_matrix(a), as_matrix(b))


def commutator(a, b):
    a, b = as_matrix(a), as_matrix(b)
    _check_square_pair(a, b)
    return a @ b - b @ a


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def check_hermitian(a, tol=HERMITIAN_TOL, what="matrix"):
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        raise NotHermitianError(f"{what} is not Hermitian (tol {tol})")
    return a


def is_unitary(u, tol=1e-8):
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return op_norm(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def expm_unitary(h, t):
    """Return ``exp(-i h t)`` for Hermitian ``h``."""
    h = check_hermitian(h)
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ dagger(evecs)


def op_norm(a):
    """Spectral norm (largest singular value)."""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hs_inner(a, b):
    """Hilbert-Schmidt inner product Tr(a^dagger b)."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))
