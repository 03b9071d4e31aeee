"""Lie-algebraic controllability tools.

Elements of a dynamical Lie algebra are stored as skew-Hermitian traceless
matrices and, for the linear algebra, as real vectors ``[Re A, Im A]`` so that
the real Hilbert-Schmidt product ``Re Tr(A^dagger B)`` is a dot product.
"""

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from robustctl.qmat import DimensionError, as_matrix, check_hermitian

DEFAULT_TOL = 1e-8
DEFAULT_MAX_DEPTH = 8
DEFAULT_WORD_LEN = 4
# brackets of unit-norm elements below this norm are treated as exact zeros
ZERO_BRACKET = 1e-10


class ClosureError(RuntimeError):
    """The closure did not stabilize within ``max_depth`` sweeps."""

    def __init__(self, msg, basis):
        super().__init__(msg)
        self.basis = basis


def _vec(a):
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _unvec(v, n):
    half = n * n
    return (v[:half] + 1j * v[half:]).reshape(n, n)


@dataclass
class LieBasis:
    dim_space: int
    elements: list = field(default_factory=list)
    generation_log: list = field(default_factory=list)

    @property
    def dimension(self):
        return len(self.elements)

    def vectors(self):
        if not self.elements:
            return np.zeros((0, 2 * self.dim_space ** 2))
        return np.array([_vec(e) for e in self.elements])

    def contains(self, h, tol=DEFAULT_TOL):
        return span_contains(self, h, tol)


class _Builder:
    def __init__(self, n, tol):
        self.n = n
        self.tol = tol
        self.mats = []
        self.vecs = np.zeros((0, 2 * n * n))
        self.words = []

    def project_out(self, v):
        for _ in range(2):
            if self.vecs.shape[0]:
                v = v - self.vecs.T @ (self.vecs @ v)
        return v

    def try_add(self, mat, word):
        v = _vec(mat)
        norm = np.linalg.norm(v)
        if norm <= ZERO_BRACKET:
            return False
        v = self.project_out(v / norm)
        res = np.linalg.norm(v)
        if res <= self.tol:
            return False
        v = v / res
        self.vecs = np.vstack([self.vecs, v])
        self.mats.append(_unvec(v, self.n))
        self.words.append(word)
        return True

    def basis(self):
        return LieBasis(self.n, list(self.mats), list(self.words))


def lie_closure(generators, tol=DEFAULT_TOL, max_depth=DEFAULT_MAX_DEPTH, max_dim=None):
    """Orthonormal basis of the real Lie algebra generated by ``i*g`` (trace removed).

    ``max_dim`` is a known upper bound on the dimension (default ``n**2 - 1``);
    the search stops once it is reached.  Passing the structural bound of a
    block-diagonal ensemble keeps rounding noise near ``tol`` from adding a
    spurious direction after the algebra is already full.

    Raises :class:`ClosureError` if new elements still appear after
    ``max_depth`` bracket sweeps.
    """
    gens = [check_hermitian(as_matrix(g), what="generator") for g in generators]
    if not gens:
        raise ValueError("at least one generator required")
    n = gens[0].shape[0]
    if any(g.shape != (n, n) for g in gens):
        raise DimensionError("generators must share one dimension")
    if all(np.max(np.abs(g)) == 0 for g in gens):
        raise ValueError("all generators are zero")

    b = _Builder(n, tol)
    eye = np.eye(n)
    for idx, g in enumerate(gens):
        scale = max(np.linalg.norm(g), 1.0)
        a = 1j * (g - np.trace(g) / n * eye) / scale
        b.try_add(a, [idx])

    if max_dim is None:
        max_dim = n * n - 1
    frontier_start = 0
    for _ in range(max_depth):
        stop = len(b.mats)
        if stop == max_dim:
            return b.basis()
        for j in range(frontier_start, stop):
            if len(b.mats) == max_dim:
                break
            bj = b.mats[j]
            left = np.array(b.mats[:j]) if j else np.zeros((0, n, n))
            if not left.shape[0]:
                continue
            comms = left @ bj - bj @ left
            cand = np.concatenate([comms.real.reshape(j, -1), comms.imag.reshape(j, -1)], axis=1)
            norms = np.linalg.norm(cand, axis=1)
            keep = norms > ZERO_BRACKET
            if not keep.any():
                continue
            unit = cand[keep] / norms[keep, None]
            res = unit - (unit @ b.vecs.T) @ b.vecs
            for i_rel, r in zip(np.flatnonzero(keep), np.linalg.norm(res, axis=1)):
                if len(b.mats) == max_dim:
                    break
                if r > tol:
                    b.try_add(comms[i_rel], [b.words[i_rel], b.words[j]])
        if len(b.mats) == stop:
            return b.basis()
        frontier_start = stop
    if len(b.mats) == max_dim:
        return b.basis()
    raise ClosureError(
        f"closure not reached after {max_depth} sweeps (dimension {len(b.mats)} so far)",
        b.basis())


def lie_dimension(generators, tol=DEFAULT_TOL, max_depth=DEFAULT_MAX_DEPTH):
    return lie_closure(generators, tol, max_depth).dimension


def is_fully_controllable(system, params, tol=DEFAULT_TOL):
    basis = lie_closure([system.drift(params), *system.controls], tol=tol)
    return basis.dimension == system.dim ** 2 - 1


def span_contains(basis, h, tol=DEFAULT_TOL):
    """Whether the traceless part of ``i*h`` lies in the span of ``basis``.

    The residual is measured on the normalized vector, so ``tol`` is relative.
    """
    h = as_matrix(h)
    n = basis.dim_space
    if h.shape != (n, n):
        raise DimensionError(f"matrix of shape {h.shape} against basis of dimension {n}")
    v = _vec(1j * (h - np.trace(h) / n * np.eye(n)))
    norm = np.linalg.norm(v)
    if norm <= ZERO_BRACKET * max(1.0, np.linalg.norm(h)):
        return True
    v = v / norm
    vecs = basis.vectors()
    for _ in range(2):
        if vecs.shape[0]:
            v = v - vecs.T @ (vecs @ v)
    return bool(np.linalg.norm(v) <= tol)


def equivalence_fingerprint(ops, max_word_len=DEFAULT_WORD_LEN):
    """Traces of all words over ``ops`` of length 1..max_word_len.

    Returned as ``[Re Tr W_1, Im Tr W_1, Re Tr W_2, ...]`` with words in
    lexicographic order within each length. Invariant under simultaneous
    unitary conjugation of every operator.
    """
    ops = [as_matrix(o) for o in ops]
    if not ops:
        raise ValueError("need at least one operator")
    if max_word_len < 1:
        raise ValueError("max_word_len must be >= 1")
    n = ops[0].shape[0]
    if any(o.shape != (n, n) for o in ops):
        raise DimensionError("operators must share one dimension")
    out = []
    prev = {(): np.eye(n, dtype=complex)}
    for length in range(1, max_word_len + 1):
        cur = {}
        for word in itertools.product(range(len(ops)), repeat=length):
            cur[word] = prev[word[:-1]] @ ops[word[-1]]
            t = np.trace(cur[word])
            out += [t.real, t.imag]
        prev = cur
    return np.array(out)


def _grid_params(system, grid):
    from robustctl.ensemble import grid_params

    return grid_params(system, grid)


def system_fingerprints(system, grid, max_word_len=DEFAULT_WORD_LEN):
    params = _grid_params(system, grid)
    return np.array([equivalence_fingerprint([system.drift(p), *system.controls], max_word_len)
                     for p in params])


def pairwise_distinct(system, grid, max_word_len=DEFAULT_WORD_LEN, tol=DEFAULT_TOL):
    """Boolean matrix: entry (i, j) is True when the fingerprints of grid points
    i and j differ, which certifies the two systems are not unitarily
    equivalent. False only means "not distinguished at this word length"."""
    fps = system_fingerprints(system, grid, max_word_len)
    diff = np.max(np.abs(fps[:, None, :] - fps[None, :, :]), axis=2)
    return diff > tol


def fingerprints_hash(system, grid, max_word_len=DEFAULT_WORD_LEN):
    fps = np.round(system_fingerprints(system, grid, max_word_len), 8) + 0.0
    return hashlib.sha256(np.ascontiguousarray(fps).tobytes()).hexdigest()


def recurrence_defect(h, t):
    """``||I - exp(-i h t)||`` for scalar or array ``t``."""
    evals = np.linalg.eigvalsh(check_hermitian(h))
    t = np.asarray(t, dtype=float)
    return np.max(2.0 * np.abs(np.sin(np.multiply.outer(t, evals) / 2.0)), axis=-1)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a, b, tol=1e-13, max_iter=200):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def recurrence_time(h, eps, t_max, dt):
    """First time on the grid ``dt, 2dt, ..., t_max`` near which
    ``||I - exp(-i h t)|| < eps``, refined by golden-section search.

    Interior local minima of the sampled defect are refined on the bracket of
    their two neighbours; the first refined time whose defect is below ``eps``
    is returned. Returns ``None`` if no recurrence is found.
    """
    if eps <= 0 or not 0 < dt < t_max:
        raise ValueError("need eps > 0 and 0 < dt < t_max")
    evals = np.linalg.eigvalsh(check_hermitian(h))
    lip = float(np.max(np.abs(evals)))

    def defect(t):
        return float(np.max(2.0 * np.abs(np.sin(t * evals / 2.0))))

    n_steps = int(math.floor(t_max / dt + 1e-9))
    ts = np.arange(1, n_steps + 1) * dt
    d = recurrence_defect(h, ts)
    if d[0] < eps:
        return float(ts[0])
    # the minimum near a grid point is at least d - lip*dt
    for i in np.flatnonzero(d - lip * dt < eps):
        if d[i] < eps and (i == 0 or i == d.size - 1):
            return float(ts[i])
        if i == 0 or i == d.size - 1 or d[i] > d[i - 1] or d[i] > d[i + 1]:
            if d[i] < eps:
                return float(ts[i])
            continue
        t_ref = _golden_min(defect, ts[i - 1], ts[i + 1])
        if defect(t_ref) < eps:
            return t_ref
        if d[i] < eps:
            return float(ts[i])
    return None
