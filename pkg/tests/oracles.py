"""Independent reference computations used by the tests.

The closure oracle works in Pauli coordinates with exact modular arithmetic:
brackets come from the Pauli multiplication table (no matrix products) and
rank decisions from Gaussian elimination over GF(p). Reduction mod p can only
lose rank, so the value returned is a lower bound that equals the rational
dimension unless p divides one of the pivots; two primes make that negligible.
"""

import itertools
from fractions import Fraction

import numpy as np

PRIMES = (67108859, 67108837)  # below 2**26 so int64 sums of products do not overflow

# single-qubit products: _MUL[a][b] = (phase, c) with sigma_a sigma_b = phase * sigma_c
_MUL = {}
for a in range(4):
    for b in range(4):
        if a == 0:
            _MUL[a, b] = (1, b)
        elif b == 0:
            _MUL[a, b] = (1, a)
        elif a == b:
            _MUL[a, b] = (1, 0)
        else:
            c = 6 - a - b
            cyclic = (a, b) in ((1, 2), (2, 3), (3, 1))
            _MUL[a, b] = (1j if cyclic else -1j, c)

_LABEL = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_MATS = {0: np.eye(2), 1: np.array([[0, 1], [1, 0]]), 2: np.array([[0, -1j], [1j, 0]]),
         3: np.diag([1.0, -1.0])}


def pauli_strings(n_qubits):
    return list(itertools.product(range(4), repeat=n_qubits))


def pauli_matrix(string):
    m = np.eye(1)
    for s in string:
        m = np.kron(m, _MATS[s])
    return m


def structure_constants(n_qubits):
    """f[P, Q, R] with -i [P, Q] = sum_R f[P, Q, R] R over non-identity strings."""
    strings = pauli_strings(n_qubits)[1:]
    index = {s: k for k, s in enumerate(strings)}
    m = len(strings)
    f = np.zeros((m, m, m), dtype=np.int64)
    for p, q in itertools.product(strings, repeat=2):
        phase, out = 1, []
        for a, b in zip(p, q):
            ph, c = _MUL[a, b]
            phase *= ph
            out.append(c)
        # PQ = phase R and QP = conj(phase) R; they anticommute iff phase is imaginary
        if abs(phase.real) < 0.5:
            # -i (PQ - QP) = -i * 2 * phase * R, which is real: +-2
            f[index[p], index[q], index[tuple(out)]] = int(round((-2j * phase).real))
    return f


def pauli_coordinates(h, n_qubits):
    """Rational coefficients of Hermitian ``h`` on non-identity Pauli strings."""
    d = 2 ** n_qubits
    out = []
    for s in pauli_strings(n_qubits)[1:]:
        c = np.trace(pauli_matrix(s) @ h).real / d
        out.append(Fraction(c).limit_denominator(10 ** 6))
    return out


def _to_mod(fracs, p):
    return np.array([(x.numerator % p) * pow(x.denominator % p, -1, p) % p for x in fracs],
                    dtype=np.int64)


class _Echelon:
    """Fully reduced row echelon form over GF(p)."""

    def __init__(self, width, p):
        self.p = p
        self.rows = np.zeros((0, width), dtype=np.int64)
        self.pivots = []

    def reduce(self, v):
        if self.pivots:
            coef = v[self.pivots] % self.p
            v = (v - (coef @ self.rows) % self.p) % self.p
        return v

    def add(self, v):
        v = self.reduce(v)
        nz = np.flatnonzero(v)
        if not nz.size:
            return None
        piv = int(nz[0])
        v = v * pow(int(v[piv]), -1, self.p) % self.p
        if self.pivots:
            col = self.rows[:, piv].copy()
            self.rows = (self.rows - np.outer(col, v) % self.p) % self.p
        self.rows = np.vstack([self.rows, v])
        self.pivots.append(piv)
        return v


def _closure_mod(seeds, f, p):
    """Dimension of the Lie algebra generated by block coordinate arrays (N, m)."""
    n_blocks, m = seeds[0].shape
    ech = _Echelon(n_blocks * m, p)
    basis = []
    queue = []
    for s in seeds:
        v = ech.add(s.ravel() % p)
        if v is not None:
            basis.append(v.reshape(n_blocks, m))
            queue.append(len(basis) - 1)
    while queue and len(basis) < n_blocks * m:
        j = queue.pop(0)
        b = basis[j]
        others = np.array(basis[:j] + basis[j + 1:])
        if not others.size:
            continue
        # c[k, n, r] = sum_pq others[k, n, p] b[n, q] f[p, q, r]
        outer = (others[:, :, :, None] * b[None, :, None, :]) % p
        cand = np.tensordot(outer, f, axes=([2, 3], [0, 1])) % p
        for c in cand:
            v = ech.add(c.ravel())
            if v is not None:
                basis.append(v.reshape(n_blocks, m))
                queue.append(len(basis) - 1)
                if len(basis) == n_blocks * m:
                    break
    return len(basis)


def closure_dimension(generators, n_qubits=None):
    """Exact dimension of the Lie algebra generated by Hermitian matrices."""
    return block_closure_dimension([[g] for g in generators], n_qubits)


def block_closure_dimension(block_generators, n_qubits=None):
    """Same for block-diagonal generators given as lists of diagonal blocks."""
    d = np.asarray(block_generators[0][0]).shape[0]
    n_qubits = n_qubits or int(round(np.log2(d)))
    f = structure_constants(n_qubits)
    coords = [[pauli_coordinates(np.asarray(blk), n_qubits) for blk in gen]
              for gen in block_generators]
    dims = []
    for p in PRIMES:
        seeds = [np.array([_to_mod(c, p) for c in gen]) for gen in coords]
        dims.append(_closure_mod(seeds, f, p))
    return max(dims)


def trace_fingerprint(ops, max_len):
    """Tr of every word, by explicit products in lexicographic order."""
    out = []
    for length in range(1, max_len + 1):
        for word in itertools.product(range(len(ops)), repeat=length):
            m = np.eye(ops[0].shape[0], dtype=complex)
            for k in word:
                m = m @ ops[k]
            t = np.trace(m)
            out.extend([t.real, t.imag])
    return np.array(out)


def recurrence_grid_min(h, t_max, dt):
    """min over the scan grid of ||exp(-iht) - I|| by scipy.linalg.expm."""
    from scipy.linalg import expm
    best = np.inf
    for t in np.arange(1, int(np.floor(t_max / dt)) + 1) * dt:
        u = expm(-1j * h * t)
        best = min(best, np.linalg.norm(u - np.eye(h.shape[0]), 2))
    return best


def vallee_poussin_bound(err, n):
    """Lower bound on the minimax error from sign alternation of a residual.

    If ``err`` takes alternating signs at ``n`` increasing points, every member
    of a Haar space of dimension ``n - 1`` has sup error at least the smallest
    of those magnitudes. Same-sign runs are collapsed to their largest value,
    then the weakest run is dropped (merging its neighbours) until ``n`` remain.
    Returns 0.0 if there are fewer than ``n`` alternations.
    """
    runs = []
    for e in err:
        if e == 0:
            continue
        if runs and np.sign(e) == runs[-1][0]:
            runs[-1][1] = max(runs[-1][1], abs(e))
        else:
            runs.append([np.sign(e), abs(e)])
    while len(runs) > n:
        k = min(range(len(runs)), key=lambda i: runs[i][1])
        if k in (0, len(runs) - 1):
            runs.pop(k)
        else:
            merged = max(runs[k - 1][1], runs[k + 1][1])
            runs[k - 1:k + 2] = [[runs[k - 1][0], merged]]
    if len(runs) < n:
        return 0.0
    return min(r[1] for r in runs)
