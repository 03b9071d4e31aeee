"""Minimax approximation of constants by odd polynomials.

A polynomial ``p(w) = w**parity * f(w**2)`` is fitted by discrete minimax on
Chebyshev-Lobatto nodes of the interval, solved as a linear program. ``f`` is
represented in the Chebyshev basis of ``s = w**2`` mapped onto ``[-1, 1]``,
which keeps the problem well conditioned for high degrees; monomial
coefficients are derived on request.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.optimize import linprog

FIT_NODES = 2001
CHECK_NODES = 10001


class InfeasibleBranchError(ValueError):
    """The interval contains zero, so ``w`` is not a function of ``w**2``."""


@dataclass(frozen=True, eq=False)
class SquarePolynomial:
    """``p(w) = w**parity * f(w**2)`` with ``f`` in a scaled Chebyshev basis."""

    cheb: np.ndarray
    s_range: tuple
    interval: tuple
    parity: int
    target_desc: str = ""
    sup_error: float = float("nan")

    @property
    def degree_index(self):
        return self.cheb.size - 1

    def _sigma(self, s):
        lo, hi = self.s_range
        if hi == lo:
            return np.zeros_like(s)
        return (2.0 * s - (lo + hi)) / (hi - lo)

    def inner(self, s):
        """Evaluate ``f(s)``."""
        return C.chebval(self._sigma(np.asarray(s, dtype=float)), self.cheb)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return w ** self.parity * self.inner(w * w)

    @property
    def coeffs(self):
        """Monomial coefficients ``c_k`` of ``f(s) = sum_k c_k s**k``.

        Ill-conditioned for large degree; evaluate with ``__call__`` instead.
        """
        lo, hi = self.s_range
        mono_sigma = C.cheb2poly(self.cheb)
        if hi == lo:
            return np.array([C.chebval(0.0, self.cheb)])
        # sigma = a*s + b
        a, b = 2.0 / (hi - lo), -(lo + hi) / (hi - lo)
        out = np.zeros(1)
        power = np.ones(1)
        for c in mono_sigma:
            out = P.polyadd(out, c * power)
            power = P.polymul(power, [b, a])
        return np.pad(out, (0, self.cheb.size - out.size))[: self.cheb.size]


# p(w) = sum_k c_k w**(2k+1) for odd fits
OddPolynomial = SquarePolynomial


def chebyshev_nodes(lo, hi, n):
    j = np.arange(n)
    return (lo + hi) / 2.0 + (hi - lo) / 2.0 * np.cos(np.pi * j / (n - 1))[::-1]


def _s_range(lo, hi):
    if lo <= 0.0 <= hi:
        return 0.0, max(lo * lo, hi * hi)
    a, b = lo * lo, hi * hi
    return min(a, b), max(a, b)


def _minimax(w, target, parity, degree_index, s_range):
    """Solve min_t s.t. |w**parity f(w**2) - target| <= t on the nodes."""
    lo, hi = s_range
    sigma = (2.0 * w * w - (lo + hi)) / (hi - lo) if hi > lo else np.zeros_like(w)
    basis = C.chebvander(sigma, degree_index) * (w ** parity)[:, None]
    n, m = basis.shape
    ones = np.ones((n, 1))
    a_ub = np.vstack([np.hstack([basis, -ones]), np.hstack([-basis, -ones])])
    b_ub = np.concatenate([target, -target])
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * m + [(0, None)],
                  method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"minimax LP failed: {res.message}")
    return res.x[:m]


def _fit(interval, degree_index, target_fn, parity, desc):
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"degenerate interval [{lo}, {hi}]")
    if degree_index < 0:
        raise ValueError("degree index must be >= 0")
    s_range = _s_range(lo, hi)
    nodes = chebyshev_nodes(lo, hi, FIT_NODES)
    cheb = _minimax(nodes, target_fn(nodes), parity, int(degree_index), s_range)
    poly = SquarePolynomial(cheb, s_range, (lo, hi), parity, desc)
    check = np.linspace(lo, hi, CHECK_NODES)
    sup = float(np.max(np.abs(poly(check) - target_fn(check))))
    return SquarePolynomial(cheb, s_range, (lo, hi), parity, desc, sup)


def fit_odd_constant(interval, degree_index, theta):
    """Best odd polynomial ``sum_{k<=K} c_k w**(2k+1)`` approximating ``theta``.

    ``sup_error`` is measured on a uniform grid independent of the fit nodes.
    """
    theta = float(theta)
    return _fit(interval, degree_index, lambda w: np.full_like(w, theta), 1, f"const {theta}")


def fit_rational_target(interval, degree_index, theta1, theta2):
    """Even-polynomial fits ``f1(w**2)``, ``f3(w**2)`` of

        f1 = (theta1 + w theta2) / (1 + w**2),  f3 = (theta2 - w theta1) / (1 + w**2)

    which requires ``w`` to be a function of ``w**2``, i.e. an interval on one
    side of zero.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if lo <= 0.0 <= hi:
        raise InfeasibleBranchError(
            f"interval [{lo}, {hi}] contains 0: the sign of w cannot be recovered from w**2")
    t1, t2 = float(theta1), float(theta2)
    f1 = _fit((lo, hi), degree_index, lambda w: (t1 + w * t2) / (1 + w * w), 0, "f1")
    f3 = _fit((lo, hi), degree_index, lambda w: (t2 - w * t1) / (1 + w * w), 0, "f3")
    return f1, f3


def sup_error_table(interval, theta, degrees):
    """``(K, sup_error)`` rows for a list of degree indices."""
    return [(int(k), fit_odd_constant(interval, k, theta).sup_error) for k in degrees]
