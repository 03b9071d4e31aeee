"""Discretized parameter sets and the block-diagonal extended system."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from robustctl import algebra
from robustctl.models import DomainError

MAX_EXTENDED_DIM = 128


@dataclass(frozen=True, eq=False)
class ParameterGrid:
    points: np.ndarray
    interval: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lo, hi = self.interval
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("a grid needs at least one point")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if pts[0] < lo or pts[-1] > hi:
            raise ValueError(f"grid points outside [{lo}, {hi}]")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "interval", (float(lo), float(hi)))

    def __len__(self):
        return self.points.size

    def spacing(self):
        return 0.0 if len(self) == 1 else float(np.max(np.diff(self.points)))

    def to_dict(self):
        return {"interval": list(self.interval), "points": self.points.tolist()}


def make_grid(omega0, omega1, n):
    """``n`` equally spaced points on ``[omega0, omega1]``, endpoints included.

    A single point grid is ``{omega0}``.
    """
    n = int(n)
    if n <= 0:
        raise ValueError(f"grid size must be positive, got {n}")
    omega0, omega1 = float(omega0), float(omega1)
    if n == 1:
        if omega0 > omega1:
            raise ValueError("omega0 must not exceed omega1")
        return ParameterGrid(np.array([omega0]), (omega0, omega1))
    if not omega0 < omega1:
        raise ValueError("omega0 < omega1 required for n > 1")
    pts = omega0 + (omega1 - omega0) * np.arange(n) / (n - 1)
    pts[-1] = omega1
    return ParameterGrid(pts, (omega0, omega1))


def grid_params(system, grid, extrapolate=False):
    """Parameter vectors, shape ``(N, n_params)``, for a grid.

    A single :class:`ParameterGrid` serves a one-parameter system; a sequence of
    grids (one per parameter) is expanded as a Cartesian product. A raw 2-d
    array of parameter vectors is passed through.
    """
    if isinstance(grid, ParameterGrid):
        if system.n_params != 1:
            raise DomainError(
                f"{system.name} has {system.n_params} parameters; pass one grid per parameter")
        params = grid.points[:, None]
    elif isinstance(grid, np.ndarray) and grid.ndim == 2:
        params = np.asarray(grid, dtype=float)
    else:
        grids = list(grid)
        if len(grids) != system.n_params:
            raise DomainError(f"{system.name} needs {system.n_params} grids, got {len(grids)}")
        params = np.array(list(itertools.product(*[g.points for g in grids])), dtype=float)
    for p in params:
        system.check_params(p, extrapolate)
    return params


@dataclass(frozen=True, eq=False)
class ExtendedSystem:
    base: object
    params: np.ndarray
    drift_blocks: tuple
    control_blocks: tuple  # per control: tuple of N identical blocks

    @property
    def n_points(self):
        return len(self.drift_blocks)

    @property
    def dim(self):
        return self.n_points * self.base.dim

    @property
    def drift(self):
        return block_diag(*self.drift_blocks)

    @property
    def controls(self):
        return tuple(block_diag(*blocks) for blocks in self.control_blocks)

    def generators(self):
        """Drift and controls with each diagonal block made traceless."""
        d = self.base.dim
        eye = np.eye(d)

        def strip(blocks):
            return block_diag(*[b - np.trace(b) / d * eye for b in blocks])

        return [strip(self.drift_blocks)] + [strip(b) for b in self.control_blocks]

    def max_lie_dim(self):
        return self.n_points * (self.base.dim ** 2 - 1)


def extend(system, grid, max_dim=MAX_EXTENDED_DIM):
    params = grid_params(system, grid)
    n = params.shape[0]
    if n * system.dim > max_dim:
        raise ValueError(f"extended dimension {n * system.dim} exceeds cap {max_dim}")
    return ExtendedSystem(
        base=system,
        params=params,
        drift_blocks=tuple(system.drift(p) for p in params),
        control_blocks=tuple(tuple(h for _ in range(n)) for h in system.controls),
    )


@dataclass
class LemmaReport:
    system: str
    params: list
    lie_dims: list
    fully_controllable: list
    pairwise_distinct: list
    fingerprints_hash: str
    extended_dim: int
    max_extended_dim: int
    generation_log: list

    @property
    def condition1(self):
        return all(self.fully_controllable)

    @property
    def condition2(self):
        n = len(self.pairwise_distinct)
        return all(self.pairwise_distinct[i][j] for i in range(n) for j in range(n) if i != j)

    @property
    def verdict(self):
        return self.extended_dim == self.max_extended_dim

    def to_dict(self):
        return {
            "system": self.system,
            "params": self.params,
            "lie_dim": self.lie_dims,
            "fully_controllable": self.fully_controllable,
            "condition1": self.condition1,
            "pairwise_distinct": self.pairwise_distinct,
            "condition2": self.condition2,
            "fingerprints_hash": self.fingerprints_hash,
            "extended_lie_dim": self.extended_dim,
            "max_extended_lie_dim": self.max_extended_dim,
            "robustly_controllable_on_grid": self.verdict,
            "generation_log": self.generation_log,
        }


def lemma_check(system, grid, tol=algebra.DEFAULT_TOL, max_word_len=algebra.DEFAULT_WORD_LEN):
    """Check full controllability per point and pairwise non-equivalence on a grid,
    and compute the dimension of the extended system's Lie algebra."""
    params = grid_params(system, grid)
    full_dim = system.dim ** 2 - 1
    lie_dims, logs = [], []
    for p in params:
        basis = algebra.lie_closure([system.drift(p), *system.controls], tol=tol)
        lie_dims.append(basis.dimension)
        logs.append(basis.generation_log)
    distinct = algebra.pairwise_distinct(system, params, max_word_len=max_word_len)
    ext = extend(system, params)
    ext_basis = algebra.lie_closure(ext.generators(), tol=tol, max_dim=ext.max_lie_dim())
    return LemmaReport(
        system=system.name,
        params=params.tolist(),
        lie_dims=lie_dims,
        fully_controllable=[d == full_dim for d in lie_dims],
        pairwise_distinct=distinct.tolist(),
        fingerprints_hash=algebra.fingerprints_hash(system, params, max_word_len),
        extended_dim=ext_basis.dimension,
        max_extended_dim=ext.max_lie_dim(),
        generation_log=logs,
    )
