"""Piecewise-constant propagation and ensemble GRAPE.

Each segment propagator is built from an eigendecomposition of the segment
Hamiltonian, which also gives the exact derivative of the segment with
respect to its amplitude (the divided-difference form of the Frechet
derivative). Propagation over a grid of parameter values is batched.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from robustctl.ensemble import grid_params
from robustctl.qmat import dagger, is_unitary

METRICS = ("phase_insensitive", "literal")


class NotUnitaryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    total_time: float
    amplitudes: np.ndarray  # (n_controls, n_segments)
    amplitude_bound: float = 10.0

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if amps.shape[1] < 1:
            raise ValueError("a schedule needs at least one segment")
        if self.total_time < 0:
            raise ValueError("total_time must be non-negative")
        if np.any(np.abs(amps) > self.amplitude_bound):
            raise ValueError(f"amplitude exceeds bound {self.amplitude_bound}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "total_time", float(self.total_time))

    @property
    def n_controls(self):
        return self.amplitudes.shape[0]

    @property
    def n_segments(self):
        return self.amplitudes.shape[1]

    @property
    def dt(self):
        return self.total_time / self.n_segments

    def edges(self):
        m = np.arange(self.n_segments + 1)
        return self.total_time * m / self.n_segments

    def concat(self, other):
        if not np.isclose(self.dt, other.dt, rtol=1e-12, atol=0):
            raise ValueError("schedules with different segment durations")
        return PulseSchedule(self.total_time + other.total_time,
                             np.hstack([self.amplitudes, other.amplitudes]),
                             max(self.amplitude_bound, other.amplitude_bound))

    @classmethod
    def zeros(cls, n_controls, n_segments, total_time, amplitude_bound=10.0):
        return cls(total_time, np.zeros((n_controls, n_segments)), amplitude_bound)


def _segment_eigh(system, params, amplitudes):
    """Eigendecomposition of every segment Hamiltonian, shape (N, M, d, [d])."""
    drifts = np.array([system.drift(p, extrapolate=True) for p in params])
    ctrl = np.einsum("km,kij->mij", amplitudes, np.array(system.controls))
    h = drifts[:, None, :, :] + ctrl[None, :, :, :]
    return np.linalg.eigh(h)


def _segment_unitaries(evals, evecs, dt):
    return (evecs * np.exp(-1j * evals * dt)[..., None, :]) @ dagger(evecs)


def _check_params(system, params, extrapolate):
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if params.shape[1] != system.n_params and params.shape[0] == system.n_params:
        params = params.T
    for p in params:
        system.check_params(p, extrapolate)
    return params


def propagate_many(system, params, schedule, extrapolate=False):
    """Final unitaries for each parameter vector in ``params`` (shape (N, P))."""
    params = _check_params(system, params, extrapolate)
    if schedule.n_controls != system.n_controls:
        raise ValueError(f"schedule has {schedule.n_controls} controls, system {system.n_controls}")
    if schedule.total_time == 0:
        return np.broadcast_to(np.eye(system.dim, dtype=complex),
                               (params.shape[0], system.dim, system.dim)).copy()
    evals, evecs = _segment_eigh(system, params, schedule.amplitudes)
    us = _segment_unitaries(evals, evecs, schedule.dt)
    out = np.broadcast_to(np.eye(system.dim, dtype=complex), (params.shape[0], system.dim, system.dim))
    for m in range(schedule.n_segments):
        out = us[:, m] @ out
    return out


def propagate(system, params, schedule, extrapolate=False):
    """``U = U_M ... U_1`` with ``U_m = exp(-i (H_d + sum_k a_km H_k) dt)``."""
    return propagate_many(system, [np.atleast_1d(params)], schedule, extrapolate)[0]


def _errors(overlap, dim, metric):
    if metric == "literal":
        return 1.0 - overlap.real / dim
    if metric == "phase_insensitive":
        return 1.0 - np.abs(overlap) / dim
    raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")


def gate_error(u, target, metric="phase_insensitive"):
    """``1 - Re Tr(target^dagger u)/d`` (literal) or ``1 - |Tr(target^dagger u)|/d``."""
    u, target = np.asarray(u, dtype=complex), np.asarray(target, dtype=complex)
    if u.shape != target.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {target.shape}")
    if not (is_unitary(u) and is_unitary(target)):
        raise NotUnitaryError("gate_error needs unitary inputs (tol 1e-8)")
    return float(_errors(np.vdot(target, u), u.shape[0], metric))


def point_errors(system, params, target, schedule, metric="phase_insensitive", extrapolate=False):
    us = propagate_many(system, params, schedule, extrapolate)
    overlap = np.einsum("ij,nij->n", np.conj(target), us)
    return _errors(overlap, system.dim, metric)


def ensemble_objective(system, grid, target, schedule, metric="phase_insensitive"):
    """Mean and per-point gate errors over the grid."""
    per_point = point_errors(system, grid_params(system, grid), target, schedule, metric)
    return float(np.mean(per_point)), per_point


def _value_and_grad(system, params, target, amplitudes, total_time, metric, with_grad=True):
    n_pts = params.shape[0]
    dim = system.dim
    n_seg = amplitudes.shape[1]
    dt = total_time / n_seg
    evals, evecs = _segment_eigh(system, params, amplitudes)
    us = _segment_unitaries(evals, evecs, dt)

    fwd = np.empty((n_pts, n_seg + 1, dim, dim), dtype=complex)
    fwd[:, 0] = np.eye(dim)
    for m in range(n_seg):
        fwd[:, m + 1] = us[:, m] @ fwd[:, m]
    wdag = dagger(np.asarray(target, dtype=complex))
    overlap = np.einsum("ij,nji->n", wdag, fwd[:, n_seg])
    per_point = _errors(overlap, dim, metric)
    if not with_grad:
        return per_point, None

    # bwd[:, m] = W^dagger U_M ... U_{m+1}
    bwd = np.empty((n_pts, n_seg, dim, dim), dtype=complex)
    bwd[:, n_seg - 1] = wdag
    for m in range(n_seg - 1, 0, -1):
        bwd[:, m - 1] = bwd[:, m] @ us[:, m]
    # d Tr(W^dag U) / da_km = Tr(F_m B_m dU_m);  dU = V (G o V^dag H_k V) V^dag
    q = dagger(evecs) @ (fwd[:, :n_seg] @ bwd) @ evecs
    gap = evals[..., :, None] - evals[..., None, :]
    mid = (evals[..., :, None] + evals[..., None, :]) / 2.0
    gamma = -1j * dt * np.exp(-1j * mid * dt) * np.sinc(gap * dt / (2.0 * np.pi))
    grads = []
    for hk in system.controls:
        kk = dagger(evecs) @ hk @ evecs
        dz = np.einsum("nmij,nmji->nm", q, gamma * kk)
        if metric == "literal":
            de = -dz.real / dim
        else:
            mag = np.abs(overlap)
            safe = np.where(mag > 0, mag, 1.0)
            de = -(np.conj(overlap)[:, None] * dz).real / (safe[:, None] * dim)
            de[mag == 0] = 0.0
        grads.append(de.mean(axis=0))
    return per_point, np.array(grads)


def gradient(system, grid, target, schedule, metric="phase_insensitive"):
    """Exact gradient of the mean ensemble error w.r.t. every segment amplitude."""
    params = grid_params(system, grid)
    if schedule.total_time == 0:
        return np.zeros_like(schedule.amplitudes)
    _, g = _value_and_grad(system, params, target, schedule.amplitudes,
                           schedule.total_time, metric)
    return g


@dataclass(frozen=True)
class OptimizerConfig:
    total_time: float = 32.0
    n_segments: int = 128
    metric: str = "phase_insensitive"
    restarts: int = 20
    max_iter: int = 2000
    threshold: float = 1e-4
    seed: int = 0
    amplitude_bound: float = 10.0
    init_scale: float = 1.0
    workers: int = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.n_segments < 1 or self.total_time < 0:
            raise ValueError("need n_segments >= 1 and total_time >= 0")
        if self.restarts < 0 or self.max_iter < 0:
            raise ValueError("restarts and max_iter must be non-negative")

    def replace(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        d = asdict(self)
        d.pop("workers")
        return d


@dataclass
class OptimizationReport:
    schedule: PulseSchedule
    per_point_error: np.ndarray
    per_point_error_literal: np.ndarray
    params: np.ndarray
    iterations: int
    restarts_used: int
    seed: int
    converged: bool
    metric: str
    trace: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def max_error(self):
        return float(np.max(self.per_point_error))

    @property
    def mean_error(self):
        return float(np.mean(self.per_point_error))

    def to_dict(self):
        """JSON-ready dict. Wall time is left out so reports are reproducible."""
        return {
            "converged": bool(self.converged),
            "metric": self.metric,
            "max_error": self.max_error,
            "mean_error": self.mean_error,
            "per_point_error": [float(x) for x in self.per_point_error],
            "per_point_error_literal": [float(x) for x in self.per_point_error_literal],
            "params": self.params.tolist(),
            "iterations": int(self.iterations),
            "restarts_used": int(self.restarts_used),
            "seed": int(self.seed),
            "trace": [float(x) for x in self.trace],
            "schedule": {
                "total_time": self.schedule.total_time,
                "n_segments": self.schedule.n_segments,
                "amplitude_bound": self.schedule.amplitude_bound,
                "amplitudes": self.schedule.amplitudes.tolist(),
            },
        }


class _Stop(Exception):
    pass


def _run_attempt(system, params, target, cfg, attempt):
    """One L-BFGS-B run from a seeded random start. Returns (amps, iterations, trace)."""
    shape = (system.n_controls, cfg.n_segments)
    rng = np.random.default_rng([cfg.seed, attempt])
    x0 = rng.uniform(-cfg.init_scale, cfg.init_scale, size=shape).ravel()
    x0 = np.clip(x0, -cfg.amplitude_bound, cfg.amplitude_bound)
    cache = {}

    def fun(x):
        pp, g = _value_and_grad(system, params, target, x.reshape(shape), cfg.total_time, cfg.metric)
        cache["x"], cache["max"] = x.copy(), float(np.max(pp))
        return float(np.mean(pp)), g.ravel()

    trace = []
    best = {"x": x0}

    def callback(intermediate_result):
        x = intermediate_result.x
        trace.append(float(intermediate_result.fun))
        best["x"] = x.copy()
        if np.array_equal(cache.get("x"), x):
            worst = cache["max"]
        else:
            pp, _ = _value_and_grad(system, params, target, x.reshape(shape), cfg.total_time,
                                    cfg.metric, with_grad=False)
            worst = float(np.max(pp))
        if worst <= cfg.threshold:
            raise StopIteration

    if cfg.max_iter == 0:
        return x0.reshape(shape), 0, trace
    res = minimize(fun, x0, jac=True, method="L-BFGS-B", callback=callback,
                   bounds=[(-cfg.amplitude_bound, cfg.amplitude_bound)] * x0.size,
                   options={"maxiter": cfg.max_iter, "maxfun": 20 * cfg.max_iter,
                            "ftol": 1e-15, "gtol": 1e-12, "maxcor": 20})
    x = res.x if res.x is not None else best["x"]
    return np.asarray(x).reshape(shape), int(res.nit), trace


def _attempt_job(args):
    return _run_attempt(*args)


def default_workers():
    env = os.environ.get("ROBUSTCTL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def optimize(system, grid, target, config=None):
    """Seeded multi-start L-BFGS-B on the mean ensemble error.

    Restart ``i`` starts from amplitudes drawn uniformly in
    ``[-init_scale, init_scale]`` with generator seed ``(seed, i)``. The first
    restart (in index order) whose worst grid error meets ``threshold`` is
    returned; otherwise the restart with the smallest worst error. Attempts may
    run in parallel, but the selection only depends on the index order, so the
    report does not depend on the number of workers.
    """
    cfg = config or OptimizerConfig()
    t0 = time.perf_counter()
    params = grid_params(system, grid)
    target = np.asarray(target, dtype=complex)
    if target.shape != (system.dim, system.dim):
        raise ValueError(f"target of shape {target.shape} for a system of dimension {system.dim}")

    def finish(amps, iters, used, trace):
        sched = PulseSchedule(cfg.total_time, amps, cfg.amplitude_bound)
        pp = point_errors(system, params, target, sched, cfg.metric)
        lit = point_errors(system, params, target, sched, "literal")
        return OptimizationReport(
            schedule=sched, per_point_error=pp, per_point_error_literal=lit,
            params=params, iterations=iters, restarts_used=used, seed=cfg.seed,
            converged=bool(np.max(pp) <= cfg.threshold), metric=cfg.metric, trace=trace,
            wall_time=time.perf_counter() - t0)

    zero = np.zeros((system.n_controls, cfg.n_segments))
    report = finish(zero, 0, 0, [])
    if report.converged or cfg.restarts == 0:
        return report

    workers = min(cfg.workers or default_workers(), cfg.restarts)
    best = None
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for wave in range(0, cfg.restarts, workers):
            idx = range(wave, min(wave + workers, cfg.restarts))
            jobs = [(system, params, target, cfg, i) for i in idx]
            results = list(pool.map(_attempt_job, jobs)) if pool else [_attempt_job(j) for j in jobs]
            for i, (amps, iters, trace) in zip(idx, results):
                rep = finish(amps, iters, i + 1, trace)
                if rep.converged:
                    return rep
                if best is None or rep.max_error < best.max_error:
                    best = rep
    finally:
        if pool:
            pool.shutdown()
    best.restarts_used = cfg.restarts
    best.wall_time = time.perf_counter() - t0
    return best
