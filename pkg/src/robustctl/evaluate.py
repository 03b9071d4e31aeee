"""Robustness over the continuous parameter interval."""

import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from robustctl.ensemble import make_grid
from robustctl.grape import OptimizerConfig, optimize, point_errors, propagate
from robustctl.qmat import op_norm


@dataclass(frozen=True, eq=False)
class ErrorSpectrum:
    omegas: np.ndarray
    errors_literal: np.ndarray
    errors_phase_insensitive: np.ndarray
    is_grid_point: np.ndarray
    total_time: float
    slope_norm: float
    schedule_ref: str = ""
    target_ref: str = ""

    def __post_init__(self):
        n = self.omegas.size
        if not (self.errors_literal.size == self.errors_phase_insensitive.size
                == self.is_grid_point.size == n):
            raise ValueError("spectrum columns must have equal length")
        if np.any(np.diff(self.omegas) <= 0):
            raise ValueError("sweep points must be strictly increasing")

    def max_error(self, metric="phase_insensitive"):
        errs = self.errors_literal if metric == "literal" else self.errors_phase_insensitive
        return float(np.max(errs))

    def certified_bound(self, metric="phase_insensitive"):
        """Upper bound on the error anywhere in the swept interval.

        Between neighbouring samples the propagators differ by at most
        ``T * |dw| * ||dH_d/dw||`` in operator norm, and either error metric
        changes by no more than that difference.
        """
        gap = float(np.max(np.diff(self.omegas))) if self.omegas.size > 1 else 0.0
        return self.max_error(metric) + 0.5 * gap * self.total_time * self.slope_norm


def sweep(system, schedule, target, interval=None, n_points=1001, include=(),
          schedule_ref="", target_ref=""):
    """Both error metrics at ``n_points`` uniform parameter values.

    Values in ``include`` (e.g. the optimization grid) are merged in exactly,
    replacing uniform samples that coincide with them within 1e-12.
    """
    if system.n_params != 1:
        raise ValueError("sweeps are defined for one-parameter systems")
    if n_points < 2:
        raise ValueError("a sweep needs at least two points")
    lo, hi = interval if interval is not None else system.param_domain[0]
    omegas = np.linspace(float(lo), float(hi), int(n_points))
    extra = np.asarray(include, dtype=float).ravel()
    grid_mask = np.zeros(omegas.size, dtype=bool)
    for w in extra:
        close = np.flatnonzero(np.abs(omegas - w) <= 1e-12)
        if close.size:
            omegas[close[0]] = w
            grid_mask[close[0]] = True
        else:
            omegas = np.append(omegas, w)
            grid_mask = np.append(grid_mask, True)
    order = np.argsort(omegas, kind="stable")
    omegas, grid_mask = omegas[order], grid_mask[order]
    params = omegas[:, None]
    pi = point_errors(system, params, target, schedule, "phase_insensitive", extrapolate=True)
    lit = point_errors(system, params, target, schedule, "literal", extrapolate=True)
    return ErrorSpectrum(omegas, lit, pi, grid_mask, schedule.total_time,
                         system.drift_slope_norm()[0], schedule_ref, target_ref)


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def bound_check(system, schedule, omega_a, omega_b, extrapolate=False):
    """Compare ``||U_a(T) - U_b(T)||`` with ``T ||H_d(a) - H_d(b)||``."""
    ua = propagate(system, omega_a, schedule, extrapolate)
    ub = propagate(system, omega_b, schedule, extrapolate)
    lhs = op_norm(ua - ub)
    rhs = schedule.total_time * op_norm(system.drift(omega_a, extrapolate)
                                        - system.drift(omega_b, extrapolate))
    return BoundCheck(lhs, rhs, bool(lhs <= rhs + 1e-9))


def nearest_grid_distance(grid, omega):
    return float(np.min(np.abs(grid.points - omega)))


@dataclass
class MinTimeRow:
    N: int
    epsilon: float
    T: int
    converged: bool
    restarts_used: int
    wall_time_s: float


@dataclass
class MinTimeTable:
    rows: list = field(default_factory=list)

    def lookup(self, n, eps):
        for r in self.rows:
            if r.N == n and r.epsilon == eps:
                return r
        raise KeyError((n, eps))

    def is_monotone(self):
        """For each N, T does not increase as epsilon grows."""
        for n in {r.N for r in self.rows}:
            rows = sorted((r for r in self.rows if r.N == n), key=lambda r: r.epsilon)
            if any(a.T < b.T for a, b in zip(rows, rows[1:])):
                return False
        return True


def _cell_key(n, eps):
    return f"N={n},eps={eps!r}"


def min_control_time(system, interval, target, epsilons, n_values, t_max, config=None,
                     checkpoint=None, run_key="", log=None):
    """Smallest integer control time reaching each allowed error on each grid.

    For every ``N`` the allowed errors are visited from largest to smallest and
    the search for a smaller error starts at the time found for the previous
    one, so ``T`` is monotone in the error by construction. ``checkpoint`` is a
    JSON file of finished cells; cells already present are not recomputed.
    """
    epsilons = [float(e) for e in epsilons]
    n_values = [int(n) for n in n_values]
    if not n_values or not epsilons:
        raise ValueError("need at least one N and one epsilon")
    if any(a <= b for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("epsilons must be sorted in strictly descending order")
    if int(t_max) < 1:
        raise ValueError("t_max must be >= 1")
    cfg = config or OptimizerConfig()
    lo, hi = interval

    done = {}
    if checkpoint and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            saved = json.load(fh)
        if saved.get("run_key") == run_key:
            done = saved.get("cells", {})

    def save():
        if checkpoint:
            tmp = f"{checkpoint}.tmp"
            with open(tmp, "w") as fh:
                json.dump({"run_key": run_key, "cells": done}, fh, indent=1)
            os.replace(tmp, checkpoint)

    table = MinTimeTable()
    for n in n_values:
        grid = make_grid(lo, hi, n)
        t_start = 1
        for eps in epsilons:
            key = _cell_key(n, eps)
            if key in done:
                row = MinTimeRow(**done[key])
            else:
                t0 = time.perf_counter()
                row = None
                for t in range(t_start, int(t_max) + 1):
                    rep = optimize(system, grid, target, cfg.replace(total_time=float(t), threshold=eps))
                    if log:
                        log(f"N={n} eps={eps:g} T={t} max_error={rep.max_error:.3e}"
                            f" converged={rep.converged}")
                    if rep.converged:
                        row = MinTimeRow(n, eps, t, True, rep.restarts_used, 0.0)
                        break
                if row is None:
                    row = MinTimeRow(n, eps, int(t_max), False, cfg.restarts, 0.0)
                row.wall_time_s = time.perf_counter() - t0
                done[key] = asdict(row)
                save()
            table.rows.append(row)
            t_start = row.T
    return table
