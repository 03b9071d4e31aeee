"""Command-line front end.

Settings come from built-in defaults, then an optional JSON ``--config``
file, then command-line flags (highest precedence). Config keys are the long
flag names with dashes replaced by underscores.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from robustctl import files, plotting
from robustctl.algebra import recurrence_defect, recurrence_time
from robustctl.ensemble import lemma_check, make_grid
from robustctl.evaluate import min_control_time, sweep
from robustctl.gates import resolve_gate
from robustctl.grape import METRICS, OptimizerConfig, optimize
from robustctl.models import resolve_system
from robustctl.polyapprox import sup_error_table

log = logging.getLogger("robustctl")

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    system: str = "A"
    omega0: float = None
    omega1: float = None
    n_points: int = 11
    target: str = "CNOT"
    total_time: float = 32.0
    segments: int = 128
    metric: str = "phase_insensitive"
    restarts: int = 20
    max_iter: int = 2000
    threshold: float = 1e-4
    seed: int = 0
    amplitude_bound: float = 10.0
    init_scale: float = 1.0
    threads: int = None
    out: str = "out"
    pulse: str = None
    sweep_points: int = 1001
    epsilons: list = field(default_factory=lambda: [1e-2, 1e-3])
    n_values: list = field(default_factory=lambda: [1, 3, 5])
    t_max: int = 40
    checkpoint: str = None
    theta: float = 1.0
    k_max: int = 40
    params: list = None
    eps: float = 1e-6
    horizon: float = 100.0
    dt: float = 1e-3
    plots: bool = True

    def optimizer(self):
        workers = self.threads or os.cpu_count() or 1
        cap = os.environ.get("ROBUSTCTL_THREADS")
        if cap:
            workers = min(workers, max(1, int(cap)))
        return OptimizerConfig(
            total_time=float(self.total_time), n_segments=int(self.segments), metric=self.metric,
            restarts=int(self.restarts), max_iter=int(self.max_iter),
            threshold=float(self.threshold), seed=int(self.seed),
            amplitude_bound=float(self.amplitude_bound), init_scale=float(self.init_scale),
            workers=workers)

    def resolved_system(self):
        system = resolve_system(self.system)
        if system.n_params == 1 and (self.omega0 is not None or self.omega1 is not None):
            lo, hi = system.param_domain[0]
            lo = lo if self.omega0 is None else float(self.omega0)
            hi = hi if self.omega1 is None else float(self.omega1)
            system = system.with_domain((lo, hi))
        return system

    def grid(self, system):
        if system.n_params == 1:
            lo, hi = system.param_domain[0]
            return make_grid(lo, hi, self.n_points)
        return [make_grid(lo, hi, self.n_points) for lo, hi in system.param_domain]


_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return doc


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="robustctl", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with settings")
        sp.add_argument("--system", help="catalog name (A, A-variant, B, C, D, E, 1q-wX, "
                                         "1q-XwY, 1q-XwZ) or path to a system JSON")
        sp.add_argument("--omega0", type=float, help="lower end of the parameter interval")
        sp.add_argument("--omega1", type=float, help="upper end of the parameter interval")
        sp.add_argument("--n-points", type=int, help="grid size N")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--no-plots", dest="plots", action="store_const", const=False, default=None)

    def optim(sp):
        sp.add_argument("--target", help="CNOT, CZ, SWAP, identity or a .npy/.json unitary")
        sp.add_argument("--total-time", type=float)
        sp.add_argument("--segments", type=int)
        sp.add_argument("--metric", choices=METRICS)
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--max-iter", type=int)
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--amplitude-bound", type=float)
        sp.add_argument("--init-scale", type=float)
        sp.add_argument("--threads", type=int)

    sp = sub.add_parser("analyze", help="controllability and lemma conditions on a grid")
    common(sp)
    sp = sub.add_parser("optimize", help="robust pulse search on a grid")
    common(sp)
    optim(sp)
    sp = sub.add_parser("sweep", help="error spectrum of a pulse over the interval")
    common(sp)
    optim(sp)
    sp.add_argument("--pulse", help="pulse CSV (default: <out>/pulse.csv)")
    sp.add_argument("--sweep-points", type=int)
    sp = sub.add_parser("mintime", help="minimum integer control time per (N, epsilon)")
    common(sp)
    optim(sp)
    sp.add_argument("--epsilons", type=_float_list, help="comma list, descending")
    sp.add_argument("--n-values", type=_int_list, help="comma list of grid sizes")
    sp.add_argument("--t-max", type=int)
    sp.add_argument("--checkpoint", help="checkpoint JSON (default: <out>/mintime_checkpoint.json)")
    sp = sub.add_parser("polyfit", help="odd-polynomial approximation of a constant")
    common(sp)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--k-max", type=int)
    sp = sub.add_parser("recurrence", help="recurrence time of the drift")
    common(sp)
    sp.add_argument("--params", type=_float_list, help="drift parameters (default: domain start)")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--horizon", type=float, help="longest time searched")
    sp.add_argument("--dt", type=float)
    return p


def resolve_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for key, val in vars(args).items():
        if key in _KEYS and val is not None:
            values[key] = val
    return RunConfig(**values)


def _outdir(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def cmd_analyze(cfg):
    system = cfg.resolved_system()
    rep = lemma_check(system, cfg.grid(system))
    out = _outdir(cfg)
    doc = rep.to_dict()
    files.write_json(os.path.join(out, "analysis.json"), doc)
    print(f"{system.name}: lie_dim={rep.lie_dims} condition1={rep.condition1} "
          f"condition2={rep.condition2} extended_dim={rep.extended_dim}/{rep.max_extended_dim}")
    return EXIT_OK if rep.condition1 and rep.condition2 else EXIT_NEGATIVE


def cmd_optimize(cfg):
    system = cfg.resolved_system()
    grid = cfg.grid(system)
    target = resolve_gate(cfg.target, system.dim)
    rep = optimize(system, grid, target, cfg.optimizer())
    out = _outdir(cfg)
    doc = {"system": system.name, "target": cfg.target,
           "grid": grid.to_dict() if hasattr(grid, "to_dict") else [g.to_dict() for g in grid],
           "config": cfg.optimizer().to_dict(), **rep.to_dict()}
    files.write_pulse_csv(os.path.join(out, "pulse.csv"), rep.schedule)
    files.write_json(os.path.join(out, "report.json"), doc)
    files.write_json(os.path.join(out, "timing.json"), {"wall_time_s": rep.wall_time})
    if cfg.plots:
        plotting.plot_pulse(rep.schedule, os.path.join(out, "pulse.png"),
                            f"System {system.name}, T = {rep.schedule.total_time:g}")
    print(f"{system.name}: converged={rep.converged} max_error={rep.max_error:.3e} "
          f"restarts_used={rep.restarts_used} iterations={rep.iterations}")
    return EXIT_OK if rep.converged else EXIT_NEGATIVE


def cmd_sweep(cfg):
    system = cfg.resolved_system()
    if system.n_params != 1:
        raise ConfigError("sweep needs a one-parameter system")
    grid = cfg.grid(system)
    target = resolve_gate(cfg.target, system.dim)
    pulse = cfg.pulse or os.path.join(cfg.out, "pulse.csv")
    schedule = files.read_pulse_csv(pulse, n_controls=system.n_controls,
                                    amplitude_bound=cfg.amplitude_bound)
    spec = sweep(system, schedule, target, system.param_domain[0], cfg.sweep_points,
                 include=grid.points, schedule_ref=pulse, target_ref=cfg.target)
    out = _outdir(cfg)
    files.write_spectrum_csv(os.path.join(out, "spectrum.csv"), spec)
    if cfg.plots:
        plotting.plot_spectrum(spec, os.path.join(out, "spectrum.png"), f"System {system.name}")
    print(f"{system.name}: sweep max_error={spec.max_error():.3e} "
          f"certified_bound={spec.certified_bound():.3e} points={spec.omegas.size}")
    return EXIT_OK


def cmd_mintime(cfg):
    system = cfg.resolved_system()
    if system.n_params != 1:
        raise ConfigError("mintime needs a one-parameter system")
    target = resolve_gate(cfg.target, system.dim)
    out = _outdir(cfg)
    ckpt = cfg.checkpoint or os.path.join(out, "mintime_checkpoint.json")
    opt = cfg.optimizer()
    run_key = json.dumps({"system": system.name, "target": cfg.target, "seed": cfg.seed,
                          "config": opt.to_dict(), "interval": system.param_domain[0]},
                         sort_keys=True)
    table = min_control_time(system, system.param_domain[0], target, cfg.epsilons,
                             cfg.n_values, cfg.t_max, opt, checkpoint=ckpt, run_key=run_key,
                             log=log.info)
    files.write_mintime_csv(os.path.join(out, "mintime.csv"), table)
    if cfg.plots:
        plotting.plot_min_time(table, os.path.join(out, "mintime.png"), f"System {system.name}")
    for r in table.rows:
        print(f"N={r.N} eps={r.epsilon:g} T={r.T} converged={r.converged}")
    return EXIT_OK if all(r.converged for r in table.rows) else EXIT_NEGATIVE


def cmd_polyfit(cfg):
    lo = 1.0 if cfg.omega0 is None else cfg.omega0
    hi = 2.0 if cfg.omega1 is None else cfg.omega1
    rows = sup_error_table((lo, hi), cfg.theta, range(cfg.k_max + 1))
    out = _outdir(cfg)
    files.write_polyfit_csv(os.path.join(out, "polyfit.csv"), rows)
    if cfg.plots:
        plotting.plot_polyfit(rows, os.path.join(out, "polyfit.png"),
                              f"theta = {cfg.theta:g} on [{lo:g}, {hi:g}]")
    print(f"[{lo:g}, {hi:g}] theta={cfg.theta:g}: sup_error(K={rows[-1][0]})={rows[-1][1]:.3e}")
    return EXIT_OK


def cmd_recurrence(cfg):
    system = resolve_system(cfg.system)
    params = cfg.params if cfg.params is not None else [lo for lo, _ in system.param_domain]
    h = system.drift(params, extrapolate=True)
    t = recurrence_time(h, cfg.eps, cfg.horizon, cfg.dt)
    doc = {"system": system.name, "params": list(params), "eps": cfg.eps, "horizon": cfg.horizon,
           "dt": cfg.dt, "found": t is not None,
           "time": t, "defect": None if t is None else float(recurrence_defect(h, t))}
    files.write_json(os.path.join(_outdir(cfg), "recurrence.json"), doc)
    print(f"{system.name} at {list(params)}: recurrence time {t}")
    return EXIT_OK if t is not None else EXIT_NEGATIVE


COMMANDS = {
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "mintime": cmd_mintime,
    "polyfit": cmd_polyfit,
    "recurrence": cmd_recurrence,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
