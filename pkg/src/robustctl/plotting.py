"""Figures written next to the CSV outputs."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 11,
    "axes.labelsize": 12,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_spectrum(spectrum, path, title=None):
    """Error against the unknown parameter; grid points drawn as dots."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        floor = 1e-16
        ax.semilogy(spectrum.omegas, np.maximum(spectrum.errors_phase_insensitive, floor),
                    "k-", lw=1.2, label="phase insensitive")
        ax.semilogy(spectrum.omegas, np.maximum(np.abs(spectrum.errors_literal), floor),
                    color="0.6", lw=0.8, ls="--", label="literal")
        g = spectrum.is_grid_point
        if g.any():
            ax.semilogy(spectrum.omegas[g], np.maximum(spectrum.errors_phase_insensitive[g], floor),
                        "ko", ms=4, label="grid")
        ax.set_xlabel(r"$\omega$")
        ax.set_ylabel(r"$\epsilon(\omega)$")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, fontsize=9)
        return _save(fig, path)


def plot_pulse(schedule, path, title=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        edges = schedule.edges()
        for k, amps in enumerate(schedule.amplitudes):
            ax.stairs(amps, edges, lw=1.0, label=f"control {k}")
        ax.axhline(0.0, color="0.5", lw=0.5)
        ax.set_xlabel("$t$")
        ax.set_ylabel("amplitude")
        ax.set_xlim(edges[0], edges[-1])
        if schedule.n_controls > 1:
            ax.legend(frameon=False, fontsize=9)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_min_time(table, path, title=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for eps in sorted({r.epsilon for r in table.rows}, reverse=True):
            rows = sorted((r for r in table.rows if r.epsilon == eps), key=lambda r: r.N)
            ns = [r.N for r in rows]
            ts = [r.T for r in rows]
            line, = ax.plot(ns, ts, "-", lw=1.0, label=f"$\\varepsilon$ = {eps:g}")
            ok = [r.converged for r in rows]
            ax.plot([n for n, c in zip(ns, ok) if c], [t for t, c in zip(ts, ok) if c],
                    "o", color=line.get_color(), ms=4)
            ax.plot([n for n, c in zip(ns, ok) if not c], [t for t, c in zip(ts, ok) if not c],
                    "x", color=line.get_color(), ms=6)
        ax.set_xlabel("$N$")
        ax.set_ylabel(r"$T_\varepsilon(N)$")
        ax.legend(frameon=False, fontsize=9)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_polyfit(rows, path, title=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ks = [k for k, _ in rows]
        errs = [max(e, 1e-17) for _, e in rows]
        ax.semilogy(ks, errs, "ko-", ms=3, lw=1.0)
        ax.set_xlabel("$K$")
        ax.set_ylabel("sup error")
        if title:
            ax.set_title(title)
        return _save(fig, path)
