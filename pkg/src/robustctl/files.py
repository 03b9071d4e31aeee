"""CSV and JSON writers/readers for pulses, spectra and tables.

CSVs are comma separated with a header row and LF line endings; floats are
written as their shortest round-trip decimal (``repr``).
"""

import csv
import json

import numpy as np

from robustctl.grape import PulseSchedule


class SchemaError(ValueError):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


PULSE_HEADER = ["segment_index", "t_start", "t_end"]


def write_pulse_csv(path, schedule):
    edges = schedule.edges()
    header = PULSE_HEADER + [f"amp_{k}" for k in range(schedule.n_controls)]
    rows = ([m, edges[m], edges[m + 1], *schedule.amplitudes[:, m]]
            for m in range(schedule.n_segments))
    write_csv(path, header, rows)


def read_pulse_csv(path, n_controls=None, amplitude_bound=10.0):
    """Schedule from a pulse CSV; checks the column layout and uniform segments."""
    header, rows = read_csv(path)
    if header[:3] != PULSE_HEADER or len(header) < 4:
        raise SchemaError(f"{path}: expected columns {PULSE_HEADER} + amplitude columns")
    k = len(header) - 3
    if n_controls is not None and k != n_controls:
        raise SchemaError(f"{path}: {k} amplitude column(s), system has {n_controls} control(s)")
    if not rows:
        raise SchemaError(f"{path}: no segments")
    try:
        data = [[float(x) for x in row] for row in rows]
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric entry ({exc})") from exc
    if any(len(r) != len(header) for r in data):
        raise SchemaError(f"{path}: ragged rows")
    arr = np.array(data)
    if not np.array_equal(arr[:, 0], np.arange(len(rows))):
        raise SchemaError(f"{path}: segment_index must run 0..M-1")
    total = arr[-1, 2]
    sched = PulseSchedule(total, arr[:, 3:].T.copy(), amplitude_bound)
    if not np.allclose(arr[:, 1:3], np.column_stack([sched.edges()[:-1], sched.edges()[1:]]),
                       rtol=1e-12, atol=1e-12):
        raise SchemaError(f"{path}: segments are not uniform")
    return sched


def write_spectrum_csv(path, spectrum):
    rows = zip(spectrum.omegas, spectrum.errors_literal, spectrum.errors_phase_insensitive,
               spectrum.is_grid_point)
    write_csv(path, ["omega", "error_literal", "error_phase_insensitive", "is_grid_point"], rows)


def write_mintime_csv(path, table):
    write_csv(path, ["N", "epsilon", "T", "converged", "restarts_used", "wall_time_s"],
              ([r.N, r.epsilon, r.T, r.converged, r.restarts_used, r.wall_time_s]
               for r in table.rows))


def write_polyfit_csv(path, rows):
    write_csv(path, ["K", "sup_error"], rows)
