"""Named target gates in the computational basis."""

import json

import numpy as np

from robustctl.qmat import is_unitary

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

NAMED = {"CNOT": CNOT, "CZ": CZ, "SWAP": SWAP}


def named_gate(name, dim=4):
    key = name.upper()
    if key in ("I", "IDENTITY", "ID"):
        return np.eye(dim, dtype=complex)
    try:
        return NAMED[key].copy()
    except KeyError:
        raise KeyError(f"unknown gate {name!r}; choose from {sorted(NAMED)} or identity") from None


def load_gate(path, tol=1e-8):
    """Unitary from a ``.npy`` file or JSON ``[[re, im], ...]`` rows / ``{"re": ..., "im": ...}``."""
    path = str(path)
    if path.endswith(".npy"):
        u = np.load(path).astype(complex)
    else:
        with open(path) as fh:
            doc = json.load(fh)
        if isinstance(doc, dict):
            u = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc.get("im", 0.0), dtype=float)
        else:
            arr = np.asarray(doc, dtype=float)
            u = arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 else arr.astype(complex)
    if u.ndim != 2 or not is_unitary(u, tol):
        raise ValueError(f"{path}: target is not a unitary matrix (tol {tol})")
    return u


def resolve_gate(spec, dim=4):
    try:
        return named_gate(spec, dim)
    except KeyError:
        return load_gate(spec)
