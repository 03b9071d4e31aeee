"""Parametrized control systems.

A system is ``H(t) = H_d(p) + sum_k u_k(t) H_k`` where the drift depends
affinely on a vector of unknown real parameters ``p``::

    H_d(p) = H_0 + sum_j p_j D_j

Systems are described by small JSON documents of Pauli-string terms, e.g.::

    {"dim": 4,
     "params": [{"name": "omega", "min": 1, "max": 2}],
     "drift": [{"pauli": "XI", "param": "omega"},
               {"pauli": "XX", "coeff": 1}],
     "controls": [[{"pauli": "ZI", "coeff": 1}]]}

A drift term may carry both ``param`` and ``coeff``; the coefficient then
multiplies the parameter.
"""

import json
import numbers
import os
from dataclasses import dataclass, replace

import numpy as np

from robustctl.qmat import HERMITIAN_TOL, is_hermitian, pauli


class SystemDefinitionError(ValueError):
    """A system-definition document could not be turned into a system."""


class DomainError(ValueError):
    """Parameters outside the declared domain."""


@dataclass(frozen=True, eq=False)
class ControlSystem:
    name: str
    dim: int
    drift_offset: np.ndarray
    drift_terms: tuple  # one Hermitian matrix per parameter
    controls: tuple
    param_names: tuple
    param_domain: tuple  # ((lo, hi), ...)

    def __post_init__(self):
        mats = [self.drift_offset, *self.drift_terms, *self.controls]
        for m in mats:
            if m.shape != (self.dim, self.dim):
                raise SystemDefinitionError(
                    f"{self.name}: operator of shape {m.shape}, expected dim {self.dim}")
            if not is_hermitian(m, HERMITIAN_TOL):
                raise SystemDefinitionError(f"{self.name}: non-Hermitian operator")
        if len(self.drift_terms) != len(self.param_names):
            raise SystemDefinitionError("one drift term per parameter required")
        if len(self.param_domain) != len(self.param_names):
            raise SystemDefinitionError("one domain interval per parameter required")
        for lo, hi in self.param_domain:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise SystemDefinitionError(f"bad parameter interval [{lo}, {hi}]")

    @property
    def n_params(self):
        return len(self.param_names)

    @property
    def n_controls(self):
        return len(self.controls)

    def check_params(self, params, extrapolate=False):
        p = np.atleast_1d(np.asarray(params, dtype=float))
        if p.shape != (self.n_params,):
            raise DomainError(
                f"{self.name} takes {self.n_params} parameter(s), got {p.shape[0]}")
        if not extrapolate:
            for v, name, (lo, hi) in zip(p, self.param_names, self.param_domain):
                if not lo <= v <= hi:
                    raise DomainError(f"{name}={v} outside [{lo}, {hi}]")
        return p

    def drift(self, params, extrapolate=False):
        p = self.check_params(params, extrapolate)
        h = self.drift_offset.copy()
        for v, term in zip(p, self.drift_terms):
            h = h + v * term
        return h

    def drift_slope_norm(self):
        """Operator norm of dH_d/dp for each parameter."""
        return tuple(float(np.linalg.norm(t, 2)) for t in self.drift_terms)

    def with_domain(self, *intervals):
        dom = tuple((float(lo), float(hi)) for lo, hi in intervals)
        return replace(self, param_domain=dom)

    def to_document(self):
        """Pauli-decomposed definition document (inverse of ``load_system``)."""
        n_qubits = int(round(np.log2(self.dim)))
        labels = _pauli_labels(n_qubits)

        def decompose(m):
            out = []
            for lab in labels:
                c = np.vdot(pauli(lab), m).real / self.dim
                if abs(c) > 1e-14:
                    out.append((lab, float(c)))
            return out

        drift = [{"pauli": lab, "coeff": c} for lab, c in decompose(self.drift_offset)]
        for name, term in zip(self.param_names, self.drift_terms):
            drift += [{"pauli": lab, "param": name, "coeff": c} for lab, c in decompose(term)]
        return {
            "name": self.name,
            "dim": self.dim,
            "params": [{"name": n, "min": lo, "max": hi}
                       for n, (lo, hi) in zip(self.param_names, self.param_domain)],
            "drift": drift,
            "controls": [[{"pauli": lab, "coeff": c} for lab, c in decompose(h)]
                         for h in self.controls],
        }


def eval_drift(system, params, extrapolate=False):
    return system.drift(params, extrapolate)


def _pauli_labels(n_qubits):
    labels = [""]
    for _ in range(n_qubits):
        labels = [a + b for a in labels for b in "IXYZ"]
    return labels


def _real_coeff(value, where):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise SystemDefinitionError(
            f"{where}: coefficient {value!r} is not real; the term would not be Hermitian")
    if not np.isfinite(value):
        raise SystemDefinitionError(f"{where}: non-finite coefficient")
    return float(value)


def _pauli_term(label, dim, where):
    if not isinstance(label, str) or not label:
        raise SystemDefinitionError(f"{where}: missing Pauli label")
    if any(c not in "IXYZ" for c in label.upper()):
        raise SystemDefinitionError(f"{where}: unknown Pauli label {label!r}")
    if 2 ** len(label) != dim:
        raise SystemDefinitionError(f"{where}: label {label!r} does not match dim {dim}")
    return pauli(label)


def load_system(doc, name=None):
    """Build a :class:`ControlSystem` from a definition document.

    ``doc`` may be a dict, a JSON string or a path to a JSON file.
    """
    if isinstance(doc, (str, os.PathLike)):
        text = str(doc)
        try:
            if os.path.exists(text):
                with open(text) as fh:
                    doc = json.load(fh)
            else:
                doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SystemDefinitionError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SystemDefinitionError("system definition must be a JSON object")
    try:
        dim = int(doc["dim"])
        params = doc.get("params", [])
        drift_doc = doc["drift"]
        controls_doc = doc["controls"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SystemDefinitionError(f"malformed system definition: {exc}") from exc
    if dim < 2 or dim & (dim - 1):
        raise SystemDefinitionError(f"dim must be a power of two, got {dim}")

    names, domain = [], []
    for p in params:
        try:
            names.append(str(p["name"]))
            domain.append((_real_coeff(p["min"], "param min"), _real_coeff(p["max"], "param max")))
        except (KeyError, TypeError) as exc:
            raise SystemDefinitionError(f"malformed parameter entry {p!r}") from exc
    if len(set(names)) != len(names):
        raise SystemDefinitionError("duplicate parameter names")

    offset = np.zeros((dim, dim), dtype=complex)
    terms = [np.zeros((dim, dim), dtype=complex) for _ in names]
    for i, term in enumerate(drift_doc):
        where = f"drift[{i}]"
        if not isinstance(term, dict):
            raise SystemDefinitionError(f"{where}: expected an object")
        mat = _pauli_term(term.get("pauli"), dim, where)
        coeff = _real_coeff(term.get("coeff", 1.0), where)
        if "param" in term:
            if term["param"] not in names:
                raise SystemDefinitionError(f"{where}: unknown parameter {term['param']!r}")
            terms[names.index(term["param"])] += coeff * mat
        else:
            if "coeff" not in term:
                raise SystemDefinitionError(f"{where}: needs 'coeff' or 'param'")
            offset += coeff * mat

    controls = []
    for k, ctrl in enumerate(controls_doc):
        if isinstance(ctrl, dict):
            ctrl = [ctrl]
        h = np.zeros((dim, dim), dtype=complex)
        for j, term in enumerate(ctrl):
            where = f"controls[{k}][{j}]"
            if not isinstance(term, dict):
                raise SystemDefinitionError(f"{where}: expected an object")
            h += _real_coeff(term.get("coeff", 1.0), where) * _pauli_term(term.get("pauli"), dim, where)
        controls.append(h)

    return ControlSystem(
        name=name or str(doc.get("name", "custom")),
        dim=dim,
        drift_offset=offset,
        drift_terms=tuple(terms),
        controls=tuple(controls),
        param_names=tuple(names),
        param_domain=tuple(domain),
    )


def _doc(dim, params, drift, controls):
    return {
        "dim": dim,
        "params": [{"name": n, "min": lo, "max": hi} for n, lo, hi in params],
        "drift": [{"pauli": p, **({"param": c} if isinstance(c, str) else {"coeff": c})}
                  for p, c in drift],
        "controls": [[{"pauli": p, "coeff": 1.0}] for p in controls],
    }


_OMEGA = [("omega", 1.0, 2.0)]
_HEIS = [("XX", 1.0), ("YY", 1.0), ("ZZ", 1.0)]
_HEIS_W = [("XX", "omega"), ("YY", "omega"), ("ZZ", "omega")]

CATALOG = {
    "A": _doc(4, _OMEGA, [("XI", "omega"), *_HEIS], ["ZI"]),
    "A-variant": _doc(4, _OMEGA, [("XI", 1.0), ("YI", "omega"), *_HEIS], ["ZI"]),
    "B": _doc(4, _OMEGA, [("XI", 1.0), ("IX", 1.0), ("XX", "omega"), ("YY", "omega")], ["ZI"]),
    "C": _doc(4, _OMEGA, _HEIS_W, ["XI", "ZI"]),
    "D": _doc(4, [("nu", 0.0, 1.0), *_OMEGA], [("XI", "nu"), *_HEIS_W], ["XI", "ZI"]),
    "E": _doc(4, _OMEGA, [("XI", 1.0), *_HEIS_W], ["ZI"]),
    "1q-wX": _doc(2, _OMEGA, [("X", "omega")], ["Z"]),
    "1q-XwY": _doc(2, _OMEGA, [("X", 1.0), ("Y", "omega")], ["Z"]),
    "1q-XwZ": _doc(2, _OMEGA, [("X", 1.0), ("Z", "omega")], ["Z"]),
}


def build_named(name):
    """Catalog system by identifier (see ``CATALOG``)."""
    try:
        doc = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; choose from {sorted(CATALOG)}") from None
    return load_system(doc, name=name)


def resolve_system(spec):
    """Catalog name or path to a definition document."""
    if isinstance(spec, ControlSystem):
        return spec
    if spec in CATALOG:
        return build_named(spec)
    if os.path.exists(str(spec)):
        return load_system(spec, name=os.path.splitext(os.path.basename(str(spec)))[0])
    raise KeyError(f"unknown system {spec!r}; choose from {sorted(CATALOG)} or give a JSON path")
