"""Robust control analysis and pulse synthesis for few-qubit systems with
unknown drift parameters."""

from robustctl.models import ControlSystem, build_named, load_system
from robustctl.ensemble import ParameterGrid, make_grid, extend, lemma_check
from robustctl.grape import (
    OptimizerConfig,
    OptimizationReport,
    PulseSchedule,
    gate_error,
    optimize,
    propagate,
)

__version__ = "0.1.0"

__all__ = [
    "ControlSystem",
    "build_named",
    "load_system",
    "ParameterGrid",
    "make_grid",
    "extend",
    "lemma_check",
    "OptimizerConfig",
    "OptimizationReport",
    "PulseSchedule",
    "gate_error",
    "optimize",
    "propagate",
]
