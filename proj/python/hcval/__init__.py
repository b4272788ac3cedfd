"""Validation toolkit for multi-level personalized health-condition models.

Thin Python layer over the native module: parse condition models and
scenarios, decide delta-satisfiability, emit SMT-LIB 2, run the
validation battery, and monitor recorded traces.
"""

from ._hcval import (  # noqa: F401
    Model,
    Scenario,
    analyze,
    emit_smtlib,
    monitor,
    parse_model,
    parse_scenario,
    print_model,
    solve,
)

__all__ = [
    "Model",
    "Scenario",
    "analyze",
    "emit_smtlib",
    "monitor",
    "parse_model",
    "parse_scenario",
    "print_model",
    "solve",
]
