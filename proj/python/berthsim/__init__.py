"""Discrete-event simulation of construction operations."""

from ._core import (
    CalibrationFailed,
    DeadlockError,
    Error,
    Model,
    ModelError,
    Phase,
    Scenario,
    apply_scenario,
    calibrate,
    crash,
    load_model,
    parse_model,
    parse_scenarios,
    reference_costs_text,
    reference_model,
    replicate,
    resource_ladder,
    run,
    sweep,
    uncertainty_ladder,
)

__all__ = [
    "CalibrationFailed",
    "DeadlockError",
    "Error",
    "Model",
    "ModelError",
    "Phase",
    "Scenario",
    "apply_scenario",
    "calibrate",
    "crash",
    "load_model",
    "parse_model",
    "parse_scenarios",
    "reference_costs_text",
    "reference_model",
    "replicate",
    "resource_ladder",
    "run",
    "sweep",
    "uncertainty_ladder",
]
