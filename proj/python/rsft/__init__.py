"""Quenched hitting-time statistics of random subshifts of finite type."""

import json

from ._rsft import (
    CapExceeded,
    DomainError,
    HorizonError,
    Scenario,
    admissible,
    builtin_scenario,
    cylinder_measure,
    designated_word,
    example5,
    exact_survival,
    half_turn_sequence,
    measure_table,
    min_return,
    run,
)

__all__ = [
    "CapExceeded",
    "DomainError",
    "HorizonError",
    "Scenario",
    "admissible",
    "builtin_scenario",
    "cylinder_measure",
    "designated_word",
    "example5",
    "exact_survival",
    "half_turn_sequence",
    "measure_table",
    "min_return",
    "run",
    "run_json",
]


def run_json(command, config, **kwargs):
    """Like run(), but takes the config as a dict and decodes a JSON report."""
    code, out, files, error = run(command, json.dumps(config), **kwargs)
    report = json.loads(out) if out and command != "measure" else out
    return code, report, files, error
