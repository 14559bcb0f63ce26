# SPDX-License-Identifier: Apache-2.0
"""Finite-blocklength URLLC-OFDMA resource allocation."""

import json

from ._core import (
    Dims,
    ProblemInstance,
    QoSProfile,
    SolveReport,
    SolverConfig,
    check_feasible,
    default_penalty,
    fbl,
    generate_instance,
    oracle_solve,
    sca_solve,
    scheme_names,
    solve_benchmark1,
    solve_benchmark2,
    solve_scheme,
    solve_upper_bound,
)

__all__ = [
    "Dims",
    "ProblemInstance",
    "QoSProfile",
    "SolveReport",
    "SolverConfig",
    "check_feasible",
    "default_penalty",
    "fbl",
    "generate_instance",
    "oracle_solve",
    "run_experiment",
    "sca_solve",
    "scheme_names",
    "solve_benchmark1",
    "solve_benchmark2",
    "solve_scheme",
    "solve_upper_bound",
]


def run_experiment(axis="p_max_dbm", preset="desk", **overrides):
    """Run a sweep; keyword overrides use the JSON config keys. Returns the result table as a dict."""
    from ._core import _run_experiment_json

    overlay = json.dumps(overrides) if overrides else ""
    return json.loads(_run_experiment_json(axis, preset, overlay))
