# Copyright (c) 2026 the ddsyn authors
# SPDX-License-Identifier: Apache-2.0
"""Disturbance-decoupling controller synthesis bindings."""

from ._core import (
    Controller,
    DdsynError,
    LtiSystem,
    PowerGridParams,
    __version__,
    build_power_grid,
    dd_feasible,
    evaluate_controller,
    h2_norm_sq,
    largest_ci_subspace,
    load_controller,
    load_system,
    randomize_grid,
    run_cli,
    save_controller,
    save_system,
    simulate,
    synthesize,
)

__all__ = [
    "Controller",
    "DdsynError",
    "LtiSystem",
    "PowerGridParams",
    "__version__",
    "build_power_grid",
    "dd_feasible",
    "evaluate_controller",
    "h2_norm_sq",
    "largest_ci_subspace",
    "load_controller",
    "load_system",
    "randomize_grid",
    "run_cli",
    "save_controller",
    "save_system",
    "simulate",
    "synthesize",
]
