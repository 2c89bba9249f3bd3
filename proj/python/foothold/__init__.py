"""Python access to the foothold simulator, controller and sweep harness."""

import json

from ._core import (
    FootholdError,
    RunResult,
    Scenario,
    compute_icp,
    convex_hull,
    load_scenario,
    parse_scenario,
    run_scenario,
    run_sweep,
    solve_qp,
)


def metrics(result):
    """Metrics of a run as a dict."""
    return json.loads(result.metrics_json())


def sidecar(result):
    return json.loads(result.sidecar_json())


__all__ = [
    "FootholdError",
    "RunResult",
    "Scenario",
    "compute_icp",
    "convex_hull",
    "load_scenario",
    "metrics",
    "parse_scenario",
    "run_scenario",
    "run_sweep",
    "sidecar",
    "solve_qp",
]
