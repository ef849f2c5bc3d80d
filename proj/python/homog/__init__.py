"""Two-scale expansion experiments for periodic elliptic problems."""

import json

from ._homog import (
    ConfigError,
    HomogError,
    Scenario,
    effective_coefficient_1d,
    evaluate_function,
    fit_slope,
    load_scenario,
    load_scenario_file,
    load_scenarios,
    report_csv,
    verify,
)
from . import _homog


def run_study(scenario, workers=1, timing=False):
    """Convergence study as a dict: rows, slopes and summaries."""
    return json.loads(_homog.run_study_json(scenario, workers, timing))["reports"][0]


def effective_table(scenario):
    """Tensor rows (linear) or F_bar rows (nonlinear)."""
    return json.loads(_homog.effective_table_json(scenario))


__all__ = [
    "ConfigError",
    "HomogError",
    "Scenario",
    "effective_coefficient_1d",
    "effective_table",
    "evaluate_function",
    "fit_slope",
    "load_scenario",
    "load_scenario_file",
    "load_scenarios",
    "report_csv",
    "run_study",
    "verify",
]
