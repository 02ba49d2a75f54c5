"""Configuration, pipelines, writers and the command line front end."""

from .config import ConfigError, RunConfig, dumps_config, load_config
from .pipeline import (
    CellResult,
    MacroResult,
    StudyReport,
    StudyRow,
    run_cell,
    run_cell_report,
    run_convergence_study,
    run_macro,
    run_micro,
)

__all__ = [
    "ConfigError", "RunConfig", "dumps_config", "load_config",
    "CellResult", "MacroResult", "StudyReport", "StudyRow",
    "run_cell", "run_cell_report", "run_convergence_study", "run_macro", "run_micro",
]
