"""Bootstrap test for ARCH(1) volatility in clustered panels of time series."""

from .baseline import Arch1MleFit, LrTestResult, fit_arch1_mle, lr_test_arch
from .dgp import ArchConfig, ScenarioConfig, scenario_catalog, simulate_panel
from .estimation import BackfitOptions, FittedModel, backfit
from .montecarlo import SizePowerRow, run_misclassification, run_scenario
from .nptest import TestOptions, VolatilityTestResult, bootstrap_test
from .panel import Panel, first_difference, ols_fit, percentile

__version__ = "0.1.0"

__all__ = [
    "Arch1MleFit",
    "ArchConfig",
    "BackfitOptions",
    "FittedModel",
    "LrTestResult",
    "Panel",
    "ScenarioConfig",
    "SizePowerRow",
    "TestOptions",
    "VolatilityTestResult",
    "backfit",
    "bootstrap_test",
    "first_difference",
    "fit_arch1_mle",
    "lr_test_arch",
    "ols_fit",
    "percentile",
    "run_misclassification",
    "run_scenario",
    "scenario_catalog",
    "simulate_panel",
]
