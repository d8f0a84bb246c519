"""Locally c-optimal stress levels for accelerated degradation tests.

Degradation is modelled by a gamma process, two independent gamma processes,
or a gamma process together with a random-intercept linear mixed model.  The
design criterion is the asymptotic variance of an estimated quantile of the
failure-time distribution under normal use.
"""
__version__ = "0.1.0"

from .config import ConfigError, bundled_config_path, load_config, parse_config
from .criterion import absolute_avar, avar, build_criterion, efficiency
from .design import Design, two_point, uniform
from .failure_time import (
    Family,
    NoFailureRegionError,
    Scenario,
    gradient_constants,
    marginal_quantiles,
    quantile,
    system_cdf,
    system_pdf,
)
from .gamma_model import GammaComponentParams, MeasurementSchedule
from .lmem_model import LmemComponentParams
from .mc_validate import SimConfig, empirical_avar_check
from .optimizer import (
    elfving_weight,
    multiplicative_optimize,
    optimality_certificate,
    two_point_search,
)
from .sweep import run_sweep

__all__ = [
    "ConfigError", "Design", "Family", "GammaComponentParams", "LmemComponentParams",
    "MeasurementSchedule", "NoFailureRegionError", "Scenario", "SimConfig",
    "absolute_avar", "avar", "build_criterion", "bundled_config_path", "efficiency",
    "elfving_weight", "empirical_avar_check", "gradient_constants", "load_config",
    "marginal_quantiles", "multiplicative_optimize", "optimality_certificate",
    "parse_config", "quantile", "run_sweep", "system_cdf", "system_pdf", "two_point",
    "two_point_search", "uniform",
]
