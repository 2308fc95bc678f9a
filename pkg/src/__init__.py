# src/__init__.py

"""
PINN Benchmark Package Initialization

Exposes configuration management, logging and the run pipeline; the solver
building blocks live in their own modules (autodiff, network, optimizer,
tableau, refsolve, continuous_time, discrete_time).
"""

from .config_manager import ConfigManager, RunConfig
from .custom_logger import log
from .pipeline import run_pipeline
from .prompter import Prompter

__all__ = [
    "ConfigManager",
    "RunConfig",
    "log",
    "run_pipeline",
    "Prompter",
]
