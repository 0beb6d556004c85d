"""Cutoff equilibria of a two-stage status-signaling group-choice game."""
from .model import ModelSpec, Policy, scenario_s1, validate
from .payoffs import CutoffProfile, sigma
from .solver import SolverOptions, multistart_scan, solve_equilibrium
from .statics import ift_derivatives, statics_report

__version__ = "0.1.0"
__all__ = [
    "CutoffProfile", "ModelSpec", "Policy", "SolverOptions", "ift_derivatives", "multistart_scan",
    "scenario_s1", "sigma", "solve_equilibrium", "statics_report", "validate",
]
