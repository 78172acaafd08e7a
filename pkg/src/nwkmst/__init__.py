"""Approximation toolkit for the node-weighted quota Steiner tree problem."""

from .errors import (GuessRejected, InfeasibleError, InstanceError,
                     InvariantViolation, NwkmstError, UnreachableError)
from .instance import TOL, Instance, Solution, load_instance
from .solver import SolveConfig, SolveReport, solve

__all__ = [
    "TOL", "Instance", "Solution", "load_instance", "SolveConfig",
    "SolveReport", "solve", "NwkmstError", "InstanceError", "InfeasibleError",
    "UnreachableError", "GuessRejected", "InvariantViolation",
]
__version__ = "0.1.0"
