"""Free boundary logistic spreading under a shifting climate."""
from .errors import ConvergenceError, PreconditionError, SolverError, TrivialBranchError
from .model import ClimateProfile, ExpansionRate, InitialData, ModelParams, make_initial_bump, validate

__version__ = "0.1.0"

__all__ = [
    "ClimateProfile",
    "ConvergenceError",
    "ExpansionRate",
    "InitialData",
    "ModelParams",
    "PreconditionError",
    "SolverError",
    "TrivialBranchError",
    "make_initial_bump",
    "validate",
]
