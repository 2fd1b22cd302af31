"""Unusual crowd event detection from call detail records."""

from .model import Antenna, Call, Params, TimeGrid, Trajectory, grid_index_of, validate_params

__version__ = "0.1.0"

__all__ = [
    "Antenna",
    "Call",
    "Params",
    "TimeGrid",
    "Trajectory",
    "grid_index_of",
    "validate_params",
    "__version__",
]
