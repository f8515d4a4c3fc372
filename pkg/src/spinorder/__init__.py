"""Order-parameter detection for spin-1/2 chains from block density matrices."""

__version__ = "0.1.0"

from .estimator import OrderParameterFinder
from .exceptions import CapacityError, ConvergenceError, InvalidInputError
from .hilbert import Block, DensityMatrix, SpinBasis, StateVector, joint_rdm, partial_trace
from .mi import min_block_scan, mi_profile, mutual_information, p_matrix
from .models import heisenberg, lanczos_ground_state, load_model, majumdar_ghosh, xxz
from .orderparam import (
    construct_diagonal,
    construct_offdiagonal,
    correlation_profile,
    detect_offdiagonal_pairs,
    extract_mode,
    rank_of,
)

__all__ = [
    "Block",
    "CapacityError",
    "ConvergenceError",
    "DensityMatrix",
    "InvalidInputError",
    "OrderParameterFinder",
    "SpinBasis",
    "StateVector",
    "construct_diagonal",
    "construct_offdiagonal",
    "correlation_profile",
    "detect_offdiagonal_pairs",
    "extract_mode",
    "heisenberg",
    "joint_rdm",
    "lanczos_ground_state",
    "load_model",
    "majumdar_ghosh",
    "mi_profile",
    "min_block_scan",
    "mutual_information",
    "p_matrix",
    "partial_trace",
    "rank_of",
    "xxz",
]
