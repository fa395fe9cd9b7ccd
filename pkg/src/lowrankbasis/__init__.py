"""Low-rank bases of matrix subspaces.

Given a subspace of m x n matrices, find a basis whose elements have ranks
as small as possible. The greedy solver estimates each element's rank by
singular value soft thresholding and then refines it by alternating
projections; a CP-decomposition route handles subspaces known to have a
rank-one basis.
"""
from .cp import CpFactors, Tensor3, als_refine, leurgans_decompose, rank_one_basis_via_cp
from .estimator import CPRankOneBasis, LowRankBasis
from .exceptions import (CPFailure, DegenerateIterateError, LowRankBasisError, MatrixFileError,
                         NonGenericError, RankDeficientError, SubspaceExhaustedError)
from .greedy import BasisResult, SolverConfig, solve_low_rank_basis
from .phase1 import Phase1Config, estimate_rank
from .phase2 import Phase2Config, refine_to_rank
from .problems import SyntheticSpec, generate_synthetic
from .subspace import MatrixSubspace, build_subspace, subspace_angle
from .trace import IterationTrace, summarize

__version__ = "0.1.0"

__all__ = [
    "CpFactors", "Tensor3", "als_refine", "leurgans_decompose", "rank_one_basis_via_cp",
    "CPRankOneBasis", "LowRankBasis",
    "CPFailure", "DegenerateIterateError", "LowRankBasisError", "MatrixFileError",
    "NonGenericError", "RankDeficientError", "SubspaceExhaustedError",
    "BasisResult", "SolverConfig", "solve_low_rank_basis",
    "Phase1Config", "estimate_rank", "Phase2Config", "refine_to_rank",
    "SyntheticSpec", "generate_synthetic",
    "MatrixSubspace", "build_subspace", "subspace_angle",
    "IterationTrace", "summarize",
]
