"""Greedy driver: find low-rank basis elements one at a time.

For each new element a random start is drawn from the complement of the
elements found so far (inside the subspace); Phase I estimates a rank and
Phase II refines to a matrix of that rank. Restart checks every
``restartit`` iterations keep the new element independent of the previous
ones.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import LowRankBasisError
from .kernels import svd, truncation_error, vec
from .phase1 import Phase1Config, estimate_rank
from .phase2 import Phase2Config, refine_to_rank
from .subspace import complement_projector, project, random_element, subspace_angle
from .subspace import restart_check as _restart
from .trace import IterationTrace

__all__ = [
    "SolverConfig",
    "BasisElement",
    "BasisResult",
    "solve_low_rank_basis",
    "restart_check",
    "rank_multiset",
    "element_rng",
    "independence_margin",
]

logger = logging.getLogger(__name__)

MAX_OUTER_RETRIES = 5


@dataclass(frozen=True)
class SolverConfig:
    phase1: Phase1Config = field(default_factory=Phase1Config)
    phase2: Phase2Config = field(default_factory=Phase2Config)
    restarttol: float = 1e-3
    n_starts: int = 1
    seed: int = 0
    forced_ranks: tuple = None
    phase1_only: bool = False

    def __post_init__(self):
        if not self.restarttol > 0:
            raise ValueError(f"restarttol must be positive, got {self.restarttol}")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")


@dataclass
class BasisElement:
    X: np.ndarray
    rank: int
    residual: float
    converged: bool
    phase1_singular_values: np.ndarray
    final_singular_values: np.ndarray
    phase1_iterations: int
    phase2_iterations: int
    phase2_skipped: bool = False
    restarts: int = 0
    start_ranks: tuple = ()

    @property
    def phase1_error(self):
        return truncation_error(self.phase1_singular_values, self.rank)

    @property
    def phase2_error(self):
        return truncation_error(self.final_singular_values, self.rank)


@dataclass
class BasisResult:
    elements: list
    subspace_angle_to_input: float
    trace: IterationTrace = None
    restart_count: int = 0
    method: str = "greedy"

    @property
    def total_rank(self):
        return int(sum(el.rank for el in self.elements))

    @property
    def ranks(self):
        return [el.rank for el in self.elements]

    @property
    def matrices(self):
        return [el.X for el in self.elements]

    @property
    def converged(self):
        return all(el.converged for el in self.elements)

    @property
    def traces(self):
        return [] if self.trace is None else [self.trace]


def restart_check(Q, X, restarttol, rng):
    """Return a fresh random unit element of ``range(Q)`` if
    ``||Q(X)||_F < restarttol``, else ``X`` itself."""
    return _restart(Q, X, restarttol, rng)[0]


def rank_multiset(result):
    """Sorted ranks of the basis elements (recovery order is arbitrary)."""
    ranks = result.ranks if hasattr(result, "ranks") else list(result)
    return sorted(int(r) for r in ranks)


def element_rng(seed, element, attempt=0, start=0):
    """Generator for one start of one element; independent of other elements."""
    return np.random.default_rng([int(seed), int(element), int(attempt), int(start)])


def _run_element(sub, Q, ell, attempt, cfg, trace):
    forced = cfg.forced_ranks is not None
    restarts = 0
    p1_iters = 0
    start_ranks = []
    if forced:
        rng = element_rng(cfg.seed, ell, attempt)
        X = random_element(Q, rng)
        r = int(cfg.forced_ranks[ell])
        sv = svd(X).s
    else:
        best = None
        for k in range(cfg.n_starts):
            rng_k = element_rng(cfg.seed, ell, attempt, k)
            X0 = random_element(Q, rng_k)
            res = estimate_rank(sub, X0, cfg.phase1, restart_proj=Q, rng=rng_k,
                                restarttol=cfg.restarttol, trace=trace, element=ell,
                                iteration_offset=p1_iters)
            p1_iters += res.iterations
            restarts += res.restarts
            start_ranks.append(res.rank_estimate)
            if best is None or res.rank_estimate < best[0]:
                best = (res.rank_estimate, res.X, rng_k)
        r, X, rng = best
        # assessment of the Phase I output; not part of the iteration count
        sv = svd(X).s
    phase1_sv = sv
    p2cfg = replace(cfg.phase2, rank=r)
    err = truncation_error(sv, r)
    if not forced and (err <= p2cfg.tol or cfg.phase1_only):
        return BasisElement(X, r, err, bool(err <= p2cfg.tol), phase1_sv, sv, p1_iters, 0, True, restarts,
                            tuple(start_ranks))
    res2 = refine_to_rank(sub, X, p2cfg, restart_proj=Q, rng=rng, restarttol=cfg.restarttol,
                          trace=trace, element=ell)
    restarts += res2.restarts
    final_sv = svd(res2.X).s
    return BasisElement(res2.X, r, res2.residual, res2.converged, phase1_sv, final_sv, p1_iters,
                        res2.iterations, False, restarts, tuple(start_ranks))


def solve_low_rank_basis(sub, cfg=None, trace=None):
    """Compute ``d`` linearly independent low-rank matrices spanning ``sub``.

    Elements whose Phase II does not reach ``tol`` are kept and flagged
    (``converged=False``). If a finished element is numerically dependent on
    the previous ones it is recomputed from a fresh start, at most
    ``MAX_OUTER_RETRIES`` times before :class:`LowRankBasisError` is raised.
    """
    cfg = cfg or SolverConfig()
    if cfg.forced_ranks is not None and len(cfg.forced_ranks) != sub.d:
        raise ValueError(f"need {sub.d} forced ranks, got {len(cfg.forced_ranks)}")
    if trace is None:
        trace = IterationTrace()
    elements = []
    restart_count = 0
    Q = complement_projector(sub, [])
    for ell in range(sub.d):
        for attempt in range(MAX_OUTER_RETRIES + 1):
            el = _run_element(sub, Q, ell, attempt, cfg, trace)
            restart_count += el.restarts
            if np.linalg.norm(project(Q, el.X)) >= cfg.restarttol:
                break
            logger.info("element %d dependent on previous ones; retry %d", ell, attempt + 1)
            restart_count += 1
        else:
            raise LowRankBasisError(
                f"element {ell} stayed linearly dependent after {MAX_OUTER_RETRIES} retries"
            )
        elements.append(el)
        if ell + 1 < sub.d:
            Q = complement_projector(sub, [e.X for e in elements])
    angle = subspace_angle(sub, [e.X for e in elements])
    return BasisResult(elements, angle, trace, restart_count)


def independence_margin(matrices):
    """Smallest singular value of the normalized, stacked vectorizations."""
    A = np.column_stack([vec(M) / np.linalg.norm(M) for M in matrices])
    return float(np.linalg.svd(A, compute_uv=False)[-1])

