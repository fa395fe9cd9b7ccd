"""Phase II: alternating projections onto the rank-r matrices and the unit
sphere of the subspace, plus the local-convergence diagnostics.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateIterateError
from .kernels import as_matrix, svd, truncation_error
from .phase1 import check_start
from .subspace import project, restart_check
from .trace import IterationTrace

__all__ = [
    "Phase2Config",
    "Phase2Result",
    "refine_to_rank",
    "tangent_angle",
    "lemma2_check",
    "tail_ratio",
]


@dataclass(frozen=True)
class Phase2Config:
    rank: int = 1
    tol: float = 1e-14
    maxit: int = 1000
    restartit: int = 50

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be at least 1, got {self.rank}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.maxit < 1 or self.restartit < 1:
            raise ValueError("maxit and restartit must be at least 1")


@dataclass
class Phase2Result:
    X: np.ndarray
    Y: np.ndarray
    residual: float
    converged: bool
    iterations: int
    convergence_factors: list = field(default_factory=list)
    truncation_errors: list = field(default_factory=list)
    trace: IterationTrace = None
    restarts: int = 0


def refine_to_rank(sub, X0, cfg=None, restart_proj=None, rng=None, restarttol=1e-3,
                   trace=None, element=0):
    """Alternate ``Y = T_r(X)`` and ``X = P(Y) / ||P(Y)||`` until
    ``||X - Y||_F <= tol`` or ``maxit`` iterations.

    Non-convergence is reported through ``converged=False``; it is not an
    error. ``truncation_errors[k]`` is ``||X_k - T_r(X_k)||_F`` for the
    iterate entering step ``k`` and ``convergence_factors`` holds the ratios
    of consecutive entries.
    """
    cfg = cfg or Phase2Config()
    if trace is None:
        trace = IterationTrace()
    if restart_proj is not None and rng is None:
        raise ValueError("restart checks need an rng")
    X = check_start(sub, as_matrix(X0, "X0"))
    r = cfg.rank
    if r > min(sub.m, sub.n):
        raise ValueError(f"rank {r} exceeds min(m, n) = {min(sub.m, sub.n)}")
    P = sub.projector
    errors, factors = [], []
    residual = np.inf
    restarts = 0
    it = 0
    Y = X
    while residual > cfg.tol and it < cfg.maxit:
        it += 1
        res = svd(X)
        err = truncation_error(res.s, r)
        if errors and errors[-1] > 0:
            factors.append(err / errors[-1])
        errors.append(err)
        Y = (res.U[:, :r] * res.s[:r]) @ res.V[:, :r].T
        PY = project(P, Y)
        nrm = np.linalg.norm(PY)
        if nrm == 0.0:
            raise DegenerateIterateError(f"projection of rank-{r} iterate vanished at iteration {it}",
                                         trace)
        X = PY / nrm
        residual = float(np.linalg.norm(X - Y))
        fired = False
        if restart_proj is not None and it % cfg.restartit == 0:
            X, fired = restart_check(restart_proj, X, restarttol, rng)
            if fired:
                restarts += 1
                residual = np.inf
        trace.record(element, 2, it, res.s, r, residual, fired)
    return Phase2Result(
        X=X,
        Y=Y,
        residual=residual,
        converged=bool(residual <= cfg.tol),
        iterations=it,
        convergence_factors=factors,
        truncation_errors=errors,
        trace=trace,
        restarts=restarts,
    )


def tail_ratio(errors, upper=1e-3, lower=1e-11, min_points=3):
    """Geometric mean contraction of a linearly converging error sequence.

    Only entries in ``(lower, upper)`` are used, which discards the
    pre-asymptotic phase and the round-off floor. Returns ``nan`` when fewer
    than ``min_points`` entries qualify.
    """
    e = np.asarray(errors, dtype=float)
    idx = np.flatnonzero((e < upper) & (e > lower))
    if idx.size < min_points:
        return float("nan")
    i0, i1 = idx[0], idx[-1]
    return float((e[i1] / e[i0]) ** (1.0 / (i1 - i0)))


def _tangent_basis_fixed_rank(Xstar, r):
    # orthonormal basis of {U_r A V^T + U_r B V_perp^T + U_perp C V_r^T} in vec form
    U, _, Vt = np.linalg.svd(Xstar, full_matrices=True)
    V = Vt.T
    m, n = Xstar.shape
    cols = []
    for j in range(n):
        for i in range(m):
            if i < r or j < r:
                cols.append(np.kron(V[:, j], U[:, i]))
    return np.column_stack(cols)


def tangent_angle(Xstar, sub, r):
    """Angle between the tangent space of the unit sphere of ``sub`` at
    ``Xstar`` and the tangent space of the rank-``r`` manifold at ``Xstar``.

    A positive angle certifies that the two tangent spaces intersect only
    in zero; the local contraction factor of Phase II is its cosine.
    """
    Xstar = as_matrix(Xstar, "Xstar")
    s = np.linalg.svd(Xstar, compute_uv=False)
    if r < 1 or r > len(s) or s[r - 1] <= 1e-10 * s[0] or (r < len(s) and s[r] > 1e-10 * s[0]):
        raise ValueError(f"Xstar does not have numerical rank {r} (singular values {s[:r + 1]})")
    x = Xstar.reshape(-1, order="F") / np.linalg.norm(Xstar)
    # tangent space of the sphere: complement of Xstar inside the subspace
    B = sub.basis - np.outer(x, x @ sub.basis)
    U, sv, _ = np.linalg.svd(B, full_matrices=False)
    k = sub.d - 1
    if k == 0:
        return float(np.pi / 2)
    TB = U[:, :k]
    TR = _tangent_basis_fixed_rank(Xstar, r)
    c = np.linalg.svd(TB.T @ TR, compute_uv=False)[0]
    if c > np.sqrt(0.5):
        # sine form for accuracy near zero
        resid = TB - TR @ (TR.T @ TB)
        sines = np.linalg.svd(resid, compute_uv=False)
        return float(np.arcsin(min(1.0, sines[-1])))
    return float(np.arccos(min(1.0, c)))


def _range_basis(X, rtol=1e-10):
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    k = int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
    return U[:, :k]


def _trivial_intersection(QA, QB, min_angle):
    if QA.shape[1] + QB.shape[1] > QA.shape[0]:
        return False
    if QA.shape[1] == 0 or QB.shape[1] == 0:
        return True
    c = np.linalg.svd(QA.T @ QB, compute_uv=False)[0]
    # smallest principal angle from its cosine; sine form when close to zero
    if c > np.sqrt(0.5):
        resid = QB - QA @ (QA.T @ QB)
        smallest_sine = np.linalg.svd(resid, compute_uv=False)[-1]
        return bool(smallest_sine > min_angle)
    return True


def lemma2_check(Xstar, complement_basis, samples=32, seed=0, min_angle=1e-8):
    """Probabilistic check of the sufficient condition for a clean intersection.

    For random elements ``Xt`` of ``span(complement_basis)``, the column
    spaces of ``Xstar`` and ``Xt`` must intersect trivially, and so must
    their row spaces (smallest principal angle above ``min_angle``).
    """
    Xstar = as_matrix(Xstar, "Xstar")
    comps = [as_matrix(C, "complement element") for C in complement_basis]
    if not comps:
        return True
    rng = np.random.default_rng(seed)
    col_star = _range_basis(Xstar)
    row_star = _range_basis(Xstar.T)
    stack = np.stack(comps)
    for _ in range(samples):
        Xt = np.tensordot(rng.standard_normal(len(comps)), stack, axes=1)
        if not _trivial_intersection(col_star, _range_basis(Xt), min_angle):
            return False
        if not _trivial_intersection(row_star, _range_basis(Xt.T), min_angle):
            return False
    return True
