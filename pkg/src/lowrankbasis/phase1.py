"""Phase I: rank estimation by adaptive soft thresholding and projection.

Each iteration shrinks the singular values of the current unit-norm ``X``
by ``tau = delta / sqrt(s)``, where ``s`` counts singular values above the
noise floor ``tau_tol``, then projects the shrunk matrix back onto the
subspace and renormalizes. The rank of the shrunk matrix gives the running
rank estimate; the loop stops once the estimate has been stable for
``changeit`` iterations.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateIterateError
from .kernels import svd
from .subspace import project, restart_check
from .trace import IterationTrace

__all__ = ["Phase1Config", "Phase1Result", "estimate_rank"]


@dataclass(frozen=True)
class Phase1Config:
    delta: float = 0.1
    tau_tol: float = 1e-3
    maxit: int = 1000
    changeit: int = 50
    restartit: int = 50
    truncate_noise: bool = True

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.tau_tol < 0:
            raise ValueError(f"tau_tol must be nonnegative, got {self.tau_tol}")
        for name in ("maxit", "changeit", "restartit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class Phase1Result:
    X: np.ndarray
    Y: np.ndarray
    rank_estimate: int
    iterations: int
    trace: IterationTrace
    restarts: int = 0


def check_start(sub, X0):
    """Validate a start: shape ``(m, n)``, unit norm and membership, each to 1e-8."""
    X0 = np.asarray(X0, dtype=float)
    if X0.shape != (sub.m, sub.n):
        raise ValueError(f"start has shape {X0.shape}, expected {(sub.m, sub.n)}")
    nrm = np.linalg.norm(X0)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"start must have unit Frobenius norm, got {nrm}")
    if np.linalg.norm(X0 - project(sub.projector, X0)) > 1e-8:
        raise ValueError("start is not in the subspace")
    return X0


def estimate_rank(sub, X0, cfg=None, restart_proj=None, rng=None, restarttol=1e-3,
                  trace=None, element=0, iteration_offset=0):
    """Run Phase I from the unit-norm start ``X0`` in ``sub``.

    With ``restart_proj`` (the projector onto the complement of previously
    found elements), a restart check runs every ``cfg.restartit``
    iterations. Returns a :class:`Phase1Result` holding the final projected
    iterate ``X``, the final shrunk matrix ``Y`` and the estimate ``r``.
    """
    cfg = cfg or Phase1Config()
    if trace is None:
        trace = IterationTrace()
    if restart_proj is not None and rng is None:
        raise ValueError("restart checks need an rng")
    X = check_start(sub, X0)
    P = sub.projector
    r = sub.n
    last_change = 0
    restarts = 0
    it = 0
    Y = X
    while it < cfg.maxit:
        it += 1
        res = svd(X)
        s = int(np.sum(res.s > cfg.tau_tol))
        if s == 0:
            raise DegenerateIterateError(
                f"all singular values below tau_tol={cfg.tau_tol} at iteration {it}", trace
            )
        sig = res.s
        if cfg.truncate_noise:
            sig = np.where(np.arange(sig.size) < s, sig, 0.0)
            sig = sig / np.linalg.norm(sig)
        tau = cfg.delta / np.sqrt(s)
        shrunk = np.maximum(sig - tau, 0.0)
        Y = (res.U * shrunk) @ res.V.T
        rank_y = int(np.count_nonzero(shrunk))
        if rank_y < r:
            r = rank_y
            last_change = it
        PY = project(P, Y)
        nrm = np.linalg.norm(PY)
        if nrm == 0.0:
            raise DegenerateIterateError(f"projection of shrunk iterate vanished at iteration {it}",
                                         trace)
        X = PY / nrm
        fired = False
        if restart_proj is not None and it % cfg.restartit == 0:
            X, fired = restart_check(restart_proj, X, restarttol, rng)
            restarts += fired
        trace.record(element, 1, iteration_offset + it, res.s, r, np.linalg.norm(X - Y), fired)
        if it - last_change >= cfg.changeit:
            break
    return Phase1Result(X=X, Y=Y, rank_estimate=r, iterations=it, trace=trace, restarts=restarts)
