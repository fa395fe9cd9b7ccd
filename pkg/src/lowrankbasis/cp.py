"""Rank-one bases through third-order CP decomposition.

Stacking a basis ``M_1, ..., M_d`` of the subspace as the slices of an
``m x n x d`` tensor, a rank-one basis ``a_l b_l^T`` exists exactly when the
tensor has a CP decomposition with ``d`` terms::

    M_k = sum_l C[k, l] * outer(A[:, l], B[:, l])

Two solvers are provided: simultaneous diagonalization of the slices
(needs ``d <= min(m, n)`` and generic factors) and alternating least
squares from a given start.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import BlockRankDeficientError, CPFailure, LowRankBasisError, NonGenericError
from .kernels import as_matrix, pseudo_inverse, svd
from .subspace import subspace_angle
from .trace import IterationTrace

__all__ = [
    "Tensor3",
    "CpFactors",
    "matricize",
    "khatri_rao",
    "cp_objective",
    "leurgans_decompose",
    "als_refine",
    "rank_one_basis_via_cp",
    "match_columns",
]

logger = logging.getLogger(__name__)

GAP_RTOL = 1e-8
IMAG_RTOL = 1e-8
RESIDUAL_RTOL = 1e-8
LEURGANS_ATTEMPTS = 3
ALS_FALLBACK_SWEEPS = 500


@dataclass(frozen=True, eq=False)
class Tensor3:
    """Third-order tensor stored as an ``(m, n, d)`` array; ``data[:, :, k]`` is slice ``k``."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim != 3:
            raise ValueError(f"tensor data must be 3-D, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("tensor contains non-finite entries")
        object.__setattr__(self, "data", a)

    @classmethod
    def from_slices(cls, slices):
        mats = [as_matrix(M, "slice") for M in slices]
        if not mats:
            raise ValueError("need at least one slice")
        shape = mats[0].shape
        for k, M in enumerate(mats):
            if M.shape != shape:
                raise ValueError(f"slice {k} has shape {M.shape}, expected {shape}")
        return cls(np.stack(mats, axis=2))

    @classmethod
    def from_subspace(cls, sub):
        return cls.from_slices(sub.elements())

    @property
    def shape(self):
        return self.data.shape

    @property
    def slices(self):
        return [self.data[:, :, k] for k in range(self.data.shape[2])]


@dataclass
class CpFactors:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    objective: float = float("nan")
    residual: float = float("nan")
    eigenvalues: np.ndarray = None
    sweeps: int = 0

    @property
    def rank(self):
        return self.A.shape[1]

    def slice(self, k):
        return (self.A * self.C[k]) @ self.B.T

    def to_tensor(self):
        return Tensor3(np.einsum("il,jl,kl->ijk", self.A, self.B, self.C))

    def rank_one_terms(self):
        """Unit-norm matrices ``a_l b_l^T``."""
        out = []
        for l in range(self.rank):
            M = np.outer(self.A[:, l], self.B[:, l])
            out.append(M / np.linalg.norm(M))
        return out


def _as_tensor(T):
    return T if isinstance(T, Tensor3) else Tensor3(T)


def matricize(T):
    """``mn x d`` matrix whose column ``k`` is ``vec(M_k)`` (columns of ``M_k`` stacked)."""
    a = _as_tensor(T).data
    m, n, d = a.shape
    return a.reshape(m * n, d, order="F")


def khatri_rao(B, A):
    """Column-wise Kronecker product: column ``l`` is ``kron(B[:, l], A[:, l])``.

    With this ordering ``matricize(T) = khatri_rao(B, A) @ C.T`` for a CP
    decomposition ``(A, B, C)``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise ValueError(f"need 2-D factors with equal column counts, got {A.shape} and {B.shape}")
    return np.einsum("jl,il->jil", B, A).reshape(B.shape[0] * A.shape[0], A.shape[1])


def cp_objective(T, A, B, C):
    """``0.5 * ||T - sum_l a_l o b_l o c_l||_F^2``."""
    R = matricize(T) - khatri_rao(B, A) @ np.asarray(C).T
    return 0.5 * float(np.sum(R * R))


def _relative_residual(T, A, B, C):
    Tm = matricize(T)
    nrm = np.linalg.norm(Tm)
    R = Tm - khatri_rao(B, A) @ C.T
    return float(np.linalg.norm(R) / nrm) if nrm > 0 else float(np.linalg.norm(R))


def _normalize(A, B, C):
    # unit columns in A and B, scale absorbed into C; sign fixed by the
    # largest-magnitude entry of each column
    A, B, C = A.copy(), B.copy(), C.copy()
    for l in range(A.shape[1]):
        for F in (A, B):
            col = F[:, l]
            nrm = np.linalg.norm(col)
            if nrm > 0:
                s = nrm * (1.0 if col[np.argmax(np.abs(col))] >= 0 else -1.0)
                F[:, l] = col / s
                C[:, l] *= s
    return A, B, C


def _top_left(X, d, what):
    res = svd(X)
    if res.s.size < d or res.s[d - 1] <= 1e-10 * res.s[0]:
        raise NonGenericError(f"{what} factor has rank below {d}")
    return res.U[:, :d]


def _diagonalize_once(T, Ua, Ub, rng):
    a = T.data
    d = a.shape[2]
    N = np.einsum("ia,ijk,jb->abk", Ua, a, Ub)
    Wa = N @ rng.standard_normal(d)
    Wb = N @ rng.standard_normal(d)
    if np.linalg.cond(Wb) > 1e12:
        raise NonGenericError("random slice combination is numerically singular")
    G = np.linalg.solve(Wb.T, Wa.T).T
    lam, V = np.linalg.eig(G)
    scale = np.max(np.abs(lam))
    if np.max(np.abs(lam.imag)) > IMAG_RTOL * scale:
        raise NonGenericError("pencil has complex eigenvalues")
    lam = lam.real
    if d > 1:
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(d, np.inf))
        if np.min(gaps) < GAP_RTOL * scale:
            raise NonGenericError("pencil eigenvalues are not distinct")
    At = V.real
    # rows of At^{-1} Wb are multiples of the reduced b_l
    Bt = np.linalg.solve(At, Wb).T
    A = Ua @ At
    B = Ub @ Bt
    A, B, _ = _normalize(A, B, np.ones((d, d)))
    Ap, Bp = pseudo_inverse(A), pseudo_inverse(B)
    C = np.stack([np.diag(Ap @ a[:, :, k] @ Bp.T) for k in range(d)])
    A, B, C = _normalize(A, B, C)
    return A, B, C, lam


def leurgans_decompose(T, rng=None):
    """CP decomposition with ``d`` terms by simultaneous diagonalization.

    The slices are first compressed to ``d x d`` through the dominant left
    and right singular vectors of the unfoldings; two random combinations
    ``W_a, W_b`` of the compressed slices give ``W_a W_b^{-1} = A D A^{-1}``
    whose eigenvectors are the compressed ``a_l``. Up to three random
    combinations are tried before raising :class:`NonGenericError`.
    """
    T = _as_tensor(T)
    m, n, d = T.shape
    if d > min(m, n):
        raise ValueError(f"simultaneous diagonalization needs d <= min(m, n); got d={d}, m={m}, n={n}")
    if rng is None:
        rng = np.random.default_rng(0)
    a = T.data
    Ua = _top_left(a.reshape(m, n * d), d, "A")
    Ub = _top_left(a.transpose(1, 0, 2).reshape(n, m * d), d, "B")
    last = None
    for attempt in range(LEURGANS_ATTEMPTS):
        try:
            A, B, C, lam = _diagonalize_once(T, Ua, Ub, rng)
        except (NonGenericError, np.linalg.LinAlgError) as exc:
            last = exc
            logger.debug("diagonalization attempt %d failed: %s", attempt, exc)
            continue
        res = _relative_residual(T, A, B, C)
        if res <= RESIDUAL_RTOL:
            return CpFactors(A, B, C, cp_objective(T, A, B, C), res, lam)
        last = NonGenericError(f"reconstruction residual {res:.3e} above {RESIDUAL_RTOL}")
    raise NonGenericError(f"non-generic instance after {LEURGANS_ATTEMPTS} attempts: {last}")


def _block_solve(design, rhs, block):
    # least squares design @ X = rhs with an explicit rank check
    s = np.linalg.svd(design, compute_uv=False)
    tol = max(design.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if rank < design.shape[1]:
        raise BlockRankDeficientError(
            f"design matrix has rank {rank} < {design.shape[1]}", block, rank
        )
    return np.linalg.lstsq(design, rhs, rcond=None)[0]


def als_refine(T, init, sweeps=100):
    """Alternating least squares for a CP decomposition.

    Each sweep solves exactly for ``A``, then ``B``, then ``C`` with the
    other two fixed, and then rescales columns (unit ``a_l``, ``b_l``). The
    objective is recorded per sweep in ``objectives`` on the returned
    factors; exact block updates make it non-increasing.
    """
    T = _as_tensor(T)
    m, n, d = T.shape
    A, B, C = (np.array(F, dtype=float) for F in (init.A, init.B, init.C))
    R = A.shape[1]
    if A.shape != (m, R) or B.shape != (n, R) or C.shape != (d, R):
        raise ValueError(f"factor shapes {A.shape}, {B.shape}, {C.shape} do not match tensor {T.shape}")
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    a = T.data
    T1 = a.reshape(m, n * d)                     # [i, (j, k)]
    T2 = a.transpose(1, 0, 2).reshape(n, m * d)  # [j, (i, k)]
    T3 = matricize(T)                            # [(i, j), k] column-stacked
    objectives = [cp_objective(T, A, B, C)]
    for _ in range(sweeps):
        ZA = np.einsum("jl,kl->jkl", B, C).reshape(n * d, R)
        A = _block_solve(ZA, T1.T, "A").T
        ZB = np.einsum("il,kl->ikl", A, C).reshape(m * d, R)
        B = _block_solve(ZB, T2.T, "B").T
        C = _block_solve(khatri_rao(B, A), T3, "C").T
        A, B, C = _normalize(A, B, C)
        objectives.append(cp_objective(T, A, B, C))
    out = CpFactors(A, B, C, objectives[-1], _relative_residual(T, A, B, C), sweeps=sweeps)
    out.objectives = objectives
    return out


def random_factors(shape, rank, rng):
    m, n, d = shape
    return CpFactors(rng.standard_normal((m, rank)), rng.standard_normal((n, rank)),
                     rng.standard_normal((d, rank)))


def match_columns(estimate, truth):
    """Greedy matching of columns by largest absolute cosine.

    Returns ``(perm, cosines)`` with ``estimate[:, perm[l]]`` paired to
    ``truth[:, l]``; CP factors are only unique up to permutation and scale.
    """
    E = np.asarray(estimate, dtype=float)
    G = np.asarray(truth, dtype=float)
    En = E / np.linalg.norm(E, axis=0)
    Gn = G / np.linalg.norm(G, axis=0)
    cos = np.abs(Gn.T @ En)
    perm = np.full(G.shape[1], -1)
    cosines = np.zeros(G.shape[1])
    work = cos.copy()
    for _ in range(min(E.shape[1], G.shape[1])):
        l, j = np.unravel_index(np.argmax(work), work.shape)
        perm[l], cosines[l] = j, cos[l, j]
        work[l, :] = -1.0
        work[:, j] = -1.0
    return perm, cosines


def _to_result(sub, factors, method):
    from .greedy import BasisElement, BasisResult

    elements = []
    for M in factors.rank_one_terms():
        s = np.linalg.svd(M, compute_uv=False)
        elements.append(BasisElement(M, 1, factors.residual, True, s, s, 0, 0, True))
    angle = subspace_angle(sub, [e.X for e in elements])
    return BasisResult(elements, angle, IterationTrace(), 0, method)


def _acceptable(sub, factors):
    if not factors.residual <= RESIDUAL_RTOL:
        return False
    terms = factors.rank_one_terms()
    stack = np.column_stack([M.reshape(-1, order="F") for M in terms])
    if np.linalg.svd(stack, compute_uv=False)[-1] <= 1e-10:
        return False
    return subspace_angle(sub, terms) <= RESIDUAL_RTOL


def rank_one_basis_via_cp(sub, rng=None, sweeps=ALS_FALLBACK_SWEEPS):
    """Rank-one basis of ``sub`` from a CP decomposition of its basis slices.

    Tries simultaneous diagonalization first and falls back to ALS from a
    random start. Raises :class:`CPFailure` when neither yields ``d``
    independent rank-one matrices spanning ``sub``.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    T = Tensor3.from_subspace(sub)
    reasons = []
    try:
        f = leurgans_decompose(T, rng)
        if _acceptable(sub, f):
            return _to_result(sub, f, "cp-leurgans")
        reasons.append(f"diagonalization residual {f.residual:.3e}")
    except (LowRankBasisError, ValueError) as exc:
        reasons.append(f"diagonalization: {exc}")
    try:
        f = als_refine(T, random_factors(T.shape, sub.d, rng), sweeps)
        if _acceptable(sub, f):
            return _to_result(sub, f, "cp-als")
        reasons.append(f"ALS residual {f.residual:.3e} after {sweeps} sweeps")
    except LowRankBasisError as exc:
        reasons.append(f"ALS: {exc}")
    raise CPFailure(
        "no rank-one basis found via CP (" + "; ".join(reasons) + "); "
        "use the greedy solver (solve_low_rank_basis) instead"
    )
