"""Matrix subspaces and the orthogonal projectors onto them.

A subspace of m x n matrices is stored through an orthonormal basis of the
vectorized matrices (an ``mn x d`` array). Projectors are never formed as
``mn x mn`` matrices; projecting costs two matrix-vector products.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import RankDeficientError, SubspaceExhaustedError
from .kernels import as_matrix, mat, orthonormal_columns, vec

__all__ = [
    "MatrixSubspace",
    "Projector",
    "build_subspace",
    "subspace_from_basis",
    "project",
    "complement_projector",
    "random_element",
    "subspace_angle",
    "restart_check",
]

FULL, PARTIAL, COMPLEMENT = "full", "partial", "complement"

# full column rank at build time: s_min > RANK_RTOL * s_max
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixSubspace:
    """A ``d``-dimensional subspace of ``m x n`` matrices.

    ``basis`` holds orthonormal columns ``vec(Q_1), ..., vec(Q_d)``.
    """

    m: int
    n: int
    basis: np.ndarray

    @property
    def d(self):
        return self.basis.shape[1]

    @property
    def projector(self):
        return Projector(self.m, self.n, self.basis, FULL)

    def element(self, k):
        return mat(self.basis[:, k], self.m, self.n)

    def elements(self):
        return [self.element(k) for k in range(self.d)]

    def contains(self, X, atol=1e-8):
        X = np.asarray(X, dtype=float)
        return np.linalg.norm(X - project(self.projector, X)) <= atol * max(1.0, np.linalg.norm(X))


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector onto the span of orthonormal ``columns``."""

    m: int
    n: int
    columns: np.ndarray
    kind: str = FULL

    @property
    def dim(self):
        return self.columns.shape[1]

    def __call__(self, Y):
        return project(self, Y)


def _stack(matrices):
    mats = [as_matrix(M, "spanning matrix") for M in matrices]
    if not mats:
        raise ValueError("need at least one matrix")
    shape = mats[0].shape
    for k, M in enumerate(mats):
        if M.shape != shape:
            raise ValueError(f"matrix {k} has shape {M.shape}, expected {shape}")
    return shape, np.column_stack([vec(M) for M in mats])


def build_subspace(spanning):
    """Subspace spanned by a list of equally shaped matrices.

    The stacked vectorizations must have full column rank; otherwise a
    :class:`RankDeficientError` reports the numerical rank found.
    """
    (m, n), A = _stack(spanning)
    try:
        Q = orthonormal_columns(A, rtol=RANK_RTOL)
    except RankDeficientError as exc:
        raise RankDeficientError(
            f"spanning matrices are linearly dependent: numerical rank "
            f"{exc.numerical_rank} for {A.shape[1]} matrices",
            numerical_rank=exc.numerical_rank,
        ) from None
    return MatrixSubspace(m, n, Q)


def subspace_from_basis(columns, m, n):
    """Wrap already-orthonormal vectorized columns without re-orthogonalizing."""
    columns = np.asarray(columns, dtype=float)
    return MatrixSubspace(m, n, columns.reshape(m * n, -1))


def project(P, Y):
    """``mat(Q Q^T vec(Y))`` for the projector's orthonormal columns ``Q``."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape != (P.m, P.n):
        raise ValueError(f"shape {Y.shape} does not match projector shape {(P.m, P.n)}")
    if P.dim == 0:
        return np.zeros_like(Y)
    y = vec(Y)
    return mat(P.columns @ (P.columns.T @ y), P.m, P.n)


def complement_projector(sub, chosen, atol=1e-8):
    """Projector onto the orthogonal complement of ``span(chosen)`` within ``sub``.

    ``chosen`` must lie in ``sub`` (relative residual at most ``atol``) and be
    linearly independent. The result has dimension ``d - len(chosen)``.
    """
    chosen = list(chosen)
    if not chosen:
        return Projector(sub.m, sub.n, sub.basis, COMPLEMENT)
    (m, n), C = _stack(chosen)
    if (m, n) != (sub.m, sub.n):
        raise ValueError(f"chosen matrices have shape {(m, n)}, subspace is {(sub.m, sub.n)}")
    inside = sub.basis @ (sub.basis.T @ C)
    off = np.linalg.norm(C - inside, axis=0) / np.maximum(np.linalg.norm(C, axis=0), 1e-300)
    if np.any(off > atol):
        k = int(np.argmax(off))
        raise ValueError(f"chosen matrix {k} is not in the subspace (relative residual {off[k]:.3e})")
    ell = C.shape[1]
    if ell > sub.d:
        raise RankDeficientError(f"{ell} chosen matrices in a {sub.d}-dimensional subspace", sub.d)
    Qc = orthonormal_columns(inside, rtol=RANK_RTOL)
    # coordinates of the chosen span inside the subspace basis; complement via full SVD
    coords = sub.basis.T @ Qc
    W, _, _ = np.linalg.svd(coords, full_matrices=True)
    comp = sub.basis @ W[:, ell:]
    return Projector(sub.m, sub.n, comp, COMPLEMENT)


def partial_projector(sub, chosen):
    """Projector onto ``span(chosen)`` (assumed inside ``sub``)."""
    chosen = list(chosen)
    if not chosen:
        return Projector(sub.m, sub.n, np.zeros((sub.m * sub.n, 0)), PARTIAL)
    _, C = _stack(chosen)
    return Projector(sub.m, sub.n, orthonormal_columns(C, rtol=RANK_RTOL), PARTIAL)


def random_element(P, rng):
    """Unit-norm element of the projector's range with Gaussian coefficients."""
    if P.dim == 0:
        raise SubspaceExhaustedError("cannot draw from a zero-dimensional projector")
    coef = rng.standard_normal(P.dim)
    x = P.columns @ coef
    x /= np.linalg.norm(x)
    return mat(x, P.m, P.n)


def restart_check(Q, X, restarttol, rng):
    """Replace ``X`` by a random unit element of ``range(Q)`` when
    ``||Q(X)||_F < restarttol``, i.e. when ``X`` is nearly dependent on the
    elements already found. Returns ``(X, fired)``.
    """
    if np.linalg.norm(project(Q, X)) < restarttol:
        return random_element(Q, rng), True
    return X, False


def _columns_of(A):
    if isinstance(A, MatrixSubspace):
        return A.m * A.n, A.basis
    if isinstance(A, Projector):
        return A.m * A.n, A.columns
    _, C = _stack(A)
    return C.shape[0], orthonormal_columns(C, rtol=RANK_RTOL)


def subspace_angle(A, B):
    """Largest principal angle between two subspaces, in radians.

    ``A`` and ``B`` may be :class:`MatrixSubspace`, :class:`Projector` or
    lists of matrices. With unequal dimensions, the smaller subspace is
    measured against the larger one. The sine is computed from the residual
    of projecting one basis onto the other, which stays accurate for tiny
    angles.
    """
    na, QA = _columns_of(A)
    nb, QB = _columns_of(B)
    if na != nb:
        raise ValueError(f"ambient dimensions differ: {na} vs {nb}")
    if QA.shape[1] > QB.shape[1]:
        QA, QB = QB, QA
    if QA.shape[1] == 0:
        return 0.0
    resid = QA - QB @ (QB.T @ QA)
    sin_max = np.linalg.norm(resid, 2)
    if sin_max <= np.sqrt(0.5):
        return float(np.arcsin(sin_max))
    # near pi/2 the cosine is better conditioned
    cos_min = np.linalg.svd(QB.T @ QA, compute_uv=False)[-1] if QB.shape[1] else 0.0
    return float(np.arccos(min(1.0, cos_min)))
