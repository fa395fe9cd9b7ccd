"""Dense linear-algebra primitives: SVD thresholding, orthonormalization, pinv.

All functions are pure. Rank decisions use thresholds supplied by the caller.
Matrices are vectorized by stacking columns (Fortran order), so that
``vec(a b^T) = kron(b, a)``.
"""
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import NonFiniteError, RankDeficientError

__all__ = [
    "SvdResult",
    "as_matrix",
    "vec",
    "mat",
    "svd",
    "shrink",
    "truncate",
    "orthonormal_columns",
    "pseudo_inverse",
    "nuclear_norm",
    "truncation_error",
]


class SvdResult(NamedTuple):
    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.s) @ self.V.T


def as_matrix(X, name="X"):
    """Return ``X`` as a finite 2-D float array or raise."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return X


def vec(X):
    return np.asarray(X).reshape(-1, order="F")


def mat(x, m, n):
    return np.asarray(x).reshape((m, n), order="F")


def svd(X):
    """Thin SVD with a deterministic sign convention.

    Each column of ``U`` is flipped so that its largest-magnitude entry is
    positive; the matching column of ``V`` is flipped along with it.
    The divide-and-conquer driver occasionally fails to converge on finite
    input; the QR-iteration driver is used as a fallback.
    """
    X = as_matrix(X)
    try:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError:
        U, s, Vt = scipy.linalg.svd(X, full_matrices=False, lapack_driver="gesvd")
    V = Vt.T
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return SvdResult(U * signs, s, V * signs)


def _shrink_from(res, tau):
    s = np.maximum(res.s - tau, 0.0)
    return (res.U * s) @ res.V.T, s


def shrink(X, tau):
    """Singular value shrinkage: ``U diag((s - tau)_+) V^T``."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return _shrink_from(svd(X), tau)[0]


def _truncate_from(res, r):
    return (res.U[:, :r] * res.s[:r]) @ res.V[:, :r].T


def truncate(X, r):
    """Best rank-``r`` approximation in the Frobenius norm."""
    X = as_matrix(X)
    k = min(X.shape)
    if not (1 <= r <= k):
        raise ValueError(f"rank r={r} out of range [1, {k}]")
    if r == k:
        return X.copy()
    return _truncate_from(svd(X), r)


def truncation_error(s, r):
    """``||X - T_r(X)||_F`` from the singular values of ``X``."""
    return float(np.sqrt(np.sum(np.asarray(s)[r:] ** 2)))


def nuclear_norm(X):
    return float(np.sum(np.linalg.svd(as_matrix(X), compute_uv=False)))


def orthonormal_columns(A, rtol=1e-10):
    """Orthonormal basis of the column span of ``A`` via thin QR.

    Raises :class:`RankDeficientError` if the smallest singular value of
    ``A`` is at most ``rtol`` times the largest.
    """
    A = as_matrix(A, "A")
    m, k = A.shape
    if k > m:
        raise RankDeficientError(
            f"{k} columns in dimension {m}: at least {k - m} deficient columns",
            numerical_rank=m,
        )
    s = np.linalg.svd(A, compute_uv=False)
    numerical_rank = int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
    if numerical_rank < k:
        raise RankDeficientError(
            f"columns are rank deficient: numerical rank {numerical_rank} of {k} "
            f"({k - numerical_rank} deficient)",
            numerical_rank=numerical_rank,
        )
    Q, R = np.linalg.qr(A)
    # fix signs so diag(R) > 0; makes the factor unique
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def pseudo_inverse(A, rcond=None):
    """Moore-Penrose inverse.

    Singular values below ``rcond * s_max`` are treated as zero; the default
    cutoff is ``max(m, n) * eps``, the usual numerical-rank threshold.
    """
    A = as_matrix(A, "A")
    if rcond is None:
        rcond = max(A.shape) * np.finfo(float).eps
    return np.linalg.pinv(A, rcond=rcond)
