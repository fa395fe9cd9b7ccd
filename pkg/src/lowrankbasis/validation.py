"""Input validation shared by the estimators and the command line."""
import numbers

import numpy as np

from .exceptions import NonFiniteError
from .subspace import MatrixSubspace, build_subspace

__all__ = ["check_matrix_stack", "check_subspace", "check_seed", "check_ranks"]


def check_matrix_stack(X, name="X"):
    """Return ``X`` as a finite float array of shape ``(d, m, n)``.

    Accepts a 3-D array, a list of equally shaped 2-D arrays, or a single
    2-D array (treated as ``d = 1``).
    """
    if isinstance(X, MatrixSubspace):
        return np.stack(X.elements())
    try:
        A = np.asarray(X, dtype=float)
    except ValueError:
        raise ValueError(f"{name} must be a stack of equally shaped matrices") from None
    if A.ndim == 2:
        A = A[None]
    if A.ndim != 3 or 0 in A.shape:
        raise ValueError(f"{name} must have shape (d, m, n), got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return A


def check_subspace(X):
    """A :class:`MatrixSubspace` from a subspace or a stack of spanning matrices."""
    if isinstance(X, MatrixSubspace):
        return X
    return build_subspace(list(check_matrix_stack(X)))


def check_seed(random_state):
    """Integer seed from ``None``, an int, or a numpy generator."""
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (2 ** 32))
    if isinstance(random_state, numbers.Integral):
        if random_state < 0:
            raise ValueError(f"seed must be nonnegative, got {random_state}")
        return int(random_state)
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(2 ** 32))
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(2 ** 31))
    raise ValueError(f"cannot derive a seed from {random_state!r}")


def check_ranks(ranks, d, k):
    """Validate a list of ``d`` forced ranks, each in ``[1, k]``."""
    out = tuple(int(r) for r in ranks)
    if len(out) != d:
        raise ValueError(f"need {d} ranks, got {len(out)}")
    for r in out:
        if not 1 <= r <= k:
            raise ValueError(f"rank {r} outside [1, {k}]")
    return out
