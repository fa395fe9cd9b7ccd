"""scikit-learn style wrappers around the greedy and CP solvers.

``fit`` takes the spanning matrices as an array of shape ``(d, m, n)``;
``transform`` maps matrices of the subspace to their coefficients in the
recovered low-rank basis and ``inverse_transform`` maps back.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cp import rank_one_basis_via_cp
from .greedy import SolverConfig, solve_low_rank_basis
from .kernels import vec
from .phase1 import Phase1Config
from .phase2 import Phase2Config
from .validation import check_matrix_stack, check_ranks, check_seed, check_subspace

__all__ = ["LowRankBasis", "CPRankOneBasis"]


class _BasisTransformMixin(TransformerMixin):
    def _store(self, sub, result):
        self.subspace_ = sub
        self.result_ = result
        self.components_ = np.stack(result.matrices)
        self.ranks_ = np.array(result.ranks)
        self.n_components_ = len(result.ranks)
        self.shape_ = (sub.m, sub.n)
        self._design = np.column_stack([vec(M) for M in result.matrices])
        return self

    def transform(self, X):
        """Coefficients ``c`` with ``X[i] = sum_l c[i, l] components_[l]`` (least squares)."""
        check_is_fitted(self, "components_")
        A = check_matrix_stack(X)
        if A.shape[1:] != self.shape_:
            raise ValueError(f"matrices have shape {A.shape[1:]}, fitted on {self.shape_}")
        rhs = np.column_stack([vec(M) for M in A])
        coef = np.linalg.lstsq(self._design, rhs, rcond=None)[0]
        return coef.T

    def inverse_transform(self, coef):
        check_is_fitted(self, "components_")
        coef = np.atleast_2d(np.asarray(coef, dtype=float))
        if coef.shape[1] != self.n_components_:
            raise ValueError(f"need {self.n_components_} coefficients per row, got {coef.shape[1]}")
        return np.einsum("il,lmn->imn", coef, self.components_)


class LowRankBasis(_BasisTransformMixin, BaseEstimator):
    """Greedy low-rank basis of the subspace spanned by the training matrices.

    Parameters mirror :class:`SolverConfig`. After ``fit``: ``components_``
    ``(d, m, n)`` unit-norm basis matrices, ``ranks_``, ``converged_`` and
    the full ``result_``.
    """

    def __init__(self, delta=0.1, tau_tol=1e-3, maxit=1000, changeit=50, restartit=50,
                 tol=1e-14, restarttol=1e-3, n_starts=1, truncate_noise=True,
                 forced_ranks=None, phase1_only=False, random_state=0):
        self.delta = delta
        self.tau_tol = tau_tol
        self.maxit = maxit
        self.changeit = changeit
        self.restartit = restartit
        self.tol = tol
        self.restarttol = restarttol
        self.n_starts = n_starts
        self.truncate_noise = truncate_noise
        self.forced_ranks = forced_ranks
        self.phase1_only = phase1_only
        self.random_state = random_state

    def _config(self, sub):
        forced = None
        if self.forced_ranks is not None:
            forced = check_ranks(self.forced_ranks, sub.d, min(sub.m, sub.n))
        return SolverConfig(
            phase1=Phase1Config(self.delta, self.tau_tol, self.maxit, self.changeit,
                                self.restartit, self.truncate_noise),
            phase2=Phase2Config(1, self.tol, self.maxit, self.restartit),
            restarttol=self.restarttol,
            n_starts=self.n_starts,
            seed=check_seed(self.random_state),
            forced_ranks=forced,
            phase1_only=self.phase1_only,
        )

    def fit(self, X, y=None):
        sub = check_subspace(X)
        result = solve_low_rank_basis(sub, self._config(sub))
        self.converged_ = result.converged
        return self._store(sub, result)


class CPRankOneBasis(_BasisTransformMixin, BaseEstimator):
    """Rank-one basis from a CP decomposition of the training matrices.

    Simultaneous diagonalization first, ALS with ``sweeps`` sweeps as the
    fallback; raises :class:`CPFailure` when both fail.
    """

    def __init__(self, sweeps=500, random_state=0):
        self.sweeps = sweeps
        self.random_state = random_state

    def fit(self, X, y=None):
        sub = check_subspace(X)
        rng = np.random.default_rng(check_seed(self.random_state))
        result = rank_one_basis_via_cp(sub, rng, self.sweeps)
        self.method_ = result.method
        return self._store(sub, result)
