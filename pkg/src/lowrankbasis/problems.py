"""Problem generators and application fixtures.

* random subspaces spanned by matrices of prescribed ranks,
* the small diagonal example where nuclear-norm minimization on the sphere
  prefers a rank-5 matrix over the rank-3 basis elements,
* matricized Fourier eigenvectors of a circulant matrix with a clustered
  eigenvalue,
* storage ratios for plain and nested low-rank compression.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import RankDeficientError
from .kernels import mat, nuclear_norm
from .subspace import build_subspace, subspace_angle

__all__ = [
    "SyntheticSpec",
    "GroundTruth",
    "generate_synthetic",
    "counterexample_matrices",
    "counterexample_subspace",
    "counterexample_certificate",
    "CirculantProblem",
    "real_dft_basis",
    "circulant_eigenproblem",
    "compression_ratio",
    "asymptotic_compression_ratio",
    "storage_entries",
]


@dataclass(frozen=True)
class SyntheticSpec:
    m: int
    n: int
    ranks: tuple
    seed: int = 0
    mix: bool = True

    def __post_init__(self):
        if not self.ranks:
            raise ValueError("need at least one rank")
        k = min(self.m, self.n)
        for r in self.ranks:
            if not 1 <= r <= k:
                raise ValueError(f"rank {r} outside [1, {k}]")
        if len(self.ranks) > self.m * self.n:
            raise ValueError("dimension exceeds m*n")


@dataclass
class GroundTruth:
    basis: list
    ranks: list
    groups: list = None

    @property
    def d(self):
        return len(self.basis)


def _orthonormal(rng, rows, cols):
    Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    return Q * np.sign(np.diag(R))


def generate_synthetic(spec):
    """Random ``M_l = U_l V_l^T`` with orthonormal ``U_l``, ``V_l`` of the given ranks.

    With ``spec.mix`` the solver sees the span through a random invertible
    recombination of the ground-truth basis. A numerically dependent draw is
    regenerated with the next seed (three attempts).
    """
    last = None
    for attempt in range(3):
        rng = np.random.default_rng(spec.seed + attempt)
        basis = [
            _orthonormal(rng, spec.m, r) @ _orthonormal(rng, spec.n, r).T for r in spec.ranks
        ]
        try:
            truth_sub = build_subspace(basis)
            if spec.mix:
                d = len(basis)
                W = rng.standard_normal((d, d))
                mixed = [sum(W[i, j] * basis[j] for j in range(d)) for i in range(d)]
                sub = build_subspace(mixed)
            else:
                sub = truth_sub
        except RankDeficientError as exc:
            last = exc
            continue
        return sub, GroundTruth(basis, list(spec.ranks))
    raise last


def counterexample_matrices(epsilon):
    """The three 7 x 7 diagonal spanning matrices of the counterexample."""
    se = math.sqrt(epsilon)
    return [
        np.diag([1.0, -se, -se, 0, 0, 0, 0]),
        np.diag([0, 1.0, 0, se, se, 0, 0]),
        np.diag([0, 0, 1.0, 0, 0, se, se]),
    ]


def counterexample_subspace(epsilon):
    """Three-dimensional subspace of 7 x 7 diagonal matrices whose only
    elements of rank at most three are multiples of the three spanning
    matrices, yet a rank-5 element has smaller normalized nuclear norm."""
    if not 0 < epsilon < 0.01:
        raise ValueError(f"epsilon must lie in (0, 0.01), got {epsilon}")
    return build_subspace(counterexample_matrices(epsilon))


def counterexample_certificate(epsilon):
    """Normalized nuclear norms and ranks of the spanning matrices and of the
    rank-5 combination ``M1 + sqrt(eps) M2 + sqrt(eps) M3``."""
    Ms = counterexample_matrices(epsilon)
    se = math.sqrt(epsilon)
    X = Ms[0] + se * Ms[1] + se * Ms[2]

    def ratio(A):
        return nuclear_norm(A) / np.linalg.norm(A)

    basis_ratios = [ratio(M) for M in Ms]
    return {
        "epsilon": epsilon,
        "basis_ratios": basis_ratios,
        "basis_ranks": [int(np.linalg.matrix_rank(M)) for M in Ms],
        "basis_formula": (1 + 2 * se) / math.sqrt(1 + 2 * epsilon),
        "combination": X,
        "combination_ratio": ratio(X),
        "combination_rank": int(np.linalg.matrix_rank(X)),
        "combination_formula": (1 + 4 * epsilon) / math.sqrt(1 + 4 * epsilon ** 2),
        "holds": ratio(X) < min(basis_ratios),
    }


def real_dft_basis(N, count):
    """First ``count`` vectors of the orthonormal real Fourier basis of R^N,
    ordered constant, cos_1, sin_1, cos_2, sin_2, ...

    Returns ``(vectors, frequencies)``; vectors are the columns.
    """
    j = np.arange(N)
    vecs, freqs = [], []
    k = 0
    while len(vecs) < count:
        if k == 0 or (N % 2 == 0 and k == N // 2):
            v = np.cos(2 * np.pi * k * j / N)
            vecs.append(v / np.linalg.norm(v))
            freqs.append(k)
        else:
            for f in (np.cos, np.sin):
                if len(vecs) < count:
                    v = f(2 * np.pi * k * j / N)
                    vecs.append(v / np.linalg.norm(v))
                    freqs.append(k)
        k += 1
        if k > N // 2 and len(vecs) < count:
            raise ValueError(f"only {len(vecs)} real Fourier vectors available for N={N}")
    return np.column_stack(vecs), freqs


@dataclass
class CirculantProblem:
    subspace: object
    truth: GroundTruth
    operator: np.ndarray
    eigenvalues: np.ndarray
    n_side: int

    def group_angles(self, matrices):
        """For each matrix, the angle to the nearest ground-truth frequency group."""
        out = []
        for M in matrices:
            best = np.pi / 2
            for members in self.truth.groups:
                span = [self.truth.basis[i] for i in members]
                best = min(best, subspace_angle([M], span))
            out.append(best)
        return out


def circulant_eigenproblem(n_side, cluster_size, cluster_spread=1e-10, seed=0):
    """Matricized eigenvectors for a cluster of near-equal eigenvalues of a
    real symmetric circulant matrix of order ``n_side**2``.

    The ground truth is the first ``cluster_size`` real Fourier vectors,
    matricized to ``n_side x n_side`` (rank 1 for the constant vector, rank 2
    for a cosine/sine). The subspace handed to the solver is spanned by a
    random orthogonal recombination of them, standing in for the poorly
    resolved eigenvectors an eigensolver returns for a tight cluster.
    """
    if not 1 <= cluster_size <= n_side:
        raise ValueError(f"cluster_size must lie in [1, {n_side}]")
    N = n_side * n_side
    rng = np.random.default_rng(seed)
    F, freqs = real_dft_basis(N, cluster_size)
    # one eigenvalue per frequency (cos/sin pairs must share it to keep the
    # operator circulant): cluster near 1, then 6, 7, ...
    all_vecs, all_freqs = real_dft_basis(N, N)
    cluster = sorted(set(freqs))
    value = {k: 1.0 + cluster_spread * rng.standard_normal() for k in cluster}
    nxt = 6.0
    for k in dict.fromkeys(all_freqs):
        if k not in value:
            value[k] = nxt
            nxt += 1.0
    lam = np.array([value[k] for k in all_freqs])
    A = (all_vecs * lam) @ all_vecs.T
    truth = [mat(F[:, i], n_side, n_side) for i in range(cluster_size)]
    ranks = [1 if (k == 0 or 2 * k == N) else 2 for k in freqs]
    groups = []
    for k in dict.fromkeys(freqs):
        groups.append([i for i, f in enumerate(freqs) if f == k])
    W = _orthonormal(rng, cluster_size, cluster_size)
    mixed = F @ W
    sub = build_subspace([mat(mixed[:, i], n_side, n_side) for i in range(cluster_size)])
    return CirculantProblem(sub, GroundTruth(truth, ranks, groups), A, lam[:cluster_size], n_side)


def compression_ratio(m, n, r, rhat):
    """Storage ratios ``((m+n) r / (mn), (4 s r rhat + r^2) / (mn))`` with ``s = sqrt(m)``."""
    s = math.isqrt(m)
    if s * s != m:
        raise ValueError(f"nested ratio needs m to be a perfect square, got {m}")
    classic = (m + n) * r / (m * n)
    nested = (4 * s * r * rhat + r * r) / (m * n)
    return classic, nested


def asymptotic_compression_ratio(delta, delta_hat):
    """Leading-order nested ratio ``4 delta delta_hat + delta^2`` and the plain ``2 delta``."""
    return 4 * delta * delta_hat + delta ** 2, 2 * delta


def storage_entries(n_side, ranks):
    """Entries to store ``d`` matricized length-``n_side**2`` vectors.

    Returns ``(dense, factored)`` where ``dense = d n_side^2`` and
    ``factored = 2 n_side d rhat + d^2`` with ``rhat = max(ranks)`` (factors
    plus the d x d recombination).
    """
    d = len(ranks)
    rhat = max(ranks)
    return d * n_side * n_side, 2 * n_side * d * rhat + d * d
