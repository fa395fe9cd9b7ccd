import math

import numpy as np
import pytest

from lowrankbasis.kernels import vec
from lowrankbasis.problems import (SyntheticSpec, asymptotic_compression_ratio, circulant_eigenproblem,
                                   compression_ratio, counterexample_certificate,
                                   counterexample_subspace, generate_synthetic, real_dft_basis,
                                   storage_entries)
from lowrankbasis.subspace import subspace_angle


@pytest.mark.parametrize("ranks", [(1, 2, 3, 4, 5), (1, 1, 1), (5, 5, 10, 10, 15)])
def test_synthetic_ranks_exact(ranks):
    sub, gt = generate_synthetic(SyntheticSpec(20, 20, ranks, seed=2))
    assert [int(np.linalg.matrix_rank(M)) for M in gt.basis] == list(ranks)
    assert gt.ranks == list(ranks) and sub.d == len(ranks)
    assert subspace_angle(sub, gt.basis) <= 1e-12


def test_synthetic_is_seeded():
    a, _ = generate_synthetic(SyntheticSpec(6, 5, (1, 2), seed=4))
    b, _ = generate_synthetic(SyntheticSpec(6, 5, (1, 2), seed=4))
    assert np.array_equal(a.basis, b.basis)


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(4, 4, (5,))
    with pytest.raises(ValueError):
        SyntheticSpec(4, 4, ())


@pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5])
def test_counterexample_certificate(eps):
    cert = counterexample_certificate(eps)
    assert cert["basis_ranks"] == [3, 3, 3]
    assert cert["combination_rank"] == 5
    assert cert["holds"]
    se = math.sqrt(eps)
    assert cert["basis_formula"] == pytest.approx((1 + 2 * se) / math.sqrt(1 + 2 * eps), rel=1e-14)
    for r in cert["basis_ratios"]:
        assert r == pytest.approx(cert["basis_formula"], rel=1e-12)
    assert cert["combination_ratio"] == pytest.approx(cert["combination_formula"], rel=1e-12)
    assert cert["combination_ratio"] < cert["basis_formula"]


def test_counterexample_combination_lies_in_subspace():
    sub = counterexample_subspace(1e-4)
    X = counterexample_certificate(1e-4)["combination"]
    assert subspace_angle(sub, [X]) <= 1e-12


@pytest.mark.parametrize("eps", [0.0, 0.01, -1e-4])
def test_counterexample_epsilon_range(eps):
    with pytest.raises(ValueError):
        counterexample_subspace(eps)


def test_real_dft_basis_orthonormal():
    F, freqs = real_dft_basis(16, 16)
    assert np.allclose(F.T @ F, np.eye(16), atol=1e-12)
    assert freqs[:5] == [0, 1, 1, 2, 2]
    assert freqs[-1] == 8
    with pytest.raises(ValueError):
        real_dft_basis(4, 5)


def test_circulant_small_problem():
    prob = circulant_eigenproblem(4, 2, seed=1)
    assert prob.truth.ranks == [1, 2]
    assert [int(np.linalg.matrix_rank(M)) for M in prob.truth.basis] == [1, 2]
    A = prob.operator
    N = 16
    # circulant: each row is the previous one shifted by one
    for i in range(1, N):
        assert np.allclose(A[i], np.roll(A[i - 1], 1), atol=1e-12)
    assert np.allclose(A, A.T)
    for M, lam in zip(prob.truth.basis, prob.eigenvalues):
        assert np.allclose(A @ vec(M), lam * vec(M), atol=1e-9)
    assert subspace_angle(prob.subspace, prob.truth.basis) <= 1e-12
    assert prob.group_angles(prob.truth.basis) == pytest.approx([0.0, 0.0], abs=1e-7)


def test_circulant_pairs_have_rank_two():
    prob = circulant_eigenproblem(20, 5, seed=0)
    assert prob.truth.ranks == [1, 2, 2, 2, 2]
    assert prob.truth.groups == [[0], [1, 2], [3, 4]]


def test_compression_ratios():
    classic, nested = compression_ratio(16, 16, 2, 1)
    assert classic == pytest.approx(64 / 256)
    assert nested == pytest.approx((4 * 4 * 2 * 1 + 4) / 256)
    assert asymptotic_compression_ratio(0.1, 0.2) == pytest.approx((0.09, 0.2))
    with pytest.raises(ValueError):
        compression_ratio(15, 16, 2, 1)


def test_storage_entries():
    assert storage_entries(20, [1, 2, 2, 2, 2]) == (2000, 425)
