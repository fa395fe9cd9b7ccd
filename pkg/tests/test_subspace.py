import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lowrankbasis.exceptions import RankDeficientError, SubspaceExhaustedError
from lowrankbasis.kernels import vec
from lowrankbasis.subspace import (build_subspace, complement_projector, partial_projector, project,
                                   random_element, restart_check, subspace_angle)


def E(i, j, m=2, n=2):
    M = np.zeros((m, n))
    M[i, j] = 1.0
    return M


def test_build_diagonal():
    sub = build_subspace([E(0, 0), E(1, 1)])
    assert sub.d == 2
    D = np.diag([2.0, -3.0])
    assert np.allclose(project(sub.projector, D), D)


def test_build_single_matrix(rng):
    M = rng.standard_normal((3, 4))
    sub = build_subspace([M])
    b = sub.basis[:, 0]
    assert np.allclose(np.abs(b), np.abs(vec(M)) / np.linalg.norm(M))


def test_build_reproduces_spanning_matrices(rng):
    mats = [rng.standard_normal((20, 10)) for _ in range(5)]
    sub = build_subspace(mats)
    for M in mats:
        assert np.linalg.norm(project(sub.projector, M) - M) <= 1e-12 * np.linalg.norm(M)
    assert np.linalg.norm(sub.basis.T @ sub.basis - np.eye(5)) <= 1e-12


def test_build_dependent_reports_rank(rng):
    A, B = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    with pytest.raises(RankDeficientError, match="numerical rank 2") as info:
        build_subspace([A, B, A + 2 * B])
    assert info.value.numerical_rank == 2


def test_build_shape_mismatch():
    with pytest.raises(ValueError):
        build_subspace([np.eye(2), np.eye(3)])


def test_project_orthogonal_is_zero():
    sub = build_subspace([E(0, 0)])
    assert np.array_equal(project(sub.projector, E(0, 1)), np.zeros((2, 2)))


def test_project_shape_mismatch():
    sub = build_subspace([E(0, 0)])
    with pytest.raises(ValueError):
        project(sub.projector, np.eye(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 6))
def test_projector_idempotent_and_pythagoras(seed, d):
    r = np.random.default_rng(seed)
    sub = build_subspace([r.standard_normal((4, 5)) for _ in range(d)])
    Y = r.standard_normal((4, 5))
    PY = project(sub.projector, Y)
    assert np.linalg.norm(project(sub.projector, PY) - PY) <= 1e-12 * np.linalg.norm(Y)
    lhs = np.linalg.norm(Y) ** 2
    rhs = np.linalg.norm(PY) ** 2 + np.linalg.norm(Y - PY) ** 2
    assert abs(lhs - rhs) <= 1e-12 * lhs
    assert np.linalg.norm(PY) <= np.linalg.norm(Y) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 6), st.data())
def test_partial_plus_complement_is_full(seed, d, data):
    ell = data.draw(st.integers(0, d))
    r = np.random.default_rng(seed)
    sub = build_subspace([r.standard_normal((3, 4)) for _ in range(d)])
    chosen = [project(sub.projector, r.standard_normal((3, 4))) for _ in range(ell)]
    P, Q = partial_projector(sub, chosen), complement_projector(sub, chosen)
    assert Q.dim == d - ell
    Y = r.standard_normal((3, 4))
    assert np.linalg.norm(project(sub.projector, Y) - project(P, Y) - project(Q, Y)) <= 1e-12 * np.linalg.norm(Y)
    if ell and Q.dim:
        assert np.linalg.norm(P.columns.T @ Q.columns) <= 1e-12


def test_complement_empty_is_full(rng):
    sub = build_subspace([rng.standard_normal((3, 3)) for _ in range(3)])
    Q = complement_projector(sub, [])
    Y = rng.standard_normal((3, 3))
    assert np.allclose(project(Q, Y), project(sub.projector, Y), atol=1e-14)
    assert Q.kind == "complement"


def test_complement_of_full_basis_is_zero(rng):
    mats = [rng.standard_normal((3, 3)) for _ in range(3)]
    Q = complement_projector(build_subspace(mats), mats)
    assert Q.dim == 0
    assert np.array_equal(project(Q, mats[0]), np.zeros((3, 3)))


def test_complement_annihilates_chosen(rng):
    mats = [rng.standard_normal((4, 4)) for _ in range(5)]
    sub = build_subspace(mats)
    chosen = [mats[0] + mats[1], mats[2]]
    Q = complement_projector(sub, chosen)
    assert Q.dim == 3
    for C in chosen:
        assert np.linalg.norm(project(Q, C)) <= 1e-12 * np.linalg.norm(C)


def test_complement_rejects_outside_matrix(rng):
    sub = build_subspace([E(0, 0)])
    with pytest.raises(ValueError, match="not in the subspace"):
        complement_projector(sub, [E(0, 1)])


def test_complement_rejects_dependent_chosen(rng):
    sub = build_subspace([E(0, 0), E(1, 1)])
    with pytest.raises(RankDeficientError):
        complement_projector(sub, [E(0, 0), 2 * E(0, 0)])


def test_random_element_one_dimensional():
    sub = build_subspace([E(0, 1)])
    X = random_element(sub.projector, np.random.default_rng(0))
    assert np.allclose(np.abs(X), E(0, 1))


def test_random_element_norm_and_determinism(rng):
    sub = build_subspace([rng.standard_normal((5, 5)) for _ in range(3)])
    X1 = random_element(sub.projector, np.random.default_rng(7))
    X2 = random_element(sub.projector, np.random.default_rng(7))
    assert abs(np.linalg.norm(X1) - 1) <= 1e-14
    assert np.array_equal(X1, X2)
    assert sub.contains(X1)


def test_random_element_zero_dimensional(rng):
    mats = [E(0, 0)]
    Q = complement_projector(build_subspace(mats), mats)
    with pytest.raises(SubspaceExhaustedError):
        random_element(Q, rng)


def test_angle_identical_and_orthogonal():
    assert subspace_angle([E(0, 0)], [3 * E(0, 0)]) == pytest.approx(0.0, abs=1e-15)
    assert subspace_angle([E(0, 0)], [E(1, 1)]) == pytest.approx(np.pi / 2)


def test_angle_pi_over_four():
    a = np.array([[1.0], [0.0]])
    b = np.array([[1.0], [1.0]]) / np.sqrt(2)
    assert subspace_angle([a], [b]) == pytest.approx(np.pi / 4, abs=1e-15)


def test_angle_ambient_mismatch():
    with pytest.raises(ValueError):
        subspace_angle([np.eye(2)], [np.eye(3)])


def test_angle_basis_invariant(rng):
    mats = [rng.standard_normal((4, 6)) for _ in range(4)]
    W1, W2 = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    s1 = build_subspace([sum(W1[i, j] * mats[j] for j in range(4)) for i in range(4)])
    s2 = build_subspace([sum(W2[i, j] * mats[j] for j in range(4)) for i in range(4)])
    assert subspace_angle(s1, s2) <= 1e-10


def test_restart_check_fires_inside_chosen_span(rng):
    mats = [E(0, 0), E(1, 1), E(0, 1)]
    sub = build_subspace(mats)
    Q = complement_projector(sub, mats[:1])
    X, fired = restart_check(Q, E(0, 0), 1e-3, rng)
    assert fired
    assert np.linalg.norm(project(Q, X) - X) <= 1e-14
    assert abs(np.sum(X * E(0, 0))) <= 1e-14


def test_restart_check_keeps_element_in_range(rng):
    mats = [E(0, 0), E(1, 1)]
    Q = complement_projector(build_subspace(mats), mats[:1])
    X, fired = restart_check(Q, E(1, 1), 1e-3, rng)
    assert not fired and X is not None and np.array_equal(X, E(1, 1))


def test_restart_check_boundary(rng):
    mats = [E(0, 0), E(1, 1)]
    Q = complement_projector(build_subspace(mats), mats[:1])
    t = 1e-3 / 2
    X = np.sqrt(1 - t ** 2) * E(0, 0) + t * E(1, 1)
    assert restart_check(Q, X, 1e-3, rng)[1]
    t = 2e-3
    X = np.sqrt(1 - t ** 2) * E(0, 0) + t * E(1, 1)
    assert not restart_check(Q, X, 1e-3, rng)[1]
