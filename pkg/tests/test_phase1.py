import numpy as np
import pytest

from lowrankbasis.exceptions import DegenerateIterateError
from lowrankbasis.phase1 import Phase1Config, estimate_rank
from lowrankbasis.phase2 import Phase2Config, refine_to_rank
from lowrankbasis.problems import SyntheticSpec, generate_synthetic
from lowrankbasis.subspace import build_subspace, project, random_element
from lowrankbasis.trace import IterationTrace

from conftest import rank_one_instance


def test_rank_one_fixed_point():
    X0 = np.zeros((3, 3))
    X0[0, 0] = 1.0
    sub = build_subspace([X0])
    cfg = Phase1Config()
    res = estimate_rank(sub, X0, cfg)
    assert res.rank_estimate == 1
    assert res.iterations <= cfg.changeit + 1
    assert np.allclose(res.Y, (1 - cfg.delta) * X0)
    assert np.allclose(res.X, X0)


@pytest.mark.parametrize("cfg", [
    dict(delta=0.0), dict(delta=1.0), dict(tau_tol=-1.0), dict(maxit=0), dict(changeit=0),
])
def test_config_validation(cfg):
    with pytest.raises(ValueError):
        Phase1Config(**cfg)


def test_rejects_bad_start(rng):
    sub = build_subspace([np.eye(3)])
    with pytest.raises(ValueError, match="unit"):
        estimate_rank(sub, 2 * np.eye(3) / np.sqrt(3))
    X = np.zeros((3, 3))
    X[0, 1] = 1.0
    with pytest.raises(ValueError, match="not in the subspace"):
        estimate_rank(sub, X)


def test_all_singular_values_below_tau_tol_is_degenerate():
    sub = build_subspace([np.eye(400)[:, :400]])
    X0 = np.eye(400) / 20.0  # every singular value 0.05
    with pytest.raises(DegenerateIterateError) as info:
        estimate_rank(sub, X0, Phase1Config(tau_tol=0.1))
    assert info.value.trace is not None


def test_invariants_along_the_run(rng):
    sub, _ = generate_synthetic(SyntheticSpec(20, 20, (1, 2, 3, 4, 5), seed=2))
    X0 = random_element(sub.projector, rng)
    tr = IterationTrace()
    res = estimate_rank(sub, X0, trace=tr)
    ranks = [row.rank_estimate for row in tr.rows]
    assert all(a >= b for a, b in zip(ranks, ranks[1:]))
    assert abs(np.linalg.norm(res.X) - 1) <= 1e-12
    assert np.linalg.norm(res.X - project(sub.projector, res.X)) <= 1e-12
    assert int(np.sum(np.linalg.svd(res.Y, compute_uv=False) > 1e-12)) == res.rank_estimate
    assert ranks[-1] == res.rank_estimate
    assert len(tr) == res.iterations


def test_estimate_is_certified_by_phase2(rng):
    sub, _ = generate_synthetic(SyntheticSpec(20, 20, (1, 2, 3, 4, 5), seed=4))
    res = estimate_rank(sub, random_element(sub.projector, rng))
    assert res.rank_estimate in {1, 2, 3, 4, 5}
    ref = refine_to_rank(sub, res.X, Phase2Config(rank=res.rank_estimate))
    assert ref.residual <= 1e-6


def test_matches_phase2_near_rank_one_element():
    sub, truth = rank_one_instance(8, 7, 4, seed=3)
    Xs = truth[0] / np.linalg.norm(truth[0])
    r = np.random.default_rng(0)
    E = project(sub.projector, r.standard_normal(Xs.shape))
    E -= np.sum(E * Xs) * Xs
    X = Xs + 1e-4 * E / np.linalg.norm(E)
    X /= np.linalg.norm(X)
    a = estimate_rank(sub, X, Phase1Config(maxit=1))
    b = refine_to_rank(sub, X, Phase2Config(rank=1, maxit=1))
    assert np.linalg.norm(a.X - b.X) <= 1e-12


def test_restart_counted_and_traced():
    # restart projector orthogonal to the whole subspace range: the check fires every time
    from lowrankbasis.subspace import complement_projector
    mats = [np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0]), np.diag([0, 0, 1.0])]
    sub = build_subspace(mats)
    Q = complement_projector(sub, mats[:1])
    X0 = mats[0]
    tr = IterationTrace()
    res = estimate_rank(sub, X0, Phase1Config(restartit=1, changeit=3), restart_proj=Q,
                        rng=np.random.default_rng(0), trace=tr)
    assert res.restarts >= 1
    assert tr.rows[0].restart_fired


def test_restart_needs_rng():
    sub = build_subspace([np.eye(2)])
    with pytest.raises(ValueError):
        estimate_rank(sub, np.eye(2) / np.sqrt(2), restart_proj=sub.projector)
