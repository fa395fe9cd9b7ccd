"""Command-line interface: ``lowrankbasis <command> ...``.

Commands
--------
generate       write a test instance (subspace file plus ``.truth`` sidecar)
basis          greedy low-rank basis of a subspace file
rank-estimate  Phase I rank estimates only
cp-rank-one    rank-one basis through CP decomposition
bench          seeded experiment suites

``basis`` exits with 0 when every element converged, 2 when some did not
and 1 on errors. Summaries are JSON on stdout with sorted keys and no
timings, so identical flags give identical output.
"""
import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cp import rank_one_basis_via_cp
from .exceptions import CPFailure, LowRankBasisError
from .fileio import read_comments, read_matrices, write_matrices
from .greedy import SolverConfig, solve_low_rank_basis
from .phase1 import Phase1Config
from .phase2 import Phase2Config, tail_ratio
from .problems import (SyntheticSpec, circulant_eigenproblem, counterexample_subspace,
                       generate_synthetic, storage_entries, counterexample_matrices)
from .subspace import build_subspace, subspace_angle
from .trace import IterationTrace, summarize

logger = logging.getLogger("lowrankbasis")

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2

TABLE_RANKS = [(1, 1, 1, 1, 1), (2, 2, 2, 2, 2), (1, 2, 3, 4, 5), (5, 5, 5, 10, 10),
               (5, 5, 10, 10, 15)]
CONVFACTOR_CASES = [(2, 10), (10, 100)]
CP_COMPARE_DS = [2, 5, 8, 10, 12, 15, 18, 20]


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dump(obj):
    return json.dumps(obj, sort_keys=True)


def _load_subspace(path):
    kind, mats = read_matrices(path)
    return build_subspace(mats)


def _truth_ranks(path):
    for c in read_comments(path):
        if c.startswith("ranks "):
            return [int(x) for x in c.split()[1:]]
    _, mats = read_matrices(path)
    return [int(np.linalg.matrix_rank(M)) for M in mats]


def _solver_config(args, d=None):
    return SolverConfig(
        phase1=Phase1Config(args.delta, args.tau_tol, args.maxit, args.changeit, args.restartit),
        phase2=Phase2Config(1, args.tol, args.maxit, args.restartit),
        restarttol=args.restarttol,
        n_starts=args.starts,
        seed=args.seed,
        forced_ranks=getattr(args, "force_ranks", None),
    )


def _result_summary(sub, result, truth_ranks=None):
    out = {
        "m": sub.m,
        "n": sub.n,
        "d": sub.d,
        "method": result.method,
        "ranks": result.ranks,
        "total_rank": result.total_rank,
        "residuals": [float(e.residual) for e in result.elements],
        "converged": [bool(e.converged) for e in result.elements],
        "status": "converged" if result.converged else "partial",
        "subspace_angle": float(result.subspace_angle_to_input),
        "restart_count": int(result.restart_count),
        "phase1_iterations": [int(e.phase1_iterations) for e in result.elements],
        "phase2_iterations": [int(e.phase2_iterations) for e in result.elements],
    }
    if result.trace is not None:
        out["svd_count"] = int(result.trace.svd_count)
    if truth_ranks is not None:
        out["statistics"] = summarize([result], truth_ranks).as_dict()
    return out


# ---------------------------------------------------------------- generate

def cmd_generate(args):
    comments = []
    if args.problem == "synthetic":
        ranks = args.ranks or (1, 2, 3, 4, 5)
        sub, gt = generate_synthetic(SyntheticSpec(args.m, args.n, ranks, args.seed))
        mats, truth = sub.elements(), gt.basis
    elif args.problem == "rank-one":
        sub, truth = _rank_one_instance(args.m, args.n, args.d, args.seed)
        mats = sub.elements()
    elif args.problem == "counterexample":
        sub = counterexample_subspace(args.epsilon)
        mats, truth = sub.elements(), counterexample_matrices(args.epsilon)
        comments.append(f"epsilon {args.epsilon!r}")
    else:
        prob = circulant_eigenproblem(args.n_side, args.cluster, args.cluster_spread, args.seed)
        mats, truth = prob.subspace.elements(), prob.truth.basis
    ranks = [int(np.linalg.matrix_rank(M, tol=1e-10 * np.linalg.norm(M, 2))) for M in truth]
    write_matrices(args.out, mats, "tensor" if args.tensor else "subspace", comments)
    write_matrices(args.out + ".truth", truth, "subspace", comments + ["ranks " + " ".join(map(str, ranks))])
    print(_dump({"out": args.out, "truth": args.out + ".truth", "ranks": ranks,
                 "m": mats[0].shape[0], "n": mats[0].shape[1], "d": len(mats)}))
    return EXIT_OK


def _rank_one_instance(m, n, d, seed):
    rng = np.random.default_rng(seed)
    truth = [np.outer(rng.standard_normal(m), rng.standard_normal(n)) for _ in range(d)]
    W = rng.standard_normal((d, d))
    mixed = [sum(W[i, j] * truth[j] for j in range(d)) for i in range(d)]
    return build_subspace(mixed), truth


# ---------------------------------------------------------------- basis

def cmd_basis(args):
    sub = _load_subspace(args.input)
    if args.force_ranks is not None and len(args.force_ranks) != sub.d:
        raise ValueError(f"--force-ranks needs {sub.d} values, got {len(args.force_ranks)}")
    cfg = _solver_config(args)
    sink = open(args.trace, "w") if args.trace else None
    try:
        result = solve_low_rank_basis(sub, cfg, IterationTrace(sink=sink))
    finally:
        if sink is not None:
            sink.close()
    out = args.out or args.input + ".basis"
    write_matrices(out, result.matrices, "subspace", ["ranks " + " ".join(map(str, result.ranks))])
    truth = _truth_ranks(args.truth) if args.truth else None
    summary = _result_summary(sub, result, truth)
    summary["out"] = out
    print(_dump(summary))
    return EXIT_OK if result.converged else EXIT_PARTIAL


def cmd_rank_estimate(args):
    sub = _load_subspace(args.input)
    cfg = _solver_config(args)
    cfg = SolverConfig(cfg.phase1, cfg.phase2, cfg.restarttol, cfg.n_starts, cfg.seed, None, True)
    result = solve_low_rank_basis(sub, cfg)
    print(_dump({
        "ranks": result.ranks,
        "total_rank": result.total_rank,
        "start_ranks": [list(e.start_ranks) for e in result.elements],
        "phase1_errors": [float(e.phase1_error) for e in result.elements],
        "phase1_iterations": [int(e.phase1_iterations) for e in result.elements],
    }))
    return EXIT_OK


def cmd_cp_rank_one(args):
    sub = _load_subspace(args.input)
    try:
        result = rank_one_basis_via_cp(sub, np.random.default_rng(args.seed), args.sweeps)
    except CPFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = args.out or args.input + ".cp"
    write_matrices(out, result.matrices, "subspace")
    summary = _result_summary(sub, result)
    summary["out"] = out
    print(_dump(summary))
    return EXIT_OK


# ---------------------------------------------------------------- bench

def trial_seeds(seed, trials):
    """Per-trial seeds derived from the master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(trials)]


def _workers():
    try:
        return max(1, int(os.environ.get("LRB_THREADS", "1")))
    except ValueError:
        return 1


def run_trials(fn, seeds):
    """``fn`` over the seeds, concurrently if ``LRB_THREADS > 1``; results in seed order."""
    w = _workers()
    if w == 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, seeds))


def _table_trial(ranks, n_starts):
    def run(seed):
        sub, gt = generate_synthetic(SyntheticSpec(20, 20, ranks, seed))
        return solve_low_rank_basis(sub, SolverConfig(n_starts=n_starts, seed=seed)), gt
    return run


def bench_table(trials, seed, n_starts, rank_sets=TABLE_RANKS):
    lines = [f"{'exact ranks':<22}{'av. sum(ranks)':>16}{'av. Phase I err (iter)':>26}"
             f"{'av. Phase II err (iter)':>26}"]
    rows = []
    for ranks in rank_sets:
        out = run_trials(_table_trial(ranks, n_starts), trial_seeds(seed, trials))
        s = summarize([r for r, _ in out], [g for _, g in out])
        rows.append((ranks, s))
        lines.append(f"{str(ranks):<22}{s.avg_total_rank:>16.2f}"
                     f"{f'{s.avg_phase1_error:.2e} ({s.avg_phase1_iterations:.1f})':>26}"
                     f"{f'{s.avg_phase2_error:.2e} ({s.avg_phase2_iterations:.1f})':>26}")
    return "\n".join(lines), rows


def convergence_factor_trial(r, n, seed, d=5):
    """Median over elements of the measured Phase II tail ratio (Phase I skipped)."""
    sub, _ = generate_synthetic(SyntheticSpec(n, n, (r,) * d, seed))
    tr = IterationTrace()
    solve_low_rank_basis(sub, SolverConfig(seed=seed, forced_ranks=(r,) * d), tr)
    facs = []
    for ell in range(d):
        errs = [np.sqrt(np.sum(np.asarray(row.singular_values[r:]) ** 2))
                for row in tr.for_element(ell, 2)]
        facs.append(tail_ratio(errs))
    return float(np.nanmedian(facs))


def bench_convfactor(trials, seed):
    lines = [f"{'r':>4}{'n':>6}{'sqrt(r/n)':>12}{'median factor':>16}{'within x2':>12}"]
    rows = []
    for r, n in CONVFACTOR_CASES:
        facs = run_trials(lambda s, r=r, n=n: convergence_factor_trial(r, n, s), trial_seeds(seed, trials))
        ref = np.sqrt(r / n)
        ok = sum(1 for f in facs if ref / 2 <= f <= 2 * ref)
        rows.append((r, n, facs))
        lines.append(f"{r:>4}{n:>6}{ref:>12.4f}{np.median(facs):>16.4f}{f'{ok}/{len(facs)}':>12}")
    return "\n".join(lines), rows


def circulant_trial(seed, n_side=20, cluster=5, **solver):
    prob = circulant_eigenproblem(n_side, cluster, 1e-10, seed)
    res = solve_low_rank_basis(prob.subspace, SolverConfig(seed=seed, **solver))
    return prob, res


def bench_circulant(trials, seed):
    lines = [f"{'trial':>6}  {'ranks':<18}{'max group angle':>17}{'span angle':>12}"
             f"{'dense':>8}{'factored':>10}"]
    rows = []
    for t, s in enumerate(trial_seeds(seed, trials)):
        prob, res = circulant_trial(s)
        ang = prob.group_angles(res.matrices)
        dense, fact = storage_entries(prob.n_side, res.ranks)
        span = subspace_angle(prob.truth.basis, res.matrices)
        rows.append((prob, res))
        lines.append(f"{t:>6}  {str(res.ranks):<18}{max(ang):>17.2e}{span:>12.2e}{dense:>8}{fact:>10}")
    return "\n".join(lines), rows


def element_angles(matrices, truth):
    """For each recovered matrix, the angle to the closest ground-truth matrix."""
    return [min(subspace_angle([X], [M]) for M in truth) for X in matrices]


def cp_compare_trial(d, seed, m=10, n=10):
    sub, truth = _rank_one_instance(m, n, d, seed)
    try:
        cp = rank_one_basis_via_cp(sub, np.random.default_rng(seed))
        cp_err, method = max(element_angles(cp.matrices, truth)), cp.method
    except CPFailure:
        cp_err, method = float("nan"), "failed"
    g = solve_low_rank_basis(sub, SolverConfig(seed=seed, n_starts=5))
    return {"d": d, "cp_method": method, "cp_angle": cp_err,
            "greedy_angle": max(element_angles(g.matrices, truth)), "greedy_total_rank": g.total_rank}


def bench_cp_compare(trials, seed):
    lines = [f"{'d':>4}{'cp ok':>8}{'cp max angle':>15}{'greedy max angle':>19}{'greedy rank':>13}"]
    rows = []
    for d in CP_COMPARE_DS:
        out = run_trials(lambda s, d=d: cp_compare_trial(d, s), trial_seeds(seed, trials))
        ok = sum(1 for o in out if o["cp_method"] != "failed")
        cp_ang = max((o["cp_angle"] for o in out if o["cp_method"] != "failed"), default=float("nan"))
        g_ang = max(o["greedy_angle"] for o in out)
        g_rank = np.mean([o["greedy_total_rank"] for o in out])
        rows.append(out)
        lines.append(f"{d:>4}{f'{ok}/{len(out)}':>8}{cp_ang:>15.2e}{g_ang:>19.2e}{g_rank:>13.2f}")
    return "\n".join(lines), rows


SUITES = {
    "table1": lambda t, s: bench_table(t, s, 1)[0],
    "table2": lambda t, s: bench_table(t, s, 5)[0],
    "convfactor": lambda t, s: bench_convfactor(t, s)[0],
    "circulant": lambda t, s: bench_circulant(t, s)[0],
    "cp-compare": lambda t, s: bench_cp_compare(t, s)[0],
}


def cmd_bench(args):
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_ERROR
    if args.trials < 1:
        raise ValueError("--trials must be at least 1")
    print(f"suite {args.suite}, trials {args.trials}, seed {args.seed}")
    print(SUITES[args.suite](args.trials, args.seed))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _solver_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=1, help="random starts per element")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--tau-tol", type=float, default=1e-3)
    p.add_argument("--changeit", type=int, default=50)
    p.add_argument("--maxit", type=int, default=1000)
    p.add_argument("--restartit", type=int, default=50)
    p.add_argument("--restarttol", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-14)


def build_parser():
    parser = argparse.ArgumentParser(prog="lowrankbasis", description="Low-rank bases of matrix subspaces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a test instance")
    g.add_argument("problem", choices=["synthetic", "rank-one", "counterexample", "circulant"])
    g.add_argument("--out", required=True)
    g.add_argument("--m", type=int, default=20)
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--d", type=int, default=10, help="dimension for rank-one instances")
    g.add_argument("--ranks", type=_int_list, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--epsilon", type=float, default=1e-4)
    g.add_argument("--n-side", type=int, default=20)
    g.add_argument("--cluster", type=int, default=5)
    g.add_argument("--cluster-spread", type=float, default=1e-10)
    g.add_argument("--tensor", action="store_true", help="write a 'tensor' header instead of 'subspace'")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("basis", help="greedy low-rank basis")
    b.add_argument("input")
    _solver_flags(b)
    b.add_argument("--force-ranks", type=_int_list, default=None,
                   help="skip Phase I and refine to these ranks")
    b.add_argument("--trace", default=None, help="write per-iteration trace rows here")
    b.add_argument("--truth", default=None, help="ground-truth sidecar for error statistics")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_basis)

    r = sub.add_parser("rank-estimate", help="Phase I rank estimates")
    r.add_argument("input")
    _solver_flags(r)
    r.set_defaults(func=cmd_rank_estimate)

    c = sub.add_parser("cp-rank-one", help="rank-one basis via CP decomposition")
    c.add_argument("input")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--sweeps", type=int, default=500)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_cp_rank_one)

    k = sub.add_parser("bench", help="seeded experiment suites")
    k.add_argument("suite")
    k.add_argument("--trials", type=int, default=10)
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (LowRankBasisError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
