"""Per-iteration diagnostics and the statistics reported over repeated runs.

A trace row is written for every SVD the solver computes. Rows can be
streamed to a text sink as they are produced, one tab-separated line each::

    element  phase  iteration  s1,s2,...  rank  residual  restart  svd_count

Floats use 17 significant digits so a row round-trips exactly.
"""
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TraceRow",
    "IterationTrace",
    "format_row",
    "parse_row",
    "read_trace",
    "Summary",
    "summarize",
]


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class TraceRow:
    element: int
    phase: int
    iteration: int
    singular_values: tuple
    rank_estimate: int
    residual: float
    restart_fired: bool
    svd_count: int


def format_row(row):
    return "\t".join(
        [
            str(row.element),
            str(row.phase),
            str(row.iteration),
            ",".join(_fmt(s) for s in row.singular_values),
            str(row.rank_estimate),
            _fmt(row.residual),
            "1" if row.restart_fired else "0",
            str(row.svd_count),
        ]
    )


def parse_row(line):
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 8:
        raise ValueError(f"trace row needs 8 tab-separated fields, got {len(parts)}")
    sv = tuple(float(x) for x in parts[3].split(",")) if parts[3] else ()
    return TraceRow(
        element=int(parts[0]),
        phase=int(parts[1]),
        iteration=int(parts[2]),
        singular_values=sv,
        rank_estimate=int(parts[4]),
        residual=float(parts[5]),
        restart_fired=parts[6] == "1",
        svd_count=int(parts[7]),
    )


def read_trace(path):
    with open(path) as fh:
        return [parse_row(line) for line in fh if line.strip()]


class IterationTrace:
    """Collects trace rows for one run and optionally streams them.

    ``sink`` is any object with a ``write`` method (an open text file).
    The SVD counter is shared by every phase of the run so that it increases
    strictly across the whole trace.
    """

    def __init__(self, sink=None, keep=True):
        self.rows = []
        self.sink = sink
        self.keep = keep
        self.svd_count = 0

    def record(self, element, phase, iteration, singular_values, rank_estimate, residual,
               restart_fired=False):
        self.svd_count += 1
        row = TraceRow(
            int(element),
            int(phase),
            int(iteration),
            tuple(float(s) for s in singular_values),
            int(rank_estimate),
            float(residual),
            bool(restart_fired),
            self.svd_count,
        )
        if self.keep:
            self.rows.append(row)
        if self.sink is not None:
            self.sink.write(format_row(row) + "\n")
        return row

    def for_element(self, element, phase=None):
        return [r for r in self.rows
                if r.element == element and (phase is None or r.phase == phase)]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


@dataclass
class Summary:
    """Averages over runs of the four statistics reported for synthetic tests."""

    runs: int
    avg_total_rank: float
    avg_phase1_error: float
    avg_phase2_error: float
    avg_phase1_iterations: float
    avg_phase2_iterations: float
    rank_source: str
    per_run: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {
            "runs": self.runs,
            "avg_total_rank": self.avg_total_rank,
            "avg_phase1_error": self.avg_phase1_error,
            "avg_phase2_error": self.avg_phase2_error,
            "avg_phase1_iterations": self.avg_phase1_iterations,
            "avg_phase2_iterations": self.avg_phase2_iterations,
            "rank_source": self.rank_source,
        }


def _reference_ranks(estimated, true_ranks):
    # recovery order is arbitrary: pair the k-th smallest estimate with the
    # k-th smallest true rank
    order = np.argsort(estimated, kind="stable")
    ref = np.empty(len(estimated), dtype=int)
    ref[order] = np.sort(true_ranks)
    return ref


def _run_stats(result, true_ranks=None):
    estimated = [el.rank for el in result.elements]
    if true_ranks is None:
        ref = np.asarray(estimated)
    else:
        if len(true_ranks) != len(estimated):
            raise ValueError("ground truth and result have different dimensions")
        ref = _reference_ranks(estimated, true_ranks)
    e1 = e2 = 0.0
    for el, r in zip(result.elements, ref):
        e1 += np.sum(np.asarray(el.phase1_singular_values)[r:] ** 2)
        e2 += np.sum(np.asarray(el.final_singular_values)[r:] ** 2)
    return {
        "total_rank": int(sum(estimated)),
        "phase1_error": float(np.sqrt(e1)),
        "phase2_error": float(np.sqrt(e2)),
        "phase1_iterations": int(sum(el.phase1_iterations for el in result.elements)),
        "phase2_iterations": int(sum(el.phase2_iterations for el in result.elements)),
    }


def summarize(results, ground_truth=None):
    """Average statistics over a list of basis results.

    Per run: the total estimated rank, the truncation error
    ``sqrt(sum_l ||X_l - T_{r_l}(X_l)||_F^2)`` after Phase I and after Phase
    II, and the number of SVDs spent in each phase. With ``ground_truth``
    (one rank list, or one per run) the truncation errors use the true ranks;
    otherwise they use the estimated ranks and ``rank_source`` says so.
    """
    results = list(results)
    if not results:
        raise ValueError("cannot summarize an empty set of runs")
    if ground_truth is None:
        truths = [None] * len(results)
        source = "estimated"
    else:
        gt = list(ground_truth)
        if gt and not hasattr(gt[0], "ranks") and np.ndim(gt[0]) == 0:
            truths = [gt] * len(results)
        else:
            truths = [getattr(g, "ranks", g) for g in gt]
        if len(truths) != len(results):
            raise ValueError("need one ground truth per run")
        source = "ground_truth"
    per_run = [_run_stats(res, t) for res, t in zip(results, truths)]

    def avg(key):
        return float(np.mean([p[key] for p in per_run]))

    return Summary(
        runs=len(per_run),
        avg_total_rank=avg("total_rank"),
        avg_phase1_error=avg("phase1_error"),
        avg_phase2_error=avg("phase2_error"),
        avg_phase1_iterations=avg("phase1_iterations"),
        avg_phase2_iterations=avg("phase2_iterations"),
        rank_source=source,
        per_run=per_run,
    )
