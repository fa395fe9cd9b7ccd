import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lowrankbasis.greedy import SolverConfig, solve_low_rank_basis
from lowrankbasis.problems import SyntheticSpec, generate_synthetic
from lowrankbasis.trace import IterationTrace, TraceRow, format_row, parse_row, read_trace, summarize

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(
    st.integers(0, 50), st.sampled_from([1, 2]), st.integers(0, 10**6),
    st.lists(finite, max_size=6), st.integers(0, 400),
    st.one_of(finite, st.just(float("inf"))), st.booleans(), st.integers(1, 10**7),
)
def test_row_round_trip(element, phase, it, sv, rank, residual, restart, count):
    row = TraceRow(element, phase, it, tuple(sv), rank, residual, restart, count)
    assert parse_row(format_row(row)) == row


def test_parse_row_field_count():
    with pytest.raises(ValueError, match="8 tab-separated"):
        parse_row("1\t2\t3")


def test_streamed_trace_matches_memory(tmp_path):
    sub, _ = generate_synthetic(SyntheticSpec(10, 10, (1, 2, 3), seed=5))
    path = tmp_path / "run.trace"
    with open(path, "w") as fh:
        tr = IterationTrace(sink=fh)
        solve_low_rank_basis(sub, SolverConfig(seed=5), tr)
    assert read_trace(path) == tr.rows
    assert len(tr) == tr.svd_count


def test_trace_without_keep_only_streams():
    buf = io.StringIO()
    tr = IterationTrace(sink=buf, keep=False)
    tr.record(0, 1, 1, [2.0, 1.0], 1, 0.5)
    tr.record(0, 1, 2, [2.0, 0.5], 1, 0.25, True)
    assert len(tr) == 0 and tr.svd_count == 2
    rows = [parse_row(l) for l in buf.getvalue().splitlines()]
    assert [r.svd_count for r in rows] == [1, 2]
    assert rows[1].restart_fired


def _runs(ranks, seeds):
    out, gts = [], []
    for s in seeds:
        sub, gt = generate_synthetic(SyntheticSpec(12, 12, ranks, seed=s))
        out.append(solve_low_rank_basis(sub, SolverConfig(seed=s)))
        gts.append(gt)
    return out, gts


def test_summarize_single_run():
    (res,), (gt,) = _runs((1, 2, 3), [1])
    s = summarize([res])
    assert s.runs == 1 and s.rank_source == "estimated"
    assert s.avg_total_rank == res.total_rank
    assert s.avg_phase1_iterations == sum(e.phase1_iterations for e in res.elements)


def test_summarize_ground_truth_forms_agree():
    runs, gts = _runs((1, 2, 3), [1, 2, 3])
    by_objects = summarize(runs, gts)
    by_list = summarize(runs, [1, 2, 3])
    assert by_objects.rank_source == by_list.rank_source == "ground_truth"
    assert by_objects.as_dict() == by_list.as_dict()
    assert by_objects.avg_phase2_error <= 1e-12


def test_summarize_uses_sorted_pairing():
    runs, _ = _runs((1, 2, 3), [4])
    # same multiset in a different order gives the same statistics
    assert summarize(runs, [3, 1, 2]).as_dict() == summarize(runs, [1, 2, 3]).as_dict()


def test_summarize_errors():
    with pytest.raises(ValueError, match="empty"):
        summarize([])
    runs, _ = _runs((1, 2), [1])
    with pytest.raises(ValueError):
        summarize(runs, [1, 2, 3])
    with pytest.raises(ValueError, match="one ground truth per run"):
        summarize(runs, [[1, 2], [1, 2]])


def test_as_dict_is_json_ready():
    import json
    runs, gts = _runs((1, 1), [0])
    d = summarize(runs, gts).as_dict()
    assert set(d) == {"runs", "avg_total_rank", "avg_phase1_error", "avg_phase2_error",
                      "avg_phase1_iterations", "avg_phase2_iterations", "rank_source"}
    json.dumps(d)
    assert np.isfinite(d["avg_phase1_error"])
