import csv

import numpy as np
import pytest

from frugalbo.studies import (
    METHODS,
    StudySpec,
    class_counts,
    default_methods,
    read_summary,
    read_trace,
    run_study,
    study_conditions,
    summarize,
    write_aggregate,
)


def _tiny(study_id, **kw):
    defaults = dict(
        study_id=study_id,
        trials=2,
        iterations=2,
        gp_restarts=2,
        n_starts=4,
        history_starts=1,
    )
    defaults.update(kw)
    return StudySpec(**defaults)


def test_study_conditions_shapes():
    assert len(study_conditions(_tiny(1))) == 1
    assert len(study_conditions(_tiny(2, budgets=(600.0, 1600.0)))) == 2
    assert len(study_conditions(_tiny(3))) == 16
    s4 = study_conditions(_tiny(4))
    assert [c.condition_id for c in s4] == [
        "params1", "params2", "params4", "params8", "params16",
        "groups1", "groups2", "groups4", "groups8",
    ]
    assert [c.condition_id for c in study_conditions(_tiny(5))] == ["constant", "dynamic"]
    assert len(study_conditions(_tiny(6, alpha_grid=(0.1, 1.0, 10.0)))) == 3


def test_study5_dynamic_condition_schedule():
    constant, dynamic = study_conditions(_tiny(5))
    # regime changes land on the phase boundaries: 11-17 high, 18-24 cheap
    assert dynamic.overrides[0][:2] == (11, "hardware")
    assert dynamic.overrides[0][2][2] == pytest.approx(1000.0)
    assert dynamic.overrides[1][:2] == (18, "hardware")
    assert dynamic.overrides[1][2][2] == pytest.approx(10.0)
    # paired trials: both conditions draw from the same seed group
    assert constant.seed_group == dynamic.seed_group == 0


def test_methods_per_study():
    assert default_methods(_tiny(1)) == METHODS
    assert default_methods(_tiny(5)) == ("cost_aware",)
    assert default_methods(_tiny(6)) == ("cost_aware",)


def test_study_scale_defaults():
    assert StudySpec(study_id=1).trials == 250
    assert StudySpec(study_id=2).trials == 25
    assert StudySpec(study_id=3).trials == 50
    # cost-efficiency studies keep the full create weight; the believed-cost
    # responsiveness studies need planner leverage
    assert StudySpec(study_id=1).w_create == 1.0
    assert StudySpec(study_id=5).w_create == 0.2
    assert StudySpec(study_id=6).w_create == 0.2


def test_run_study_writes_artifacts(tmp_path):
    spec = _tiny(1)
    result = run_study(spec, tmp_path)
    # summary row count = conditions x methods x trials
    assert len(result.summary_rows) == 1 * 2 * 2
    assert result.summary_path.exists()
    assert len(result.trace_paths) == 4
    rows = read_summary(result.summary_path)
    assert len(rows) == 4
    for row in rows:
        assert row["condition"] == "default"
        assert int(row["n_steps"]) == 3 + 2
    trace_rows = read_trace(result.trace_paths[0])
    assert len(trace_rows) == 5
    assert trace_rows[0]["function"] == "rosenbrock"


def test_run_study_parallel_matches_serial(tmp_path):
    spec = _tiny(2, budgets=(500.0,))
    serial = run_study(spec, tmp_path / "a", parallelism=1)
    parallel = run_study(spec, tmp_path / "b", parallelism=2)
    assert serial.summary_rows == parallel.summary_rows


def test_seed_depends_only_on_coordinates(tmp_path):
    spec = _tiny(1)
    r1 = run_study(spec, tmp_path / "x")
    r2 = run_study(spec, tmp_path / "y")
    assert r1.summary_rows == r2.summary_rows


def test_class_count_totals(tmp_path):
    spec = _tiny(1)
    result = run_study(spec, tmp_path)
    for row in result.summary_rows:
        total = sum(
            int(row[f"count_{kind}_{cls}"])
            for kind in ("hardware", "software", "other")
            for cls in ("tweak", "swap", "create")
        )
        # one class per group per step, two groups
        assert total == int(row["n_steps"]) * 2


def test_summarize_aggregates():
    rows = [
        {
            "study": "1", "condition": "default", "method": "baseline", "trial": "0",
            "aborted": "0", "final_regret": "1.0", "cost_at_min_regret": "100",
            "final_cumulative_cost": "500", "count_hardware_create": "3",
        },
        {
            "study": "1", "condition": "default", "method": "baseline", "trial": "1",
            "aborted": "0", "final_regret": "3.0", "cost_at_min_regret": "300",
            "final_cumulative_cost": "700", "count_hardware_create": "5",
        },
        {
            "study": "1", "condition": "default", "method": "cost_aware", "trial": "0",
            "aborted": "0", "final_regret": "2.0", "cost_at_min_regret": "50",
            "final_cumulative_cost": "400", "count_hardware_create": "1",
        },
    ]
    agg = summarize(rows)
    base = next(a for a in agg if a["method"] == "baseline")
    assert base["trials"] == 2
    assert base["final_regret_mean"] == pytest.approx(2.0)
    assert base["final_regret_sd"] == pytest.approx(1.0)
    assert base["final_regret_median"] == pytest.approx(2.0)
    assert base["count_hardware_create"] == 8
    single = next(a for a in agg if a["method"] == "cost_aware")
    assert single["final_regret_mean"] == pytest.approx(2.0)
    assert single["final_regret_sd"] == 0.0


def test_summarize_empty_gives_empty_table(tmp_path):
    agg = summarize([])
    assert agg == []
    path = tmp_path / "agg.csv"
    write_aggregate(agg, path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 1  # header only


def test_study6_condition_alpha_applied(tmp_path):
    spec = _tiny(6, alpha_grid=(10.0,), study6_budget=600.0, study6_iteration_cap=2)
    result = run_study(spec, tmp_path)
    trace_rows = read_trace(result.trace_paths[0])
    # first init step: both groups create -> believed 10x true
    assert float(trace_rows[0]["believed_cost"]) == pytest.approx(
        10 * float(trace_rows[0]["true_cost_paid"])
    )


def test_report_renders_figures(tmp_path):
    from frugalbo.report import render_study_figures

    spec = _tiny(1)
    run_study(spec, tmp_path)
    figures = render_study_figures(tmp_path, tmp_path / "figs")
    names = {p.name for p in figures}
    assert names == {"study1_curves.png", "study1_classes.png"}
    assert all(p.stat().st_size > 5000 for p in figures)
