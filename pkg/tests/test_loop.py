import numpy as np
import pytest

from frugalbo.acquisition import AcquisitionSpec
from frugalbo.costs import CostLevels, CostSchedule, discrete_cost
from frugalbo.loop import (
    CallbackError,
    ConfigError,
    RunConfig,
    initialize,
    regret,
    run,
    step,
)
from frugalbo.space import Configuration, PrototypeRecord


def _config(space, mode="cost_aware", seed=0, alpha=1.0, bias=("create",), **stop):
    levels = CostLevels.uniform(space, 1, 10, 100)
    from frugalbo.costs import RelaxationParams

    if not stop:
        stop = {"max_iterations": 3}
    return RunConfig(
        space=space,
        schedule=CostSchedule(base=levels, believed_bias_alpha=alpha, bias_categories=bias),
        relax=RelaxationParams.defaults(space, sigma=0.02),
        acquisition=AcquisitionSpec(mode=mode, n_starts=6, seed=seed),
        seed=seed,
        gp_restarts=2,
        **stop,
    )


def _quadratic(space):
    def evaluate(x: Configuration):
        u = -((x.values["x1"] - 0.4) ** 2) - (x.values["x2"] + 0.3) ** 2
        return u, -u  # observed utility, "ground truth" to minimize

    return evaluate


def test_initialize_three_sobol_steps(two_group_space):
    state = initialize(_config(two_group_space), _quadratic(two_group_space))
    assert len(state.trace) == 3
    first = state.trace.steps[0]
    assert set(first.class_per_group.values()) == {"create"}
    assert first.cumulative_true_cost == pytest.approx(200.0)
    assert state.model is not None


def test_initialize_deterministic(two_group_space):
    s1 = initialize(_config(two_group_space, seed=5), _quadratic(two_group_space))
    s2 = initialize(_config(two_group_space, seed=5), _quadratic(two_group_space))
    for a, b in zip(s1.trace.steps, s2.trace.steps):
        assert a.proposed.values == b.proposed.values
        assert a.observed_y == b.observed_y


def test_run_iteration_count(two_group_space):
    trace = run(
        _config(two_group_space, max_iterations=5), _quadratic(two_group_space)
    )
    assert len(trace) == 3 + 5
    assert trace.finished_reason == "max_iterations"
    # iterations are a contiguous 1-based sequence
    assert [s.iteration for s in trace.steps] == list(range(1, 9))


def test_budget_never_exceeded(two_group_space):
    for budget in (250.0, 410.0, 600.0):
        trace = run(
            _config(two_group_space, max_budget=budget, max_iterations=None),
            _quadratic(two_group_space),
        )
        assert trace.cumulative_true_cost <= budget
        assert trace.finished_reason == "budget_exhausted"


def test_budget_smaller_than_first_sample(two_group_space):
    with pytest.warns(UserWarning, match="budget"):
        trace = run(
            _config(two_group_space, max_budget=10.0, max_iterations=None),
            _quadratic(two_group_space),
        )
    assert len(trace) == 0


def test_stop_rule_required(two_group_space):
    with pytest.raises(ConfigError):
        _config(two_group_space, max_iterations=None, max_budget=None)


def test_best_so_far_monotone_and_costs_positive(two_group_space):
    trace = run(_config(two_group_space, max_iterations=6), _quadratic(two_group_space))
    bests = [s.best_so_far for s in trace.steps]
    assert all(b2 >= b1 for b1, b2 in zip(bests, bests[1:]))
    cums = [s.cumulative_true_cost for s in trace.steps]
    assert all(c2 > c1 for c1, c2 in zip(cums, cums[1:]))


def test_replay_cost_accounting(two_group_space):
    config = _config(two_group_space, max_iterations=6, seed=3)
    trace = run(config, _quadratic(two_group_space))
    record = PrototypeRecord(space=two_group_space)
    from frugalbo.costs import effective_levels, update_record

    for s in trace.steps:
        true_levels = effective_levels(config.schedule, s.iteration, "true")
        bd = discrete_cost(s.realized, record, true_levels)
        assert bd.total == pytest.approx(s.true_cost_paid, abs=1e-9)
        assert bd.per_group_class == s.class_per_group
        record = update_record(record, s.realized)
    # every realized component ends up in the final record
    for s in trace.steps:
        for g in two_group_space.groups:
            from frugalbo.space import project

            assert record.contains(g.name, project(two_group_space, s.realized, g.name))


def test_believed_vs_true_split_alpha10(two_group_space):
    config = _config(two_group_space, max_iterations=4, alpha=10.0, bias=("create",))
    trace = run(config, _quadratic(two_group_space))
    for s in trace.steps:
        n_create = sum(1 for c in s.class_per_group.values() if c == "create")
        n_other = {"tweak": 0, "swap": 0}
        for g, c in s.class_per_group.items():
            if c != "create":
                n_other[c] += 1
        expected_believed = (
            1000.0 * n_create + 1.0 * n_other["tweak"] + 10.0 * n_other["swap"]
        )
        expected_true = 100.0 * n_create + 1.0 * n_other["tweak"] + 10.0 * n_other["swap"]
        assert s.believed_cost == pytest.approx(expected_believed)
        assert s.true_cost_paid == pytest.approx(expected_true)


def test_baseline_identical_under_level_scaling(two_group_space):
    def run_with_levels(levels):
        from frugalbo.costs import RelaxationParams

        config = RunConfig(
            space=two_group_space,
            schedule=CostSchedule(base=levels),
            relax=RelaxationParams.defaults(two_group_space),
            acquisition=AcquisitionSpec(mode="standard_ei", n_starts=6, seed=1),
            max_iterations=5,
            seed=1,
            gp_restarts=2,
        )
        return run(config, _quadratic(two_group_space))

    t1 = run_with_levels(CostLevels.uniform(two_group_space, 1, 10, 100))
    t2 = run_with_levels(CostLevels.uniform(two_group_space, 7, 70, 700))
    assert len(t1) == len(t2)
    for a, b in zip(t1.steps, t2.steps):
        assert a.proposed.values == b.proposed.values
        assert a.realized.values == b.realized.values
        assert b.true_cost_paid == pytest.approx(7 * a.true_cost_paid)


def test_trace_fully_deterministic(two_group_space):
    config = _config(two_group_space, max_iterations=5, seed=11)
    t1 = run(config, _quadratic(two_group_space))
    t2 = run(config, _quadratic(two_group_space))
    for a, b in zip(t1.steps, t2.steps):
        assert a.proposed.values == b.proposed.values
        assert a.observed_y == b.observed_y
        assert a.believed_cost == b.believed_cost
        assert a.cumulative_true_cost == b.cumulative_true_cost


def test_callback_failure_preserves_partial_trace(two_group_space):
    calls = {"n": 0}

    def flaky(x: Configuration):
        calls["n"] += 1
        if calls["n"] >= 3:
            raise RuntimeError("sensor unplugged")
        return 0.0, 0.0

    with pytest.raises(CallbackError) as err:
        run(_config(two_group_space, max_iterations=5), flaky)
    assert len(err.value.trace) == 2


def test_regret_definition(two_group_space):
    trace = run(_config(two_group_space, max_iterations=5, seed=2), _quadratic(two_group_space))
    r = regret(trace, 0.0)
    assert len(r) == len(trace)
    assert all(b <= a + 1e-15 for a, b in zip(r, r[1:]))
    assert np.all(r >= -1e-12)
    true_vals = [s.true_value for s in trace.steps]
    assert r[-1] == pytest.approx(min(true_vals) - 0.0)


def test_regret_zero_after_hitting_optimum(two_group_space):
    def at_optimum(x: Configuration):
        return 1.0, 0.0  # ground-truth value equals the optimum

    trace = run(_config(two_group_space, max_iterations=1), at_optimum)
    assert np.all(regret(trace, 0.0) == 0.0)


def test_regret_requires_true_values(two_group_space):
    trace = run(_config(two_group_space, max_iterations=1), lambda x: 0.5)
    with pytest.raises(ValueError, match="ground-truth"):
        regret(trace, 0.0)


def test_trace_csv_and_jsonl_round_trip(two_group_space, tmp_path):
    import csv
    import json

    trace = run(_config(two_group_space, max_iterations=3, seed=4), _quadratic(two_group_space))
    csv_path = tmp_path / "t.csv"
    trace.write_csv(csv_path, extra={"method": "cost_aware"})
    with open(csv_path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == len(trace)
    assert rows[0]["method"] == "cost_aware"
    assert float(rows[-1]["cumulative_true_cost"]) == pytest.approx(
        trace.cumulative_true_cost
    )
    jsonl_path = tmp_path / "t.jsonl"
    trace.write_jsonl(jsonl_path)
    lines = [json.loads(line) for line in open(jsonl_path)]
    assert len(lines) == len(trace)
    assert lines[0]["class_per_group"] == trace.steps[0].class_per_group
