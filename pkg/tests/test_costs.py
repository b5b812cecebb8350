import numpy as np
import pytest

from conftest import random_config, random_space
from frugalbo.costs import (
    CLASSES,
    CostConfigError,
    CostLevels,
    CostSchedule,
    DegenerateWeightsError,
    GroupLevels,
    RelaxationParams,
    classify_group,
    discrete_cost,
    effective_levels,
    rbf_similarity,
    smooth_cost,
    smooth_cost_gradient,
    update_record,
)
from frugalbo.space import Configuration, PrototypeRecord, normalize, project, snap_configuration


def _record_with(space, *configs):
    rec = PrototypeRecord(space=space)
    for c in configs:
        rec = update_record(rec, snap_configuration(space, c))
    return rec


# --- classification -----------------------------------------------------------


def test_classify_cases(two_group_space):
    older = Configuration({"x1": -1.0, "x2": 1.0})
    current = Configuration({"x1": 0.0, "x2": 0.0})
    rec = _record_with(two_group_space, older, current)

    assert classify_group({"x1": 0.0}, rec, "hardware") == "tweak"
    assert classify_group({"x1": -1.0}, rec, "hardware") == "swap"
    assert classify_group({"x1": 1.6}, rec, "hardware") == "create"


def test_classify_empty_history_is_create(two_group_space):
    rec = PrototypeRecord(space=two_group_space)
    assert classify_group({"x1": 0.0}, rec, "hardware") == "create"


def test_classification_exhaustive_and_exclusive():
    rng = np.random.default_rng(3)
    for _ in range(200):
        space = random_space(rng)
        rec = PrototypeRecord(space=space)
        for _ in range(int(rng.integers(0, 4))):
            rec = update_record(rec, random_config(space, rng, snapped=True))
        x = random_config(space, rng, snapped=True)
        for g in space.groups:
            cls = classify_group(project(space, x, g.name), rec, g.name)
            assert cls in CLASSES
            # definition is mutually exclusive by construction: verify directly
            key_in_hist = rec.contains(g.name, project(space, x, g.name))
            if cls == "create":
                assert not key_in_hist
            else:
                assert key_in_hist


# --- discrete cost --------------------------------------------------------------


def test_joystick_proposal_cost(joystick_space):
    from frugalbo.templates import joystick_cost_levels

    built_1 = Configuration(
        {"shaft_length": 6.0, "topper_convexity": 0.0, "topper_width": 20.0,
         "sensitivity": 0.5, "reactivity": 0.2}
    )
    built_2 = Configuration(
        {"shaft_length": 9.0, "topper_convexity": 0.33, "topper_width": 25.0,
         "sensitivity": 0.6, "reactivity": 0.4}
    )
    rec = _record_with(joystick_space, built_1, built_2)
    # shaft reused from history, topper never built, sensitivity unchanged,
    # reactivity previously used
    proposal = Configuration(
        {"shaft_length": 6.0, "topper_convexity": -0.33, "topper_width": 15.0,
         "sensitivity": 0.6, "reactivity": 0.2}
    )
    bd = discrete_cost(proposal, rec, joystick_cost_levels())
    assert bd.per_group_class == {
        "shaft": "swap", "topper": "create", "sensitivity": "tweak", "reactivity": "swap",
    }
    assert bd.total == pytest.approx(10 + 1000 + 1 + 10)


def test_all_tweak_total(joystick_space):
    from frugalbo.templates import joystick_cost_levels

    current = Configuration(
        {"shaft_length": 9.0, "topper_convexity": 0.0, "topper_width": 20.0,
         "sensitivity": 0.5, "reactivity": 0.5}
    )
    rec = _record_with(joystick_space, current)
    bd = discrete_cost(current, rec, joystick_cost_levels())
    assert set(bd.per_group_class.values()) == {"tweak"}
    assert bd.total == pytest.approx(4.0)


def test_two_groups_both_new(two_group_space):
    rec = PrototypeRecord(space=two_group_space)
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    bd = discrete_cost(Configuration({"x1": 0.0, "x2": 0.0}), rec, levels)
    assert bd.total == pytest.approx(200.0)


def test_total_is_sum_of_groups(two_group_space):
    rng = np.random.default_rng(5)
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    rec = _record_with(two_group_space, random_config(two_group_space, rng))
    for _ in range(50):
        bd = discrete_cost(random_config(two_group_space, rng, snapped=True), rec, levels)
        assert bd.total == pytest.approx(sum(bd.per_group_cost.values()), abs=1e-9)


# --- RBF similarity --------------------------------------------------------------


def test_rbf_similarity_values():
    a = np.array([0.3, 0.3])
    assert rbf_similarity(a, a, 0.1) == 1.0
    b = a + np.array([0.1, 0.0])  # distance sigma
    assert rbf_similarity(a, b, 0.1) == pytest.approx(np.exp(-0.5), rel=1e-12)
    c = a + np.array([1.0, 0.0])  # distance 10 sigma
    assert rbf_similarity(a, c, 0.1) == pytest.approx(np.exp(-50.0), rel=1e-9)
    assert rbf_similarity(a, b, 0.1) == rbf_similarity(b, a, 0.1)
    with pytest.raises(CostConfigError):
        rbf_similarity(a, b, 0.0)


# --- smooth relaxation ------------------------------------------------------------


def test_smooth_cost_far_from_record_is_create(two_group_space):
    rec = _record_with(two_group_space, Configuration({"x1": -2.0, "x2": -2.0}))
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    relax = RelaxationParams.defaults(two_group_space, sigma=0.05, w_create=1.0)
    total, per_group = smooth_cost(Configuration({"x1": 2.0, "x2": 2.0}), rec, levels, relax)
    for c in per_group.values():
        assert abs(c - 100.0) <= 1e-9
    assert total == pytest.approx(200.0, abs=2e-9)


def test_smooth_cost_at_current_empty_swap_set(two_group_space):
    rec = _record_with(two_group_space, Configuration({"x1": 0.0, "x2": 0.0}))
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    relax = RelaxationParams.defaults(two_group_space, sigma=0.05, w_create=1.0)
    _, per_group = smooth_cost(Configuration({"x1": 0.0, "x2": 0.0}), rec, levels, relax)
    # w_tweak = 1, no swap entries, w_create = 1 -> (1*1 + 1*100) / 2
    assert per_group["hardware"] == pytest.approx(50.5, abs=1e-12)
    assert per_group["software"] == pytest.approx(50.5, abs=1e-12)


def test_smooth_cost_two_half_similar_history_entries():
    from frugalbo.space import ComponentGroup, DesignSpace, Parameter

    space = DesignSpace(
        parameters=(Parameter("a", 0.0, 1.0),),
        groups=(ComponentGroup("g", ("a",)),),
    )
    sigma = 0.1
    r = sigma * np.sqrt(2 * np.log(2.0))  # kernel exactly 0.5 at this distance
    query = 0.5
    rec = _record_with(
        space,
        Configuration({"a": query - r}),
        Configuration({"a": query + r}),
        Configuration({"a": 0.0}),  # current, far away (w_tweak ~ 4e-6)
    )
    levels = CostLevels({"g": GroupLevels(1, 10, 100)})
    relax = RelaxationParams(sigma={"g": sigma}, w_create=1.0)
    _, per_group = smooth_cost(Configuration({"a": query}), rec, levels, relax)
    # (0.5 * 10 + 0.5 * 10 + 1 * 100) / (0.5 + 0.5 + 1)
    assert per_group["g"] == pytest.approx(55.0, abs=1e-3)


def test_smooth_cost_degenerate_weights_error(two_group_space):
    rec = _record_with(two_group_space, Configuration({"x1": -2.0, "x2": -2.0}))
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    relax = RelaxationParams.defaults(two_group_space, sigma=0.005, w_create=0.0)
    with pytest.raises(DegenerateWeightsError, match="w_create"):
        smooth_cost(Configuration({"x1": 2.0, "x2": 2.0}), rec, levels, relax)


def test_smooth_cost_convex_combination_bounds():
    rng = np.random.default_rng(17)
    for _ in range(100):
        space = random_space(rng)
        rec = PrototypeRecord(space=space)
        for _ in range(int(rng.integers(1, 5))):
            rec = update_record(rec, random_config(space, rng, snapped=True))
        levels = CostLevels(
            {g.name: GroupLevels(*sorted(rng.uniform(0.1, 100, size=3))) for g in space.groups}
        )
        relax = RelaxationParams.defaults(space, sigma=float(rng.uniform(0.01, 0.5)))
        total, per_group = smooth_cost(random_config(space, rng), rec, levels, relax)
        lo = hi = 0.0
        for g in space.groups:
            lv = levels.group(g.name)
            c = per_group[g.name]
            assert min(lv.tweak, lv.swap, lv.create) - 1e-9 <= c
            assert c <= max(lv.tweak, lv.swap, lv.create) + 1e-9
            lo += min(lv.tweak, lv.swap, lv.create)
            hi += max(lv.tweak, lv.swap, lv.create)
        assert lo - 1e-9 <= total <= hi + 1e-9


def test_kernel_limit_far_from_everything():
    rng = np.random.default_rng(23)
    for _ in range(50):
        space = random_space(rng)
        sigma = float(rng.uniform(0.005, 0.03))
        rec = PrototypeRecord(space=space)
        lo_cfg = Configuration({p.name: p.lower for p in space.parameters})
        rec = update_record(rec, snap_configuration(space, lo_cfg))
        hi_cfg = Configuration({p.name: p.upper for p in space.parameters})
        # distance of the upper corner exceeds 10 sigma in every group
        if any(
            np.linalg.norm(np.ones(len(g.parameter_names))) <= 10 * sigma
            for g in space.groups
        ):
            continue
        levels = CostLevels.uniform(space, 1, 10, 100)
        relax = RelaxationParams.defaults(space, sigma=sigma, w_create=1e-3)
        _, per_group = smooth_cost(hi_cfg, rec, levels, relax)
        for c in per_group.values():
            assert abs(c - 100.0) <= 1e-6 * 100.0


def test_scaling_equivariance(two_group_space):
    rng = np.random.default_rng(29)
    rec = _record_with(
        two_group_space,
        random_config(two_group_space, rng),
        random_config(two_group_space, rng),
    )
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    relax = RelaxationParams.defaults(two_group_space)
    for _ in range(20):
        x = random_config(two_group_space, rng, snapped=True)
        k = float(rng.uniform(0.1, 20))
        d1 = discrete_cost(x, rec, levels).total
        d2 = discrete_cost(x, rec, levels.scaled(k)).total
        assert d2 == pytest.approx(k * d1, rel=1e-12)
        s1, _ = smooth_cost(x, rec, levels, relax)
        s2, _ = smooth_cost(x, rec, levels.scaled(k), relax)
        assert s2 == pytest.approx(k * s1, rel=1e-12)


# --- smooth-cost gradient -----------------------------------------------------------


def _fd_gradient(fn, u, h=1e-5):
    g = np.zeros_like(u)
    for j in range(len(u)):
        e = np.zeros_like(u)
        e[j] = h
        g[j] = (fn(u + e) - fn(u - e)) / (2 * h)
    return g


@pytest.mark.filterwarnings("ignore:cost levels not in")
def test_gradient_matches_finite_differences():
    from frugalbo.costs import SmoothCostEvaluator

    rng = np.random.default_rng(31)
    checked = 0
    while checked < 200:
        space = random_space(rng)
        rec = PrototypeRecord(space=space)
        for _ in range(int(rng.integers(1, 6))):
            rec = update_record(rec, random_config(space, rng, snapped=True))
        levels = CostLevels(
            {g.name: GroupLevels(*rng.uniform(0.0, 100, size=3)) for g in space.groups}
        )
        relax = RelaxationParams.defaults(space, sigma=float(rng.uniform(0.02, 0.3)))
        ev = SmoothCostEvaluator(rec, levels, relax)
        u = rng.uniform(0.02, 0.98, size=space.dimension)
        _, grad = ev.value_and_gradient(u)
        fd = _fd_gradient(lambda v: ev.value(v)[0], u)
        assert np.allclose(grad, fd, atol=1e-5, rtol=1e-3)
        checked += 1


def test_gradient_zero_on_symmetry_axis():
    from frugalbo.space import ComponentGroup, DesignSpace, Parameter

    space = DesignSpace(
        parameters=(Parameter("a", 0.0, 1.0), Parameter("b", 0.0, 1.0)),
        groups=(ComponentGroup("g", ("a", "b")),),
    )
    rec = _record_with(
        space, Configuration({"a": 0.3, "b": 0.5}), Configuration({"a": 0.7, "b": 0.5})
    )
    rec.current = None  # history-only record: both entries weigh as swaps
    levels = CostLevels({"g": GroupLevels(1, 10, 100)})
    relax = RelaxationParams(sigma={"g": 0.2}, w_create=1.0)
    grad = smooth_cost_gradient(Configuration({"a": 0.5, "b": 0.5}), rec, levels, relax)
    assert abs(grad[0]) < 1e-12  # symmetric in a
    assert abs(grad[1]) < 1e-12  # both centers share b = 0.5


def test_gradient_flat_far_from_record(two_group_space):
    rec = _record_with(two_group_space, Configuration({"x1": -2.0, "x2": -2.0}))
    levels = CostLevels.uniform(two_group_space, 1, 10, 100)
    relax = RelaxationParams.defaults(two_group_space, sigma=0.02)
    grad = smooth_cost_gradient(Configuration({"x1": 2.0, "x2": 2.0}), rec, levels, relax)
    assert np.all(np.abs(grad) < 1e-9)


# --- record updates ------------------------------------------------------------------


def test_update_record_idempotent(two_group_space):
    x = Configuration({"x1": 0.0, "x2": 0.04})
    rec1 = _record_with(two_group_space, x)
    rec2 = update_record(rec1, x)
    assert rec1.histories == rec2.histories
    assert rec2.current == x
    rec3 = update_record(rec2, x)
    assert rec2.histories == rec3.histories


def test_update_record_appends_fresh_values(two_group_space):
    rec = _record_with(two_group_space, Configuration({"x1": 0.0, "x2": 0.0}))
    rec2 = update_record(rec, Configuration({"x1": 0.4, "x2": 0.0}))
    assert len(rec2.histories["hardware"]) == 2
    assert len(rec2.histories["software"]) == 1


def test_record_histories_grow_as_prefixes():
    rng = np.random.default_rng(37)
    space = random_space(rng)
    rec = PrototypeRecord(space=space)
    snapshots = [rec.copy()]
    for _ in range(10):
        rec = update_record(rec, random_config(space, rng, snapped=True))
        snapshots.append(rec.copy())
    for earlier, later in zip(snapshots, snapshots[1:]):
        for g in space.groups:
            old = earlier.histories[g.name]
            new = later.histories[g.name]
            assert new[: len(old)] == old


# --- schedules -------------------------------------------------------------------------


def _levels(c_create_hw=100.0):
    return CostLevels(
        {"hardware": GroupLevels(1, 10, c_create_hw), "software": GroupLevels(1, 10, 100)}
    )


def test_effective_levels_identity():
    sched = CostSchedule(base=_levels())
    for it in (0, 1, 10, 99):
        assert effective_levels(sched, it, "believed") == _levels()
        assert effective_levels(sched, it, "true") == _levels()


def test_effective_levels_dynamic_study():
    sched = CostSchedule(
        base=_levels(100.0),
        overrides=((10, _levels(1000.0)), (17, _levels(10.0))),
    )
    assert effective_levels(sched, 9, "true").group("hardware").create == 100.0
    assert effective_levels(sched, 10, "true").group("hardware").create == 1000.0
    assert effective_levels(sched, 16, "true").group("hardware").create == 1000.0
    assert effective_levels(sched, 17, "true").group("hardware").create == 10.0
    assert effective_levels(sched, 24, "true").group("hardware").create == 10.0


def test_effective_levels_believed_bias_on_create():
    sched = CostSchedule(base=_levels(), believed_bias_alpha=10.0, bias_categories=("create",))
    believed = effective_levels(sched, 5, "believed")
    true = effective_levels(sched, 5, "true")
    for g in ("hardware", "software"):
        assert believed.group(g).create == pytest.approx(10 * true.group(g).create)
        assert believed.group(g).tweak == true.group(g).tweak
        assert believed.group(g).swap == true.group(g).swap


def test_schedule_validation():
    with pytest.raises(CostConfigError):
        CostSchedule(base=_levels(), overrides=((5, _levels()), (5, _levels())))
    with pytest.raises(CostConfigError):
        CostSchedule(base=_levels(), believed_bias_alpha=0.0)


def test_level_ordering_warns_but_allows():
    with pytest.warns(UserWarning, match="order"):
        GroupLevels(10, 1, 100)


def test_cost_json_round_trip():
    sched = CostSchedule(
        base=_levels(), overrides=((4, _levels(400)),), believed_bias_alpha=2.0,
        bias_categories=("swap",),
    )
    back = CostSchedule.from_json_dict(sched.to_json_dict())
    assert back == sched
