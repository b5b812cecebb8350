import numpy as np
import pytest

from frugalbo.space import ComponentGroup, Configuration, DesignSpace, Parameter


@pytest.fixture
def two_group_space() -> DesignSpace:
    """x1 hardware and x2 software on [-2, 2] with a 1% grid."""
    return DesignSpace(
        parameters=(
            Parameter("x1", -2.0, 2.0, snap_step=0.04),
            Parameter("x2", -2.0, 2.0, snap_step=0.04),
        ),
        groups=(
            ComponentGroup("hardware", ("x1",), kind="hardware"),
            ComponentGroup("software", ("x2",), kind="software"),
        ),
    )


@pytest.fixture
def joystick_space() -> DesignSpace:
    from frugalbo.templates import joystick_space

    return joystick_space()


def random_space(rng: np.random.Generator) -> DesignSpace:
    """A random space with 1-6 parameters split into random disjoint groups."""
    d = int(rng.integers(1, 7))
    params = []
    for i in range(d):
        lo = float(rng.uniform(-10, 5))
        hi = lo + float(rng.uniform(0.5, 20))
        snap = None if rng.random() < 0.3 else (hi - lo) / float(rng.integers(5, 200))
        params.append(Parameter(f"p{i}", lo, hi, snap_step=snap))
    names = [p.name for p in params]
    rng.shuffle(names)
    n_groups = int(rng.integers(1, d + 1))
    cuts = sorted(rng.choice(range(1, d), size=n_groups - 1, replace=False)) if n_groups > 1 else []
    bounds = [0, *cuts, d]
    kinds = ("hardware", "software", "other")
    groups = tuple(
        ComponentGroup(
            f"g{j}",
            tuple(names[bounds[j]: bounds[j + 1]]),
            kind=kinds[int(rng.integers(0, 3))],
        )
        for j in range(n_groups)
    )
    return DesignSpace(tuple(params), groups)


def random_config(space: DesignSpace, rng: np.random.Generator, snapped: bool = False) -> Configuration:
    vals = {}
    for p in space.parameters:
        v = float(rng.uniform(p.lower, p.upper))
        vals[p.name] = p.snap(v) if snapped else v
    return Configuration(vals)
