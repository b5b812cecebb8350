"""Ready-made session templates.

The joystick template models a thumbstick customization setup: two hardware
components (a shaft with one length parameter; a topper whose convexity and
width are fabricated together) and two independent software components
(sensitivity and reactivity filters). Creating a new topper dominates the cost
table because of its print time; the software values are all selectable at
runtime, so a never-used software value costs the same as re-selecting an old
one.
"""

from __future__ import annotations

from .costs import CostLevels, CostSchedule, GroupLevels, RelaxationParams
from .space import ComponentGroup, DesignSpace, Parameter


def joystick_space() -> DesignSpace:
    return DesignSpace(
        parameters=(
            Parameter("shaft_length", 3.0, 21.0, snap_step=3.0),
            Parameter("topper_convexity", -0.66, 0.66, snap_step=0.33),
            Parameter("topper_width", 10.0, 30.0, snap_step=5.0),
            Parameter("sensitivity", 0.0, 1.0, snap_step=0.05),
            Parameter("reactivity", 0.0, 1.0, snap_step=0.05),
        ),
        groups=(
            ComponentGroup("shaft", ("shaft_length",), kind="hardware"),
            ComponentGroup("topper", ("topper_convexity", "topper_width"), kind="hardware"),
            ComponentGroup("sensitivity", ("sensitivity",), kind="software"),
            ComponentGroup("reactivity", ("reactivity",), kind="software"),
        ),
    )


def joystick_cost_levels() -> CostLevels:
    return CostLevels(
        {
            "shaft": GroupLevels(1.0, 10.0, 100.0),
            "topper": GroupLevels(1.0, 10.0, 1000.0),
            # software values are pre-implemented for runtime selection:
            # picking a fresh value costs no more than re-selecting an old one
            "sensitivity": GroupLevels(1.0, 10.0, 10.0),
            "reactivity": GroupLevels(1.0, 10.0, 10.0),
        },
        unit="effort",
    )


def joystick_schedule() -> CostSchedule:
    return CostSchedule(base=joystick_cost_levels())


def joystick_session_payload(
    seed: int = 0,
    max_iterations: int = 10,
    performance_weight: float = 0.5,
) -> dict:
    """A complete POST /sessions body for the joystick setup."""
    space = joystick_space()
    return {
        "space": space.to_json_dict(),
        "schedule": joystick_schedule().to_json_dict(),
        "relaxation": RelaxationParams.defaults(space).to_json_dict(),
        "acquisition": {"mode": "cost_aware", "n_starts": 16, "seed": seed},
        "utility_weights": {
            "performance": performance_weight,
            "preference": 1.0 - performance_weight,
        },
        "init_samples": 3,
        "max_iterations": max_iterations,
        "seed": seed,
    }
