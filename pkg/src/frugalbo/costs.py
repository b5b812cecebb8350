"""Reuse-aware prototyping costs and their smooth relaxation.

Each component group of a proposed configuration is classified against the
prototype record:

* ``tweak``  - identical to the currently assembled prototype's component,
* ``swap``   - matches some earlier build, but not the current one,
* ``create`` - never built before.

The discrete cost of a configuration is the sum over groups of the level for
its class. Because that step function has no useful gradient, a smooth
surrogate interpolates the three levels with RBF-kernel similarity weights
measured in normalized [0,1] coordinates restricted to the group's
parameters: the tweak weight is the kernel against the current component, the
swap weight sums kernels over the rest of the group history, and the create
weight is a constant floor so that novel regions always keep a defined cost.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .space import (
    SCHEMA_VERSION,
    Configuration,
    DesignSpace,
    PrototypeRecord,
    group_key,
    keys_match,
    project,
)

CLASSES = ("tweak", "swap", "create")

# Kernel weights below this are numerically invisible next to w_create >= 1e-3.
NEGLIGIBLE_WEIGHT = 1e-300


class CostConfigError(ValueError):
    """Cost levels or relaxation parameters are inconsistent with the space."""


class DegenerateWeightsError(ZeroDivisionError):
    """All relaxation weights vanished; set w_create > 0 to keep the cost defined."""


@dataclass(frozen=True)
class GroupLevels:
    """The three cost levels of one group, in user-chosen cost units."""

    tweak: float
    swap: float
    create: float

    def __post_init__(self):
        for cls in CLASSES:
            v = getattr(self, cls)
            if not np.isfinite(v) or v < 0:
                raise CostConfigError(f"{cls} level must be a nonnegative finite real, got {v}")
        if not (self.tweak <= self.swap <= self.create):
            warnings.warn(
                f"cost levels not in tweak <= swap <= create order "
                f"({self.tweak}, {self.swap}, {self.create}); allowed, but unusual",
                stacklevel=3,
            )

    def level(self, cls: str) -> float:
        return getattr(self, cls)

    def scaled(self, alpha: float, categories: tuple[str, ...]) -> "GroupLevels":
        vals = {cls: getattr(self, cls) * (alpha if cls in categories else 1.0) for cls in CLASSES}
        return GroupLevels(**vals)


@dataclass(frozen=True)
class CostLevels:
    """Per-group tweak/swap/create levels plus an opaque unit label."""

    per_group: dict[str, GroupLevels]
    unit: str = "units"

    def __post_init__(self):
        object.__setattr__(self, "per_group", dict(self.per_group))

    def group(self, name: str) -> GroupLevels:
        try:
            return self.per_group[name]
        except KeyError:
            raise CostConfigError(f"no cost levels configured for group {name!r}") from None

    def validate_for(self, space: DesignSpace) -> "CostLevels":
        missing = [g.name for g in space.groups if g.name not in self.per_group]
        if missing:
            raise CostConfigError(f"missing cost levels for groups {missing}")
        return self

    def scaled(self, k: float) -> "CostLevels":
        return CostLevels(
            {g: GroupLevels(l.tweak * k, l.swap * k, l.create * k) for g, l in self.per_group.items()},
            unit=self.unit,
        )

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "unit": self.unit,
            "groups": {
                g: {"tweak": l.tweak, "swap": l.swap, "create": l.create}
                for g, l in self.per_group.items()
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CostLevels":
        return cls(
            per_group={
                g: GroupLevels(float(v["tweak"]), float(v["swap"]), float(v["create"]))
                for g, v in d["groups"].items()
            },
            unit=d.get("unit", "units"),
        )

    @classmethod
    def uniform(cls, space: DesignSpace, tweak: float, swap: float, create: float,
                unit: str = "units") -> "CostLevels":
        return cls({g.name: GroupLevels(tweak, swap, create) for g in space.groups}, unit=unit)


@dataclass(frozen=True)
class RelaxationParams:
    """Kernel bandwidths (normalized units) and the constant create weight.

    sigma defaults to 0.05 on the unit interval: reuse credit requires a
    near-exact match while the gradient still reaches a few grid steps out.
    """

    sigma: dict[str, float]
    w_create: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma", dict(self.sigma))
        for g, s in self.sigma.items():
            if not (s > 0):
                raise CostConfigError(f"sigma for group {g!r} must be positive, got {s}")
        if self.w_create < 0:
            raise CostConfigError(f"w_create must be nonnegative, got {self.w_create}")

    @classmethod
    def defaults(cls, space: DesignSpace, sigma: float = 0.05, w_create: float = 1.0):
        return cls(sigma={g.name: sigma for g in space.groups}, w_create=w_create)

    def to_json_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "sigma": dict(self.sigma),
                "w_create": self.w_create}

    @classmethod
    def from_json_dict(cls, d: dict) -> "RelaxationParams":
        return cls(sigma={g: float(s) for g, s in d["sigma"].items()},
                   w_create=float(d["w_create"]))


@dataclass(frozen=True)
class CostSchedule:
    """Time-indexed cost levels plus the believed-cost bias.

    ``overrides`` replace the base levels from a given iteration onward.
    ``believed_bias_alpha`` multiplies the levels of ``bias_categories`` when
    the planner asks for *believed* levels; the *true* levels (the ones a
    budget is charged against) are never biased.
    """

    base: CostLevels
    overrides: tuple[tuple[int, CostLevels], ...] = ()
    believed_bias_alpha: float = 1.0
    bias_categories: tuple[str, ...] = CLASSES

    def __post_init__(self):
        object.__setattr__(self, "overrides", tuple(self.overrides))
        its = [it for it, _ in self.overrides]
        if any(b <= a for a, b in zip(its, its[1:])):
            raise CostConfigError("override iterations must be strictly increasing")
        if any(it < 0 for it in its):
            raise CostConfigError("override iterations must be nonnegative")
        if not (self.believed_bias_alpha > 0):
            raise CostConfigError("believed_bias_alpha must be positive")
        bad = set(self.bias_categories) - set(CLASSES)
        if bad:
            raise CostConfigError(f"unknown bias categories {sorted(bad)}")

    def with_override(self, from_iteration: int, levels: CostLevels) -> "CostSchedule":
        kept = tuple((it, lv) for it, lv in self.overrides if it < from_iteration)
        return CostSchedule(
            base=self.base,
            overrides=kept + ((from_iteration, levels),),
            believed_bias_alpha=self.believed_bias_alpha,
            bias_categories=self.bias_categories,
        )

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "base": self.base.to_json_dict(),
            "overrides": [
                {"from_iteration": it, "levels": lv.to_json_dict()} for it, lv in self.overrides
            ],
            "believed_bias_alpha": self.believed_bias_alpha,
            "bias_categories": list(self.bias_categories),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CostSchedule":
        return cls(
            base=CostLevels.from_json_dict(d["base"]),
            overrides=tuple(
                (int(o["from_iteration"]), CostLevels.from_json_dict(o["levels"]))
                for o in d.get("overrides", [])
            ),
            believed_bias_alpha=float(d.get("believed_bias_alpha", 1.0)),
            bias_categories=tuple(d.get("bias_categories", CLASSES)),
        )


@dataclass(frozen=True)
class CostBreakdown:
    """Per-group class and cost of one configuration, plus their sum."""

    per_group_class: dict[str, str]
    per_group_cost: dict[str, float]
    total: float

    def to_json_dict(self) -> dict:
        return {
            "per_group_class": dict(self.per_group_class),
            "per_group_cost": dict(self.per_group_cost),
            "total": self.total,
        }


def effective_levels(schedule: CostSchedule, iteration: int, role: str) -> CostLevels:
    """Levels in force at ``iteration`` for the given role (``believed`` or ``true``)."""
    if role not in ("believed", "true"):
        raise CostConfigError(f"role must be 'believed' or 'true', got {role!r}")
    levels = schedule.base
    for it, lv in schedule.overrides:
        if it <= iteration:
            levels = lv
        else:
            break
    if role == "believed" and schedule.believed_bias_alpha != 1.0:
        levels = CostLevels(
            {
                g: l.scaled(schedule.believed_bias_alpha, schedule.bias_categories)
                for g, l in levels.per_group.items()
            },
            unit=levels.unit,
        )
    return levels


def classify_group(x_g: dict[str, float], record: PrototypeRecord, group_name: str) -> str:
    """Reuse class of one group configuration against the record."""
    key = group_key(record.space, group_name, x_g)
    cur = record.current_key(group_name)
    if cur is not None and keys_match(key, cur):
        return "tweak"
    if any(keys_match(key, h) for h in record.history(group_name)):
        return "swap"
    return "create"


def discrete_cost(x: Configuration, record: PrototypeRecord, levels: CostLevels) -> CostBreakdown:
    """Exact cost of realizing ``x``: the level of each group's reuse class, summed."""
    space = record.space
    levels.validate_for(space)
    per_class: dict[str, str] = {}
    per_cost: dict[str, float] = {}
    for g in space.groups:
        cls = classify_group(project(space, x, g.name), record, g.name)
        per_class[g.name] = cls
        per_cost[g.name] = levels.group(g.name).level(cls)
    return CostBreakdown(per_class, per_cost, float(sum(per_cost.values())))


def rbf_similarity(a: np.ndarray, b: np.ndarray, sigma_g: float) -> float:
    """exp(-||a-b||^2 / (2 sigma^2)) for two normalized group points."""
    if not (sigma_g > 0):
        raise CostConfigError(f"sigma must be positive, got {sigma_g}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d2 = float(np.sum((a - b) ** 2))
    return float(np.exp(-d2 / (2.0 * sigma_g**2)))


def update_record(record: PrototypeRecord, realized: Configuration) -> PrototypeRecord:
    """Append each newly built component to its group history; move ``current``.

    Histories never shrink and never duplicate an entry at snap resolution, so
    re-realizing a known configuration only moves ``current``.
    """
    realized.validate(record.space)
    out = record.copy()
    for g in record.space.groups:
        key = group_key(record.space, g.name, project(record.space, realized, g.name))
        if not any(keys_match(key, h) for h in out.histories[g.name]):
            out.histories[g.name].append(key)
    out.current = realized
    return out


class SmoothCostEvaluator:
    """Precomputed smooth-cost evaluator over normalized full-space points.

    Built once per optimizer iteration (the record and levels are fixed while
    the acquisition is searched), then queried many times by the acquisition
    optimizer. All geometry lives in normalized coordinates.
    """

    def __init__(self, record: PrototypeRecord, levels: CostLevels, relax: RelaxationParams):
        space = record.space
        levels.validate_for(space)
        self.space = space
        self.groups = []
        name_to_idx = {n: i for i, n in enumerate(space.parameter_names)}
        for g in space.groups:
            if g.name not in relax.sigma:
                raise CostConfigError(f"no sigma configured for group {g.name!r}")
            idx = np.array([name_to_idx[pn] for pn in g.parameter_names])
            params = [space.parameter(pn) for pn in g.parameter_names]
            lo = np.array([p.lower for p in params])
            span = np.array([p.span for p in params])
            cur_key = record.current_key(g.name)
            cur = None if cur_key is None else (np.asarray(cur_key) - lo) / span
            hist = []
            for h in record.history(g.name):
                if cur_key is not None and keys_match(h, cur_key):
                    continue  # the current entry carries the tweak weight, not a swap weight
                hist.append((np.asarray(h) - lo) / span)
            lv = levels.group(g.name)
            self.groups.append(
                {
                    "name": g.name,
                    "idx": idx,
                    "sigma": relax.sigma[g.name],
                    "current": cur,
                    "hist": np.array(hist) if hist else np.zeros((0, len(idx))),
                    "levels": np.array([lv.tweak, lv.swap, lv.create]),
                }
            )
        self.w_create = relax.w_create

    def value(self, u: np.ndarray) -> tuple[float, dict[str, float]]:
        total = 0.0
        per_group = {}
        for g in self.groups:
            c = self._group_value(g, u[g["idx"]])
            per_group[g["name"]] = c
            total += c
        return total, per_group

    def value_and_gradient(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        total = 0.0
        grad = np.zeros_like(u, dtype=float)
        for g in self.groups:
            c, gg = self._group_value_grad(g, u[g["idx"]])
            total += c
            grad[g["idx"]] += gg
        return total, grad

    def _weights(self, g: dict, ug: np.ndarray):
        inv2s2 = 1.0 / (2.0 * g["sigma"] ** 2)
        if g["current"] is not None:
            dt = ug - g["current"]
            wt = float(np.exp(-np.dot(dt, dt) * inv2s2))
        else:
            dt, wt = None, 0.0
        H = g["hist"]
        if len(H):
            ds = ug[None, :] - H
            ws = np.exp(-np.sum(ds * ds, axis=1) * inv2s2)
        else:
            ds = None
            ws = np.zeros(0)
        return wt, dt, ws, ds

    def _group_value(self, g: dict, ug: np.ndarray) -> float:
        wt, _, ws, _ = self._weights(g, ug)
        ct, cs, cc = g["levels"]
        ws_sum = float(ws.sum())
        S = wt + ws_sum + self.w_create
        if S <= NEGLIGIBLE_WEIGHT:
            raise DegenerateWeightsError(
                f"group {g['name']!r}: all similarity weights vanished and w_create is 0; "
                "set w_create > 0"
            )
        Q = wt * ct + ws_sum * cs + self.w_create * cc
        return Q / S

    def _group_value_grad(self, g: dict, ug: np.ndarray) -> tuple[float, np.ndarray]:
        wt, dt, ws, ds = self._weights(g, ug)
        ct, cs, cc = g["levels"]
        inv_s2 = 1.0 / g["sigma"] ** 2
        ws_sum = float(ws.sum())
        S = wt + ws_sum + self.w_create
        if S <= NEGLIGIBLE_WEIGHT:
            raise DegenerateWeightsError(
                f"group {g['name']!r}: all similarity weights vanished and w_create is 0; "
                "set w_create > 0"
            )
        Q = wt * ct + ws_sum * cs + self.w_create * cc
        # d w / d u = -w * (u - center) / sigma^2, summed over kernels
        dS = np.zeros_like(ug)
        dQ = np.zeros_like(ug)
        if wt > 0.0 and dt is not None:
            dwt = -wt * dt * inv_s2
            dS += dwt
            dQ += ct * dwt
        if len(ws):
            dws = -(ws[:, None] * ds) * inv_s2
            dsum = dws.sum(axis=0)
            dS += dsum
            dQ += cs * dsum
        return Q / S, (dQ * S - Q * dS) / (S * S)


def smooth_cost(
    x: Configuration,
    record: PrototypeRecord,
    levels: CostLevels,
    relax: RelaxationParams,
) -> tuple[float, dict[str, float]]:
    """Differentiable relaxation of :func:`discrete_cost` at a configuration."""
    from .space import normalize

    ev = SmoothCostEvaluator(record, levels, relax)
    return ev.value(normalize(record.space, x))


def smooth_cost_gradient(
    x: Configuration,
    record: PrototypeRecord,
    levels: CostLevels,
    relax: RelaxationParams,
) -> np.ndarray:
    """Gradient of the smooth cost w.r.t. normalized coordinates, full dimension."""
    from .space import normalize

    ev = SmoothCostEvaluator(record, levels, relax)
    return ev.value_and_gradient(normalize(record.space, x))[1]


def levels_all_zero(levels: CostLevels, group_name: str) -> bool:
    l = levels.group(group_name)
    return l.tweak == 0 and l.swap == 0 and l.create == 0
