"""Design spaces, configurations, component groups, and the prototype record.

A design space is an ordered list of bounded real parameters, partitioned into
disjoint component groups (e.g. the hardware shaft vs. the software filter of a
joystick). Parameters may carry a snap grid: the set of values that can
actually be fabricated. A configuration assigns one in-bounds value to every
parameter. The prototype record remembers, per group, every component
configuration that has ever been realized, plus which full configuration is
currently assembled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1

# Two group configurations are "the same buildable artifact" when every value
# matches within this absolute tolerance after snapping to the grid.
MATCH_ATOL = 1e-9

GROUP_KINDS = ("hardware", "software", "other")


class SpaceError(ValueError):
    """Invalid design-space definition (bounds, partition, or naming)."""


class BoundsError(ValueError):
    """A configuration value lies outside its parameter's bounds."""


class LookupError_(KeyError):
    """Unknown parameter or group name."""


@dataclass(frozen=True)
class Parameter:
    """One bounded real design parameter in native units.

    ``snap_step`` is the fabrication grid spacing; ``None`` means the
    parameter is continuous (no snapping).
    """

    name: str
    lower: float
    upper: float
    snap_step: float | None = None

    def __post_init__(self):
        if not self.name:
            raise SpaceError("parameter name must be non-empty")
        if not (self.lower < self.upper):
            raise SpaceError(
                f"parameter {self.name!r}: lower ({self.lower}) must be < upper ({self.upper})"
            )
        if self.snap_step is not None:
            if not (self.snap_step > 0):
                raise SpaceError(f"parameter {self.name!r}: snap_step must be positive")
            if self.snap_step > (self.upper - self.lower):
                raise SpaceError(
                    f"parameter {self.name!r}: snap_step {self.snap_step} exceeds range "
                    f"{self.upper - self.lower}"
                )

    @property
    def span(self) -> float:
        return self.upper - self.lower

    def snap(self, value: float) -> float:
        """Nearest grid point, ties toward the lower value; continuous values pass through."""
        if self.snap_step is None:
            return float(value)
        step = self.snap_step
        k = (value - self.lower) / step
        k_max = math.floor((self.upper - self.lower) / step + 1e-12)
        lo = min(max(math.floor(k), 0), k_max)
        hi = min(lo + 1, k_max)
        d_lo = abs(value - (self.lower + lo * step))
        d_hi = abs(value - (self.lower + hi * step))
        k_best = lo if d_lo <= d_hi else hi
        return self.lower + k_best * step


@dataclass(frozen=True)
class ComponentGroup:
    """A set of parameters fabricated or implemented as one unit."""

    name: str
    parameter_names: tuple[str, ...]
    kind: str = "other"

    def __post_init__(self):
        if not self.name:
            raise SpaceError("group name must be non-empty")
        if len(self.parameter_names) == 0:
            raise SpaceError(f"group {self.name!r} must contain at least one parameter")
        if len(set(self.parameter_names)) != len(self.parameter_names):
            raise SpaceError(f"group {self.name!r} lists a parameter twice")
        if self.kind not in GROUP_KINDS:
            raise SpaceError(f"group {self.name!r}: kind must be one of {GROUP_KINDS}")
        if not isinstance(self.parameter_names, tuple):
            object.__setattr__(self, "parameter_names", tuple(self.parameter_names))


@dataclass(frozen=True)
class DesignSpace:
    """Ordered parameters partitioned into disjoint component groups."""

    parameters: tuple[Parameter, ...]
    groups: tuple[ComponentGroup, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "groups", tuple(self.groups))
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise SpaceError("parameter names must be unique")
        gnames = [g.name for g in self.groups]
        if len(set(gnames)) != len(gnames):
            raise SpaceError("group names must be unique")
        grouped: list[str] = []
        for g in self.groups:
            for pn in g.parameter_names:
                if pn not in names:
                    raise SpaceError(f"group {g.name!r} references unknown parameter {pn!r}")
            grouped.extend(g.parameter_names)
        if len(grouped) != len(set(grouped)):
            raise SpaceError("groups must be disjoint (a parameter appears in two groups)")
        if set(grouped) != set(names):
            missing = sorted(set(names) - set(grouped))
            raise SpaceError(f"groups must cover every parameter; missing {missing}")
        object.__setattr__(
            self,
            "_index",
            {
                "param": {p.name: i for i, p in enumerate(self.parameters)},
                "group": {g.name: g for g in self.groups},
            },
        )

    @property
    def dimension(self) -> int:
        return len(self.parameters)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    def parameter(self, name: str) -> Parameter:
        try:
            return self.parameters[self._index["param"][name]]
        except KeyError:
            raise LookupError_(f"unknown parameter {name!r}") from None

    def group(self, name: str) -> ComponentGroup:
        try:
            return self._index["group"][name]
        except KeyError:
            raise LookupError_(f"unknown group {name!r}") from None

    def group_of(self, parameter_name: str) -> ComponentGroup:
        for g in self.groups:
            if parameter_name in g.parameter_names:
                return g
        raise LookupError_(f"unknown parameter {parameter_name!r}")

    # --- JSON schema (the contract shared by CLI, service, and UI) ---

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "parameters": [
                {
                    "name": p.name,
                    "lower": p.lower,
                    "upper": p.upper,
                    "snap_step": p.snap_step,
                }
                for p in self.parameters
            ],
            "groups": [
                {"name": g.name, "parameters": list(g.parameter_names), "kind": g.kind}
                for g in self.groups
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DesignSpace":
        try:
            params = tuple(
                Parameter(
                    name=p["name"],
                    lower=float(p["lower"]),
                    upper=float(p["upper"]),
                    snap_step=_parse_snap(p.get("snap_step")),
                )
                for p in d["parameters"]
            )
            groups = tuple(
                ComponentGroup(
                    name=g["name"],
                    parameter_names=tuple(g["parameters"]),
                    kind=g.get("kind", "other"),
                )
                for g in d["groups"]
            )
        except (KeyError, TypeError) as e:
            raise SpaceError(f"malformed design-space JSON: {e}") from e
        return cls(parameters=params, groups=groups)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DesignSpace":
        return cls.from_json_dict(json.loads(text))


def _parse_snap(raw) -> float | None:
    if raw is None or raw == "continuous":
        return None
    return float(raw)


@dataclass(frozen=True)
class Configuration:
    """A full assignment of native-unit values to every parameter of a space."""

    values: dict[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def validate(self, space: DesignSpace) -> "Configuration":
        missing = set(space.parameter_names) - set(self.values)
        extra = set(self.values) - set(space.parameter_names)
        if missing or extra:
            raise BoundsError(
                f"configuration keys do not match space (missing {sorted(missing)}, "
                f"extra {sorted(extra)})"
            )
        for p in space.parameters:
            v = self.values[p.name]
            if not np.isfinite(v) or v < p.lower - 1e-12 or v > p.upper + 1e-12:
                raise BoundsError(
                    f"parameter {p.name!r}: value {v} outside bounds [{p.lower}, {p.upper}]"
                )
        return self


def normalize(space: DesignSpace, x: Configuration) -> np.ndarray:
    """Map a configuration onto the unit cube, in parameter order."""
    x.validate(space)
    out = np.empty(space.dimension)
    for i, p in enumerate(space.parameters):
        out[i] = (x.values[p.name] - p.lower) / p.span
    return out


def denormalize(space: DesignSpace, u: np.ndarray) -> Configuration:
    """Inverse of :func:`normalize`: unit-cube point to native-unit configuration."""
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dimension,):
        raise BoundsError(f"expected a point of dimension {space.dimension}, got shape {u.shape}")
    if np.any(u < -1e-12) or np.any(u > 1 + 1e-12):
        raise BoundsError("unit-cube point has a component outside [0, 1]")
    vals = {}
    for i, p in enumerate(space.parameters):
        vals[p.name] = float(np.clip(p.lower + u[i] * p.span, p.lower, p.upper))
    return Configuration(vals)


def project(space: DesignSpace, x: Configuration, group_name: str) -> dict[str, float]:
    """The values of ``x`` restricted to one group, preserving group order."""
    g = space.group(group_name)
    return {pn: x.values[pn] for pn in g.parameter_names}


def snap_configuration(space: DesignSpace, x: Configuration) -> Configuration:
    """Project a configuration onto the buildable grid (the realize step)."""
    x.validate(space)
    return Configuration({p.name: p.snap(x.values[p.name]) for p in space.parameters})


def group_key(space: DesignSpace, group_name: str, values: dict[str, float]) -> tuple[float, ...]:
    """Canonical snapped tuple for a group configuration, used for record membership."""
    g = space.group(group_name)
    return tuple(space.parameter(pn).snap(values[pn]) for pn in g.parameter_names)


def keys_match(a: tuple[float, ...], b: tuple[float, ...]) -> bool:
    return len(a) == len(b) and all(abs(x - y) <= MATCH_ATOL for x, y in zip(a, b))


@dataclass
class PrototypeRecord:
    """Per-group history of every realized component configuration.

    Histories only grow, entries are distinct at snap resolution, and the
    ``current`` configuration (the prototype on the bench right now) is always
    a member of each group's history. ``current`` is ``None`` before anything
    has been built.
    """

    space: DesignSpace
    histories: dict[str, list[tuple[float, ...]]] = field(default_factory=dict)
    current: Configuration | None = None

    def __post_init__(self):
        for g in self.space.groups:
            self.histories.setdefault(g.name, [])

    def copy(self) -> "PrototypeRecord":
        return PrototypeRecord(
            space=self.space,
            histories={k: list(v) for k, v in self.histories.items()},
            current=self.current,
        )

    def history(self, group_name: str) -> list[tuple[float, ...]]:
        if group_name not in self.histories:
            raise LookupError_(f"unknown group {group_name!r}")
        return self.histories[group_name]

    def contains(self, group_name: str, values: dict[str, float]) -> bool:
        key = group_key(self.space, group_name, values)
        return any(keys_match(key, h) for h in self.history(group_name))

    def current_key(self, group_name: str) -> tuple[float, ...] | None:
        if self.current is None:
            return None
        return group_key(self.space, group_name, project(self.space, self.current, group_name))

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "histories": {
                g.name: [
                    dict(zip(g.parameter_names, entry)) for entry in self.histories[g.name]
                ]
                for g in self.space.groups
            },
            "current": None if self.current is None else dict(self.current.values),
        }


def random_configuration(space: DesignSpace, rng: np.random.Generator) -> Configuration:
    return denormalize(space, rng.uniform(size=space.dimension))
