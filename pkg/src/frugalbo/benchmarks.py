"""Ground-truth test functions and the simulated observation noise model.

All functions are minimized; the optimizer maximizes utility, so callbacks
wrap them as ``u = -(f(x) * eps_m + eps_a)`` with multiplicative noise
``eps_m ~ N(1, sd_m^2)`` and additive noise ``eps_a ~ N(0, sd_a^2)``. Regret is
always computed on the noiseless value.

The two-dimensional suite keeps the convention that x1 is a hardware
parameter and x2 a software parameter. Note the 2-D "rosenbrock" here uses the
coupling term 100*(x1 - x2^2)^2 (hardware-software interdependence, optimum 0
at (1, 1)); the textbook arrangement is available as
"rosenbrock_canonical".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .space import ComponentGroup, Configuration, DesignSpace, Parameter


class GroundTruthError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    name: str
    dimension: int
    optimum_value: float
    optimizer_point: tuple[float, ...]
    lower: float
    upper: float
    fn: Callable[[np.ndarray], float]

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape != (self.dimension,):
            raise GroundTruthError(
                f"{self.name} expects dimension {self.dimension}, got shape {x.shape}"
            )
        return float(self.fn(x))


def _rosenbrock_2d(x: np.ndarray) -> float:
    return (1.0 - x[0]) ** 2 + 100.0 * (x[0] - x[1] ** 2) ** 2


def _rosenbrock_canonical_2d(x: np.ndarray) -> float:
    return (1.0 - x[0]) ** 2 + 100.0 * (x[1] - x[0] ** 2) ** 2


def _rosenbrock_nd(x: np.ndarray) -> float:
    if len(x) == 1:
        return (1.0 - x[0]) ** 2
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def _ackley(x: np.ndarray) -> float:
    a = -20.0 * np.exp(-0.2 * np.sqrt(0.5 * (x[0] ** 2 + x[1] ** 2)))
    b = -np.exp(0.5 * (np.cos(2 * np.pi * x[0]) + np.cos(2 * np.pi * x[1])))
    return float(a + b + 20.0 + np.e)


def _goldstein_price(x: np.ndarray) -> float:
    x1, x2 = x
    t1 = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2)
    t2 = 30 + (2 * x1 - 3 * x2) ** 2 * (
        18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2
    )
    return float(t1 * t2)


def _levy(x: np.ndarray) -> float:
    w = 1.0 + (x - 1.0) / 4.0
    return float(
        np.sin(np.pi * w[0]) ** 2
        + (w[0] - 1) ** 2 * (1 + 10 * np.sin(np.pi * w[0] + 1) ** 2)
        + (w[1] - 1) ** 2 * (1 + np.sin(2 * np.pi * w[1]) ** 2)
    )


def ground_truth(name: str, dimension: int = 2) -> GroundTruth:
    """Benchmark function by name on its conventional box."""
    if name == "rosenbrock":
        return GroundTruth("rosenbrock", 2, 0.0, (1.0, 1.0), -2.0, 2.0, _rosenbrock_2d)
    if name == "rosenbrock_canonical":
        return GroundTruth(
            "rosenbrock_canonical", 2, 0.0, (1.0, 1.0), -2.0, 2.0, _rosenbrock_canonical_2d
        )
    if name == "rosenbrock_nd":
        if dimension < 1:
            raise GroundTruthError("rosenbrock_nd needs dimension >= 1")
        return GroundTruth(
            "rosenbrock_nd", dimension, 0.0, tuple([1.0] * dimension), -2.0, 2.0, _rosenbrock_nd
        )
    if name == "ackley":
        return GroundTruth("ackley", 2, 0.0, (0.0, 0.0), -5.0, 5.0, _ackley)
    if name == "goldstein_price":
        return GroundTruth("goldstein_price", 2, 3.0, (0.0, -1.0), -2.0, 2.0, _goldstein_price)
    if name == "levy":
        return GroundTruth("levy", 2, 0.0, (1.0, 1.0), -10.0, 10.0, _levy)
    raise GroundTruthError(f"unknown ground truth {name!r}")


FUNCTION_NAMES = ("rosenbrock", "rosenbrock_canonical", "rosenbrock_nd", "ackley",
                  "goldstein_price", "levy")


def eval_ground_truth(gt: GroundTruth, x) -> float:
    return gt(x)


@dataclass
class NoiseModel:
    """Seeded additive + multiplicative Gaussian observation noise."""

    additive_sd: float = 0.1
    multiplicative_sd: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.additive_sd < 0 or self.multiplicative_sd < 0:
            raise GroundTruthError("noise standard deviations must be nonnegative")
        self._rng = np.random.default_rng(self.seed)

    def observe(self, f_value: float) -> float:
        eps_m = self._rng.normal(1.0, self.multiplicative_sd) if self.multiplicative_sd else 1.0
        eps_a = self._rng.normal(0.0, self.additive_sd) if self.additive_sd else 0.0
        return f_value * eps_m + eps_a


def noisy_observe(gt: GroundTruth, noise: NoiseModel, x) -> float:
    """One noisy draw of gt at x from the model's seeded stream."""
    return noise.observe(gt(x))


def benchmark_space(gt: GroundTruth, n_groups: int | None = None,
                    snap_fraction: float = 0.01) -> DesignSpace:
    """Design space over the function's box with a 1% fabrication grid.

    2-D functions get the hardware(x1)/software(x2) grouping; n-dimensional
    ones are split into ``n_groups`` contiguous, independently-buildable
    hardware components (default one).
    """
    step = (gt.upper - gt.lower) * snap_fraction
    params = tuple(
        Parameter(name=f"x{i + 1}", lower=gt.lower, upper=gt.upper, snap_step=step)
        for i in range(gt.dimension)
    )
    if gt.dimension == 2 and n_groups is None:
        groups = (
            ComponentGroup("hardware", ("x1",), kind="hardware"),
            ComponentGroup("software", ("x2",), kind="software"),
        )
        return DesignSpace(params, groups)
    k = n_groups or 1
    if not (1 <= k <= gt.dimension) or gt.dimension % k != 0:
        raise GroundTruthError(
            f"cannot split {gt.dimension} parameters into {k} equal components"
        )
    size = gt.dimension // k
    groups = tuple(
        ComponentGroup(
            f"hw{j + 1}",
            tuple(f"x{j * size + i + 1}" for i in range(size)),
            kind="hardware",
        )
        for j in range(k)
    )
    return DesignSpace(params, groups)


def make_callback(gt: GroundTruth, noise: NoiseModel):
    """Evaluation callback returning (observed utility, noiseless objective)."""

    def evaluate(config: Configuration) -> tuple[float, float]:
        x = np.array([config.values[f"x{i + 1}"] for i in range(gt.dimension)])
        f = gt(x)
        return -noise.observe(f), f

    return evaluate
