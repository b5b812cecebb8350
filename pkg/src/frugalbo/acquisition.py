"""Expected improvement, its cost-normalized variant, and their maximization.

The engine maximizes utility internally. ``standard_ei`` scores a candidate by
its expected improvement over the incumbent; ``cost_aware`` divides that score
by the smooth relaxed cost, so a candidate wins by promising improvement *per
unit cost*. Maximization runs multi-start L-BFGS-B on the unit cube with
analytic gradients, then the winner is snapped onto the buildable grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr
from scipy.stats import qmc

from .costs import (
    CostConfigError,
    CostLevels,
    RelaxationParams,
    SmoothCostEvaluator,
    levels_all_zero,
)
from .gp import GPModel, predict, predict_gradient
from .space import Configuration, DesignSpace, PrototypeRecord, denormalize, snap_configuration

MODES = ("standard_ei", "cost_aware")

_SQRT_2PI = np.sqrt(2.0 * np.pi)
# Below this posterior std the EI collapses to its deterministic limit.
_STD_EPS = 1e-12


@dataclass(frozen=True)
class AcquisitionSpec:
    """Which score to maximize and how the multi-start search is seeded.

    ``history_starts`` of the non-Sobol starts are drawn near random
    combinations of recorded component values (the low-cost bands of the
    relaxed cost), so the search reliably reaches reuse optima; the rest are
    uniform.
    """

    mode: str = "cost_aware"
    xi_jitter: float = 0.0
    n_starts: int = 16
    seed: int = 0
    history_starts: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.xi_jitter < 0:
            raise ValueError("xi_jitter must be nonnegative")
        if self.history_starts < 0:
            raise ValueError("history_starts must be nonnegative")


def _phi(z: np.ndarray | float) -> np.ndarray | float:
    return np.exp(-0.5 * np.square(z)) / _SQRT_2PI


def expected_improvement(model: GPModel, x: np.ndarray, best: float, xi: float = 0.0) -> float:
    """Closed-form EI of a unit-cube point over the incumbent ``best``."""
    mean, std = predict(model, x)
    gap = mean - best - xi
    if std < _STD_EPS:
        return max(gap, 0.0)
    z = gap / std
    return float(gap * ndtr(z) + std * _phi(z))


def _ei_and_grad(model: GPModel, x: np.ndarray, best: float, xi: float):
    mean, std = predict(model, x)
    dmean, dstd = predict_gradient(model, x)
    gap = mean - best - xi
    if std < _STD_EPS:
        if gap > 0:
            return gap, dmean
        return 0.0, np.zeros_like(dmean)
    z = gap / std
    cdf = ndtr(z)
    pdf = _phi(z)
    return float(gap * cdf + std * pdf), cdf * dmean + pdf * dstd


def cost_aware_value(
    model: GPModel,
    x: np.ndarray,
    best: float,
    record: PrototypeRecord,
    levels: CostLevels,
    relax: RelaxationParams,
    xi: float = 0.0,
) -> float:
    """EI divided by the smooth relaxed cost at a unit-cube point."""
    _reject_zero_levels(record.space, levels)
    ev = SmoothCostEvaluator(record, levels, relax)
    c, _ = ev.value(np.asarray(x, dtype=float))
    return expected_improvement(model, x, best, xi) / c


def _reject_zero_levels(space: DesignSpace, levels: CostLevels) -> None:
    for g in space.groups:
        if levels_all_zero(levels, g.name):
            raise CostConfigError(
                f"group {g.name!r} has all-zero cost levels; cost_aware mode divides by "
                "the smooth cost, which could vanish"
            )


def realize(space: DesignSpace, x_star: Configuration) -> Configuration:
    """Snap a proposal onto the buildable grid (ties toward the lower value)."""
    return snap_configuration(space, x_star)


def _history_band_starts(
    record: PrototypeRecord,
    relax: RelaxationParams,
    rng: np.random.Generator,
    count: int,
    d: int,
) -> list[np.ndarray]:
    """Starts near random combinations of per-group recorded values."""
    space = record.space
    name_to_idx = {n: i for i, n in enumerate(space.parameter_names)}
    per_group = []
    for g in space.groups:
        hist = record.history(g.name)
        if not hist:
            return []
        idx = [name_to_idx[pn] for pn in g.parameter_names]
        params = [space.parameter(pn) for pn in g.parameter_names]
        norm = [
            [(v - p.lower) / p.span for v, p in zip(entry, params)] for entry in hist
        ]
        per_group.append((idx, norm, relax.sigma[g.name]))
    starts = []
    for _ in range(count):
        u = np.empty(d)
        for idx, norm, sigma in per_group:
            entry = norm[int(rng.integers(len(norm)))]
            u[idx] = np.clip(entry + rng.normal(0.0, sigma, size=len(idx)), 0.0, 1.0)
        starts.append(u)
    return starts


def _incumbent_index(model: GPModel) -> int | None:
    if len(model.X) == 0:
        return None
    # Training targets are recoverable exactly from the cached factorization:
    # y_standardized = K alpha = L (L^T alpha).
    y = model._L @ (model._L.T @ model._alpha)
    return int(np.argmax(y))


def maximize(
    spec: AcquisitionSpec,
    model: GPModel,
    best: float,
    record: PrototypeRecord,
    levels: CostLevels,
    relax: RelaxationParams,
    space: DesignSpace,
    seed: int | None = None,
) -> tuple[Configuration, float]:
    """Maximize the configured acquisition over the unit cube.

    Multi-start bounded L-BFGS-B with analytic gradients; starts are scrambled
    Sobol points, the incumbent training point, and uniform draws. Returns the
    winning point de-normalized to native units (not yet snapped) and its
    acquisition value. Deterministic for a fixed seed; value ties resolve to
    the lowest start index.
    """
    d = space.dimension
    cost_ev = None
    if spec.mode == "cost_aware":
        _reject_zero_levels(space, levels)
        cost_ev = SmoothCostEvaluator(record, levels, relax)
    xi = spec.xi_jitter

    def objective(u: np.ndarray):
        ei, dei = _ei_and_grad(model, u, best, xi)
        if cost_ev is None:
            return -ei, -dei
        c, dc = cost_ev.value_and_gradient(u)
        return -ei / c, -(dei * c - ei * dc) / (c * c)

    seed = spec.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n_sobol = max(spec.n_starts // 2, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # Sobol balance warning for non-power-of-2 draws
        sobol = qmc.Sobol(d, scramble=True, seed=rng.integers(2**31 - 1)).random(n_sobol)
    starts = list(sobol)
    inc = _incumbent_index(model)
    if inc is not None and len(starts) < spec.n_starts:
        starts.append(model.X[inc].copy())
    n_hist = min(spec.history_starts, max(spec.n_starts - len(starts), 0))
    if spec.mode == "cost_aware":
        starts.extend(_history_band_starts(record, relax, rng, n_hist, d))
    while len(starts) < spec.n_starts:
        starts.append(rng.uniform(size=d))
    starts = starts[: spec.n_starts]

    bounds = [(0.0, 1.0)] * d
    best_u, best_f = None, np.inf
    for u0 in starts:
        f0, _ = objective(u0)
        try:
            res = minimize(
                objective,
                u0,
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": 60},
            )
            u_cand, f_cand = (res.x, res.fun) if res.fun <= f0 else (u0, f0)
        except Exception:
            u_cand, f_cand = u0, f0  # keep the evaluated start if the line search blew up
        if f_cand < best_f:
            best_f, best_u = f_cand, np.clip(u_cand, 0.0, 1.0)
    return denormalize(space, best_u), -best_f
