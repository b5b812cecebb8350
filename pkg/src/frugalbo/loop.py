"""The outer optimization loop: initialize, propose-realize-evaluate-update, stop.

The loop is callback-parameterized: benchmarks pass a noisy wrapper around a
ground-truth function, live sessions pass human ratings. Every step logs the
proposal, the snapped realization, the per-group reuse class, the believed
cost (what the planner assumed) and the true cost (what the budget paid), so a
finished trace can be replayed and audited offline.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .acquisition import AcquisitionSpec, maximize, realize
from .costs import CostSchedule, RelaxationParams, discrete_cost, effective_levels, update_record
from .gp import Dataset, GPModel, fit
from .space import Configuration, DesignSpace, PrototypeRecord, denormalize, normalize

# An evaluation callback returns the observed utility, optionally paired with
# the noiseless ground-truth objective value (for regret in benchmarks).
EvalCallback = Callable[[Configuration], "float | tuple[float, float]"]


class ConfigError(ValueError):
    """RunConfig is internally inconsistent."""


class CallbackError(RuntimeError):
    """The evaluation callback raised; the partial trace is preserved on .trace."""

    def __init__(self, message: str, trace: "OptimizationTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class RunConfig:
    """Everything one optimization run needs besides the evaluation callback."""

    space: DesignSpace
    schedule: CostSchedule
    relax: RelaxationParams
    acquisition: AcquisitionSpec
    init_samples: int = 3
    max_iterations: int | None = None
    max_budget: float | None = None
    seed: int = 0
    gp_restarts: int = 8
    gp_kernel: str = "rbf"

    def __post_init__(self):
        if self.init_samples < 1:
            raise ConfigError("init_samples must be >= 1")
        if self.max_iterations is None and self.max_budget is None:
            raise ConfigError("a stop rule is required: max_iterations and/or max_budget")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ConfigError("max_iterations must be nonnegative")
        if self.max_budget is not None and not (self.max_budget > 0):
            raise ConfigError("max_budget must be positive")
        self.schedule.base.validate_for(self.space)
        for _, lv in self.schedule.overrides:
            lv.validate_for(self.space)


@dataclass
class TraceStep:
    iteration: int
    proposed: Configuration
    realized: Configuration
    class_per_group: dict[str, str]
    believed_cost: float
    true_cost_paid: float
    cumulative_true_cost: float
    observed_y: float
    best_so_far: float
    true_value: float | None = None
    acquisition_value: float | None = None
    gp_hyperparameters: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "proposed": dict(self.proposed.values),
            "realized": dict(self.realized.values),
            "class_per_group": dict(self.class_per_group),
            "believed_cost": self.believed_cost,
            "true_cost_paid": self.true_cost_paid,
            "cumulative_true_cost": self.cumulative_true_cost,
            "observed_y": self.observed_y,
            "best_so_far": self.best_so_far,
            "true_value": self.true_value,
            "acquisition_value": self.acquisition_value,
            "gp_hyperparameters": self.gp_hyperparameters,
        }


@dataclass
class OptimizationTrace:
    space: DesignSpace
    steps: list[TraceStep] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    finished_reason: str | None = None

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def cumulative_true_cost(self) -> float:
        return self.steps[-1].cumulative_true_cost if self.steps else 0.0

    @property
    def best_so_far(self) -> float:
        return self.steps[-1].best_so_far if self.steps else -np.inf

    def csv_fieldnames(self, extra: dict | None = None) -> list[str]:
        names = list(extra or ()) + ["iteration"]
        names += [f"proposed_{p}" for p in self.space.parameter_names]
        names += [f"realized_{p}" for p in self.space.parameter_names]
        names += [f"class_{g.name}" for g in self.space.groups]
        names += [
            "believed_cost",
            "true_cost_paid",
            "cumulative_true_cost",
            "observed_y",
            "best_so_far",
            "true_value",
            "acquisition_value",
            "gp_hyperparameters",
        ]
        return names

    def csv_rows(self, extra: dict | None = None):
        for s in self.steps:
            row = dict(extra or {})
            row["iteration"] = s.iteration
            for p in self.space.parameter_names:
                row[f"proposed_{p}"] = repr(s.proposed.values[p])
                row[f"realized_{p}"] = repr(s.realized.values[p])
            for g in self.space.groups:
                row[f"class_{g.name}"] = s.class_per_group[g.name]
            row["believed_cost"] = repr(s.believed_cost)
            row["true_cost_paid"] = repr(s.true_cost_paid)
            row["cumulative_true_cost"] = repr(s.cumulative_true_cost)
            row["observed_y"] = repr(s.observed_y)
            row["best_so_far"] = repr(s.best_so_far)
            row["true_value"] = "" if s.true_value is None else repr(s.true_value)
            row["acquisition_value"] = (
                "" if s.acquisition_value is None else repr(s.acquisition_value)
            )
            row["gp_hyperparameters"] = (
                "" if s.gp_hyperparameters is None else json.dumps(s.gp_hyperparameters)
            )
            yield row

    def write_csv(self, path, extra: dict | None = None) -> None:
        with open(path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=self.csv_fieldnames(extra))
            w.writeheader()
            for row in self.csv_rows(extra):
                w.writerow(row)

    def write_jsonl(self, path, extra: dict | None = None) -> None:
        with open(path, "w") as f:
            for s in self.steps:
                d = dict(extra or {})
                d.update(s.to_json_dict())
                f.write(json.dumps(d) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "finished_reason": self.finished_reason,
            "steps": [s.to_json_dict() for s in self.steps],
        }


def _spawned_seed(base_seed: int, *branch: int) -> int:
    return int(np.random.SeedSequence([base_seed, *branch]).generate_state(1)[0])


@dataclass
class RunState:
    """Mutable state threaded through initialize/step."""

    config: RunConfig
    evaluate: EvalCallback
    record: PrototypeRecord
    dataset: Dataset
    trace: OptimizationTrace
    model: GPModel | None = None
    finished: bool = False


def _unpack_eval(result) -> tuple[float, float | None]:
    if isinstance(result, tuple):
        y, true_value = result
        return float(y), float(true_value)
    return float(result), None


def _evaluate_and_log(
    state: RunState,
    proposed: Configuration,
    realized: Configuration,
    acquisition_value: float | None,
    gp_hyperparameters: dict | None,
) -> bool:
    """Pay for, evaluate, and log one realized configuration.

    Returns False (and marks the run finished) when the true cost of this
    configuration would overdraw the budget: the evaluation does not happen.
    """
    cfg = state.config
    iteration = len(state.trace.steps) + 1
    believed = effective_levels(cfg.schedule, iteration, "believed")
    true = effective_levels(cfg.schedule, iteration, "true")
    believed_bd = discrete_cost(realized, state.record, believed)
    true_bd = discrete_cost(realized, state.record, true)

    spent = state.trace.cumulative_true_cost
    if cfg.max_budget is not None and spent + true_bd.total > cfg.max_budget + 1e-9:
        state.finished = True
        state.trace.finished_reason = "budget_exhausted"
        if not state.trace.steps:
            warnings.warn(
                "budget cannot afford even the first configuration; trace is empty",
                stacklevel=2,
            )
        return False

    try:
        y, true_value = _unpack_eval(state.evaluate(realized))
    except Exception as e:
        state.finished = True
        state.trace.finished_reason = "callback_error"
        raise CallbackError(f"evaluation callback failed: {e}", state.trace) from e

    state.dataset = state.dataset.append(normalize(cfg.space, realized), y)
    state.record = update_record(state.record, realized)
    best = max(state.trace.best_so_far, y)
    state.trace.steps.append(
        TraceStep(
            iteration=iteration,
            proposed=proposed,
            realized=realized,
            class_per_group=believed_bd.per_group_class,
            believed_cost=believed_bd.total,
            true_cost_paid=true_bd.total,
            cumulative_true_cost=spent + true_bd.total,
            observed_y=y,
            best_so_far=best,
            true_value=true_value,
            acquisition_value=acquisition_value,
            gp_hyperparameters=gp_hyperparameters,
        )
    )
    return True


def initialize(config: RunConfig, evaluate: EvalCallback) -> RunState:
    """Draw, realize, pay for, and evaluate the seeded Sobol initialization samples."""
    state = RunState(
        config=config,
        evaluate=evaluate,
        record=PrototypeRecord(space=config.space),
        dataset=Dataset(np.zeros((0, config.space.dimension)), np.zeros(0)),
        trace=OptimizationTrace(space=config.space, metadata={"seed": config.seed}),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # Sobol balance warning for non-power-of-2 draws
        points = qmc.Sobol(
            config.space.dimension, scramble=True, seed=_spawned_seed(config.seed, 0)
        ).random(config.init_samples)
    for u in points:
        proposed = denormalize(config.space, u)
        realized = realize(config.space, proposed)
        if not _evaluate_and_log(state, proposed, realized, None, None):
            return state
    state.model = _refit(state)
    return state


def _refit(state: RunState) -> GPModel:
    cfg = state.config
    return fit(
        state.dataset,
        restarts=cfg.gp_restarts,
        seed=_spawned_seed(cfg.seed, 1, len(state.dataset)),
        kernel=cfg.gp_kernel,
    )


def step(state: RunState) -> RunState:
    """One acquisition-driven iteration; marks the state finished on budget stop."""
    if state.finished:
        return state
    cfg = state.config
    iteration = len(state.trace.steps) + 1
    believed = effective_levels(cfg.schedule, iteration, "believed")
    proposed, acq_value = maximize(
        cfg.acquisition,
        state.model,
        best=state.trace.best_so_far,
        record=state.record,
        levels=believed,
        relax=cfg.relax,
        space=cfg.space,
        seed=_spawned_seed(cfg.seed, 2, iteration),
    )
    realized = realize(cfg.space, proposed)
    if _evaluate_and_log(
        state, proposed, realized, acq_value, state.model.hyperparameters()
    ):
        state.model = _refit(state)
    return state


def run(config: RunConfig, evaluate: EvalCallback) -> OptimizationTrace:
    """Run to the stop rule: a fixed post-init iteration count and/or a hard budget.

    A budget-limited run terminates *before* any evaluation whose true
    discrete cost would overdraw the remaining budget; it never overspends.
    """
    state = initialize(config, evaluate)
    done_loop_iters = 0
    while not state.finished:
        if config.max_iterations is not None and done_loop_iters >= config.max_iterations:
            state.trace.finished_reason = "max_iterations"
            break
        step(state)
        if not state.finished:
            done_loop_iters += 1
    state.trace.metadata.update(
        {
            "init_samples": config.init_samples,
            "max_iterations": config.max_iterations,
            "max_budget": config.max_budget,
            "mode": config.acquisition.mode,
        }
    )
    return state.trace


def regret(trace: OptimizationTrace, global_optimum: float) -> np.ndarray:
    """Per-step simple regret on the noiseless ground truth (minimization).

    Requires the run's callback to have supplied true objective values.
    """
    values = []
    for s in trace.steps:
        if s.true_value is None:
            raise ValueError("trace has no ground-truth values; regret is undefined")
        values.append(s.true_value)
    if not values:
        return np.zeros(0)
    best = np.minimum.accumulate(np.asarray(values, dtype=float))
    return best - global_optimum
