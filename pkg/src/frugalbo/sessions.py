"""Live human-in-the-loop optimization sessions with event-sourced persistence.

A session runs the same propose-realize-rate-update cycle as the batch loop,
split across two calls: ``propose`` returns the next configuration with its
per-group reuse class and believed cost (so the operator knows what to
fabricate vs. reuse), ``observe`` records the performance/preference scores,
pays the true cost, and advances the optimizer.

Every state change appends one JSON line to the session's event file; folding
the file back reproduces the session exactly, so a restarted service resumes
every session mid-flight.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionSpec, maximize, realize
from .costs import (
    CostLevels,
    CostSchedule,
    RelaxationParams,
    discrete_cost,
    effective_levels,
    update_record,
)
from .gp import Dataset, fit
from .loop import _spawned_seed
from .space import SCHEMA_VERSION, Configuration, DesignSpace, PrototypeRecord, denormalize, normalize

STATES = ("awaiting_proposal", "awaiting_rating", "finished")
EVENT_KINDS = ("created", "proposed", "observed", "costs_reweighted", "finished")


class SessionError(ValueError):
    """Semantically invalid request body."""


class StateConflictError(RuntimeError):
    """The request is not legal in the session's current state."""


class SessionNotFoundError(KeyError):
    pass


@dataclass(frozen=True)
class UtilityWeights:
    performance: float
    preference: float

    def __post_init__(self):
        for name, v in (("performance", self.performance), ("preference", self.preference)):
            if not (0.0 <= v <= 1.0):
                raise SessionError(f"utility_weights.{name} must lie in [0, 1], got {v}")
        if abs(self.performance + self.preference - 1.0) > 1e-9:
            raise SessionError(
                f"utility_weights must sum to 1, got {self.performance + self.preference}"
            )


@dataclass
class SessionStep:
    iteration: int
    proposed: Configuration
    realized: Configuration
    class_per_group: dict[str, str]
    believed_cost: dict  # breakdown dict as returned by propose
    performance_score: float | None = None
    preference_score: float | None = None
    utility: float | None = None
    true_cost_paid: float | None = None
    cumulative_true_cost: float | None = None
    best_so_far: float | None = None


@dataclass
class Session:
    id: str
    space: DesignSpace
    schedule: CostSchedule
    relax: RelaxationParams
    acquisition: AcquisitionSpec
    weights: UtilityWeights
    init_samples: int = 3
    max_iterations: int | None = None
    max_budget: float | None = None
    seed: int = 0
    gp_restarts: int = 8
    state: str = "awaiting_proposal"
    finish_reason: str | None = None
    record: PrototypeRecord = None
    steps: list[SessionStep] = field(default_factory=list)
    pending: SessionStep | None = None

    def __post_init__(self):
        if self.record is None:
            self.record = PrototypeRecord(space=self.space)
        if self.max_iterations is None and self.max_budget is None:
            raise SessionError("a stop rule is required: max_iterations and/or max_budget")
        self.schedule.base.validate_for(self.space)

    # --- derived quantities -------------------------------------------------

    @property
    def cumulative_true_cost(self) -> float:
        return self.steps[-1].cumulative_true_cost if self.steps else 0.0

    @property
    def remaining_budget(self) -> float | None:
        if self.max_budget is None:
            return None
        return self.max_budget - self.cumulative_true_cost

    def _next_iteration(self) -> int:
        return len(self.steps) + 1

    def _utilities(self) -> np.ndarray:
        """Utilities for modeling: running min-max over raw performance scores."""
        perf = np.array([s.performance_score for s in self.steps], dtype=float)
        pref = np.array([s.preference_score for s in self.steps], dtype=float)
        return self.weights.performance * _minmax(perf) + self.weights.preference * (pref / 100.0)

    def _sobol_points(self) -> np.ndarray:
        import warnings

        from scipy.stats import qmc

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return qmc.Sobol(
                self.space.dimension, scramble=True, seed=_spawned_seed(self.seed, 0)
            ).random(self.init_samples)

    # --- the two halves of one optimizer iteration ---------------------------

    def propose(self) -> dict:
        if self.state == "finished":
            raise StateConflictError(f"session is finished ({self.finish_reason})")
        if self.state != "awaiting_proposal":
            raise StateConflictError("a proposal is already awaiting its rating")
        iteration = self._next_iteration()
        believed = effective_levels(self.schedule, iteration, "believed")
        if iteration <= self.init_samples:
            proposed = denormalize(self.space, self._sobol_points()[iteration - 1])
        else:
            model = fit(
                Dataset(
                    np.array([normalize(self.space, s.realized) for s in self.steps]),
                    self._utilities(),
                ),
                restarts=self.gp_restarts,
                seed=_spawned_seed(self.seed, 1, len(self.steps)),
            )
            best = max(s.best_so_far for s in self.steps)
            proposed, _ = maximize(
                self.acquisition,
                model,
                best=best,
                record=self.record,
                levels=believed,
                relax=self.relax,
                space=self.space,
                seed=_spawned_seed(self.seed, 2, iteration),
            )
        realized = realize(self.space, proposed)
        believed_bd = discrete_cost(realized, self.record, believed)

        true_bd = discrete_cost(
            realized, self.record, effective_levels(self.schedule, iteration, "true")
        )
        if self.max_budget is not None and (
            self.cumulative_true_cost + true_bd.total > self.max_budget + 1e-9
        ):
            self.state = "finished"
            self.finish_reason = "budget_exhausted"
            raise StateConflictError("remaining budget cannot afford the next prototype")

        self.pending = SessionStep(
            iteration=iteration,
            proposed=proposed,
            realized=realized,
            class_per_group=believed_bd.per_group_class,
            believed_cost=believed_bd.to_json_dict(),
        )
        self.state = "awaiting_rating"
        return {
            "iteration": iteration,
            "proposed": dict(proposed.values),
            "realized": dict(realized.values),
            "class_per_group": dict(believed_bd.per_group_class),
            "believed_cost": believed_bd.to_json_dict(),
            "initialization": iteration <= self.init_samples,
        }

    def observe(self, performance_score: float, preference_score: float) -> dict:
        if self.state == "finished":
            raise StateConflictError(f"session is finished ({self.finish_reason})")
        if self.state != "awaiting_rating":
            raise StateConflictError("nothing to rate; request a proposal first")
        if not (0.0 <= preference_score <= 100.0):
            raise SessionError(f"preference_score must lie in [0, 100], got {preference_score}")
        if not np.isfinite(performance_score):
            raise SessionError("performance_score must be finite")

        step = self.pending
        true_levels = effective_levels(self.schedule, step.iteration, "true")
        true_bd = discrete_cost(step.realized, self.record, true_levels)

        step.performance_score = float(performance_score)
        step.preference_score = float(preference_score)
        perf_all = np.array(
            [s.performance_score for s in self.steps] + [step.performance_score]
        )
        norm_perf = float(_minmax(perf_all)[-1])
        step.utility = (
            self.weights.performance * norm_perf
            + self.weights.preference * step.preference_score / 100.0
        )
        step.true_cost_paid = true_bd.total
        step.cumulative_true_cost = self.cumulative_true_cost + true_bd.total
        prev_best = self.steps[-1].best_so_far if self.steps else -np.inf
        step.best_so_far = max(prev_best, step.utility)

        self.record = update_record(self.record, step.realized)
        self.steps.append(step)
        self.pending = None
        self.state = "awaiting_proposal"
        self._check_stop()
        return {
            "iteration": step.iteration,
            "utility": step.utility,
            "best_so_far": step.best_so_far,
            "true_cost_paid": step.true_cost_paid,
            "cumulative_true_cost": step.cumulative_true_cost,
            "state": self.state,
        }

    def _check_stop(self) -> None:
        done = len(self.steps) - self.init_samples
        if self.max_iterations is not None and done >= self.max_iterations:
            self.state = "finished"
            self.finish_reason = "max_iterations"
            return
        if self.max_budget is not None:
            cheapest = sum(
                min(lv.tweak, lv.swap, lv.create)
                for lv in effective_levels(
                    self.schedule, self._next_iteration(), "true"
                ).per_group.values()
            )
            if self.remaining_budget < cheapest - 1e-9:
                self.state = "finished"
                self.finish_reason = "budget_exhausted"

    def reweight_costs(self, levels: CostLevels) -> dict:
        if self.state == "finished":
            raise StateConflictError(f"session is finished ({self.finish_reason})")
        levels.validate_for(self.space)
        effective_from = self._next_iteration() if self.state == "awaiting_proposal" else (
            self._next_iteration() + 1
        )
        self.schedule = self.schedule.with_override(effective_from, levels)
        return {"effective_from_iteration": effective_from, "levels": levels.to_json_dict()}

    # --- read model -----------------------------------------------------------

    def history(self) -> dict:
        best = None
        for s in self.steps:
            if best is None or s.utility > best.utility:
                best = s
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": self.id,
            "state": self.state,
            "finish_reason": self.finish_reason,
            "utility_weights": {
                "performance": self.weights.performance,
                "preference": self.weights.preference,
            },
            "cumulative_true_cost": self.cumulative_true_cost,
            "remaining_budget": self.remaining_budget,
            "cost_unit": self.schedule.base.unit,
            "trace": [
                {
                    "iteration": s.iteration,
                    "proposed": dict(s.proposed.values),
                    "realized": dict(s.realized.values),
                    "class_per_group": dict(s.class_per_group),
                    "believed_cost": s.believed_cost,
                    "performance_score": s.performance_score,
                    "preference_score": s.preference_score,
                    "utility": s.utility,
                    "true_cost_paid": s.true_cost_paid,
                    "cumulative_true_cost": s.cumulative_true_cost,
                    "best_so_far": s.best_so_far,
                }
                for s in self.steps
            ],
            "record": self.record.to_json_dict(),
            "best": None
            if best is None
            else {"configuration": dict(best.realized.values), "utility": best.utility},
        }


def _minmax(values: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return values
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-12:
        return np.full_like(values, 0.5, dtype=float)
    return (values - lo) / (hi - lo)


# --- event store ---------------------------------------------------------------


def _session_config_payload(s: Session) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "space": s.space.to_json_dict(),
        "schedule": s.schedule.to_json_dict(),
        "relaxation": s.relax.to_json_dict(),
        "acquisition": {
            "mode": s.acquisition.mode,
            "xi_jitter": s.acquisition.xi_jitter,
            "n_starts": s.acquisition.n_starts,
            "seed": s.acquisition.seed,
        },
        "utility_weights": {
            "performance": s.weights.performance,
            "preference": s.weights.preference,
        },
        "init_samples": s.init_samples,
        "max_iterations": s.max_iterations,
        "max_budget": s.max_budget,
        "seed": s.seed,
        "gp_restarts": s.gp_restarts,
    }


def build_session(payload: dict, session_id: str) -> Session:
    try:
        return _build_session(payload, session_id)
    except (KeyError, TypeError) as e:
        raise SessionError(f"malformed session payload: {e}") from e


def _build_session(payload: dict, session_id: str) -> Session:
    acq = payload.get("acquisition", {})
    weights = payload["utility_weights"]
    return Session(
        id=session_id,
        space=DesignSpace.from_json_dict(payload["space"]),
        schedule=CostSchedule.from_json_dict(payload["schedule"]),
        relax=RelaxationParams.from_json_dict(payload["relaxation"]),
        acquisition=AcquisitionSpec(
            mode=acq.get("mode", "cost_aware"),
            xi_jitter=float(acq.get("xi_jitter", 0.0)),
            n_starts=int(acq.get("n_starts", 16)),
            seed=int(acq.get("seed", payload.get("seed", 0))),
        ),
        weights=UtilityWeights(
            performance=float(weights["performance"]),
            preference=float(weights["preference"]),
        ),
        init_samples=int(payload.get("init_samples", 3)),
        max_iterations=payload.get("max_iterations"),
        max_budget=payload.get("max_budget"),
        seed=int(payload.get("seed", 0)),
        gp_restarts=int(payload.get("gp_restarts", 8)),
    )


class SessionStore:
    """Holds live sessions, appends their events, and replays them on restart."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global = threading.Lock()
        for path in sorted(self.data_dir.glob("*.jsonl")):
            session = self._replay(path)
            if session is not None:
                self._sessions[session.id] = session
                self._locks[session.id] = threading.Lock()

    def _event_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, kind: str, payload: dict) -> None:
        event = {
            "timestamp": time.time(),
            "session_id": session_id,
            "kind": kind,
            "payload": payload,
        }
        with open(self._event_path(session_id), "a") as f:
            f.write(json.dumps(event) + "\n")
            f.flush()

    def _replay(self, path: Path) -> Session | None:
        session = None
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                kind, payload = event["kind"], event["payload"]
                if kind == "created":
                    session = build_session(payload, event["session_id"])
                elif kind == "proposed":
                    session.pending = SessionStep(
                        iteration=payload["iteration"],
                        proposed=Configuration(payload["proposed"]),
                        realized=Configuration(payload["realized"]),
                        class_per_group=payload["class_per_group"],
                        believed_cost=payload["believed_cost"],
                    )
                    session.state = "awaiting_rating"
                elif kind == "observed":
                    step = session.pending
                    step.performance_score = payload["performance_score"]
                    step.preference_score = payload["preference_score"]
                    step.utility = payload["utility"]
                    step.true_cost_paid = payload["true_cost_paid"]
                    step.cumulative_true_cost = payload["cumulative_true_cost"]
                    step.best_so_far = payload["best_so_far"]
                    session.record = update_record(session.record, step.realized)
                    session.steps.append(step)
                    session.pending = None
                    session.state = payload["state"]
                elif kind == "costs_reweighted":
                    session.schedule = session.schedule.with_override(
                        payload["effective_from_iteration"],
                        CostLevels.from_json_dict(payload["levels"]),
                    )
                elif kind == "finished":
                    session.state = "finished"
                    session.finish_reason = payload.get("reason")
        return session

    def lock(self, session_id: str) -> threading.Lock:
        with self._global:
            if session_id not in self._locks:
                raise SessionNotFoundError(session_id)
            return self._locks[session_id]

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFoundError(session_id) from None

    def create(self, payload: dict) -> Session:
        session_id = payload.get("session_id") or uuid.uuid4().hex[:12]
        if session_id in self._sessions:
            raise SessionError(f"session id {session_id!r} already exists")
        session = build_session(payload, session_id)
        with self._global:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        self._append(session_id, "created", _session_config_payload(session))
        return session

    def propose(self, session_id: str) -> dict:
        with self.lock(session_id):
            session = self.get(session_id)
            try:
                result = session.propose()
            except StateConflictError:
                if session.state == "finished" and session.finish_reason == "budget_exhausted":
                    self._append(session_id, "finished", {"reason": session.finish_reason})
                raise
            self._append(session_id, "proposed", result)
            return result

    def observe(self, session_id: str, performance_score: float, preference_score: float) -> dict:
        with self.lock(session_id):
            session = self.get(session_id)
            result = session.observe(performance_score, preference_score)
            payload = dict(result)
            payload["performance_score"] = performance_score
            payload["preference_score"] = preference_score
            self._append(session_id, "observed", payload)
            if session.state == "finished":
                self._append(session_id, "finished", {"reason": session.finish_reason})
            return result

    def reweight(self, session_id: str, levels: CostLevels) -> dict:
        with self.lock(session_id):
            session = self.get(session_id)
            result = session.reweight_costs(levels)
            self._append(session_id, "costs_reweighted", result)
            return result

    def history(self, session_id: str) -> dict:
        with self.lock(session_id):
            return self.get(session_id).history()
