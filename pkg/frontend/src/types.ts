/** JSON shapes shared with the session service (schema_version 1). */

export type GroupKind = "hardware" | "software" | "other";
export type ReuseClass = "tweak" | "swap" | "create";
export type SessionState = "awaiting_proposal" | "awaiting_rating" | "finished";

export interface ParameterJson {
  name: string;
  lower: number;
  upper: number;
  /** grid spacing in native units; null (or "continuous") = no snapping */
  snap_step: number | "continuous" | null;
}

export interface GroupJson {
  name: string;
  parameters: string[];
  kind: GroupKind;
}

export interface DesignSpaceJson {
  schema_version: number;
  parameters: ParameterJson[];
  groups: GroupJson[];
}

export interface GroupLevelsJson {
  tweak: number;
  swap: number;
  create: number;
}

export interface CostLevelsJson {
  schema_version: number;
  unit: string;
  groups: Record<string, GroupLevelsJson>;
}

export interface CostScheduleJson {
  schema_version: number;
  base: CostLevelsJson;
  overrides: { from_iteration: number; levels: CostLevelsJson }[];
  believed_bias_alpha: number;
  bias_categories: ReuseClass[];
}

export interface SessionCreateBody {
  space: DesignSpaceJson;
  schedule: CostScheduleJson;
  relaxation: { schema_version: number; sigma: Record<string, number>; w_create: number };
  acquisition: { mode: "cost_aware" | "standard_ei"; n_starts: number; seed: number };
  utility_weights: { performance: number; preference: number };
  init_samples: number;
  max_iterations?: number | null;
  max_budget?: number | null;
  seed: number;
  gp_restarts?: number;
}

export interface CostBreakdownJson {
  per_group_class: Record<string, ReuseClass>;
  per_group_cost: Record<string, number>;
  total: number;
}

export interface ProposalJson {
  iteration: number;
  proposed: Record<string, number>;
  realized: Record<string, number>;
  class_per_group: Record<string, ReuseClass>;
  believed_cost: CostBreakdownJson;
  initialization: boolean;
}

export interface ObserveResponseJson {
  iteration: number;
  utility: number;
  best_so_far: number;
  true_cost_paid: number;
  cumulative_true_cost: number;
  state: SessionState;
}

export interface TraceStepJson {
  iteration: number;
  proposed: Record<string, number>;
  realized: Record<string, number>;
  class_per_group: Record<string, ReuseClass>;
  believed_cost: CostBreakdownJson;
  performance_score: number;
  preference_score: number;
  utility: number;
  true_cost_paid: number;
  cumulative_true_cost: number;
  best_so_far: number;
}

export interface HistoryJson {
  schema_version: number;
  session_id: string;
  state: SessionState;
  finish_reason: string | null;
  utility_weights: { performance: number; preference: number };
  cumulative_true_cost: number;
  remaining_budget: number | null;
  cost_unit: string;
  trace: TraceStepJson[];
  record: {
    schema_version: number;
    histories: Record<string, Record<string, number>[]>;
    current: Record<string, number> | null;
  };
  best: { configuration: Record<string, number>; utility: number } | null;
}
