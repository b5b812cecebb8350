/** Prefilled joystick session template: a thumbstick with two hardware
 * components (shaft; topper = convexity + width printed together) and two
 * runtime-selectable software filters. Creating a topper dominates the cost
 * table because of print time. */

import type { CostScheduleJson, DesignSpaceJson, SessionCreateBody } from "./types.js";

export function joystickSpace(): DesignSpaceJson {
  return {
    schema_version: 1,
    parameters: [
      { name: "shaft_length", lower: 3.0, upper: 21.0, snap_step: 3.0 },
      { name: "topper_convexity", lower: -0.66, upper: 0.66, snap_step: 0.33 },
      { name: "topper_width", lower: 10.0, upper: 30.0, snap_step: 5.0 },
      { name: "sensitivity", lower: 0.0, upper: 1.0, snap_step: 0.05 },
      { name: "reactivity", lower: 0.0, upper: 1.0, snap_step: 0.05 },
    ],
    groups: [
      { name: "shaft", parameters: ["shaft_length"], kind: "hardware" },
      { name: "topper", parameters: ["topper_convexity", "topper_width"], kind: "hardware" },
      { name: "sensitivity", parameters: ["sensitivity"], kind: "software" },
      { name: "reactivity", parameters: ["reactivity"], kind: "software" },
    ],
  };
}

export function joystickSchedule(): CostScheduleJson {
  return {
    schema_version: 1,
    base: {
      schema_version: 1,
      unit: "effort",
      groups: {
        shaft: { tweak: 1, swap: 10, create: 100 },
        topper: { tweak: 1, swap: 10, create: 1000 },
        sensitivity: { tweak: 1, swap: 10, create: 10 },
        reactivity: { tweak: 1, swap: 10, create: 10 },
      },
    },
    overrides: [],
    believed_bias_alpha: 1.0,
    bias_categories: ["tweak", "swap", "create"],
  };
}

export function joystickSessionBody(
  seed = 0,
  maxIterations = 10,
  performanceWeight = 0.5,
): SessionCreateBody {
  const space = joystickSpace();
  const sigma: Record<string, number> = {};
  for (const g of space.groups) sigma[g.name] = 0.05;
  return {
    space,
    schedule: joystickSchedule(),
    relaxation: { schema_version: 1, sigma, w_create: 1.0 },
    acquisition: { mode: "cost_aware", n_starts: 16, seed },
    utility_weights: { performance: performanceWeight, preference: 1 - performanceWeight },
    init_samples: 3,
    max_iterations: maxIterations,
    seed,
  };
}
