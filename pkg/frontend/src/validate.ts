/** Client-side mirror of the server's design-space rules, for inline form
 * errors before submission. The server remains the authority. */

import type { DesignSpaceJson } from "./types.js";

export interface FieldError {
  path: string;
  message: string;
}

export function validateSpace(space: DesignSpaceJson): FieldError[] {
  const errors: FieldError[] = [];
  const names = new Set<string>();
  space.parameters.forEach((p, i) => {
    const path = `parameters[${i}]`;
    if (!p.name) errors.push({ path, message: "parameter name must be non-empty" });
    if (names.has(p.name)) errors.push({ path, message: `duplicate parameter '${p.name}'` });
    names.add(p.name);
    if (!(p.lower < p.upper))
      errors.push({ path, message: `lower (${p.lower}) must be < upper (${p.upper})` });
    if (p.snap_step !== null && p.snap_step !== "continuous") {
      if (!(p.snap_step > 0)) errors.push({ path, message: "snap step must be positive" });
      else if (p.snap_step > p.upper - p.lower)
        errors.push({ path, message: "snap step exceeds the parameter range" });
    }
  });

  const groupNames = new Set<string>();
  const grouped = new Map<string, string>();
  space.groups.forEach((g, i) => {
    const path = `groups[${i}]`;
    if (!g.name) errors.push({ path, message: "group name must be non-empty" });
    if (groupNames.has(g.name)) errors.push({ path, message: `duplicate group '${g.name}'` });
    groupNames.add(g.name);
    if (g.parameters.length === 0)
      errors.push({ path, message: "group must contain at least one parameter" });
    for (const pn of g.parameters) {
      if (!names.has(pn)) errors.push({ path, message: `unknown parameter '${pn}'` });
      else if (grouped.has(pn))
        errors.push({
          path,
          message: `parameter '${pn}' already belongs to group '${grouped.get(pn)}'`,
        });
      else grouped.set(pn, g.name);
    }
  });
  for (const p of space.parameters) {
    if (p.name && !grouped.has(p.name))
      errors.push({ path: "groups", message: `parameter '${p.name}' belongs to no group` });
  }
  return errors;
}

export function validateLevels(groups: Record<string, { tweak: number; swap: number; create: number }>): FieldError[] {
  const errors: FieldError[] = [];
  for (const [name, lv] of Object.entries(groups)) {
    for (const cls of ["tweak", "swap", "create"] as const) {
      const v = lv[cls];
      if (!Number.isFinite(v) || v < 0)
        errors.push({ path: `levels.${name}.${cls}`, message: "cost level must be >= 0" });
    }
  }
  return errors;
}

export function validateWeights(performance: number, preference: number): FieldError[] {
  const errors: FieldError[] = [];
  if (!(performance >= 0 && performance <= 1))
    errors.push({ path: "utility_weights.performance", message: "must lie in [0, 1]" });
  if (!(preference >= 0 && preference <= 1))
    errors.push({ path: "utility_weights.preference", message: "must lie in [0, 1]" });
  if (Math.abs(performance + preference - 1) > 1e-9)
    errors.push({ path: "utility_weights", message: "weights must sum to 1" });
  return errors;
}
