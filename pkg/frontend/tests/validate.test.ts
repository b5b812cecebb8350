import { describe, expect, it } from "vitest";

import { joystickSpace } from "../src/template.js";
import { validateLevels, validateSpace, validateWeights } from "../src/validate.js";

describe("space validation", () => {
  it("accepts the joystick template", () => {
    expect(validateSpace(joystickSpace())).toEqual([]);
  });

  it("blocks an empty group name", () => {
    const space = joystickSpace();
    space.groups[0].name = "";
    const errors = validateSpace(space);
    expect(errors.some((e) => e.message.includes("group name"))).toBe(true);
  });

  it("blocks overlapping groups", () => {
    const space = joystickSpace();
    space.groups[1].parameters.push("shaft_length"); // already in 'shaft'
    const errors = validateSpace(space);
    expect(errors.some((e) => e.message.includes("already belongs"))).toBe(true);
  });

  it("blocks ungrouped parameters", () => {
    const space = joystickSpace();
    space.groups = space.groups.slice(1);
    const errors = validateSpace(space);
    expect(errors.some((e) => e.message.includes("belongs to no group"))).toBe(true);
  });

  it("requires lower < upper and a sane snap step", () => {
    const space = joystickSpace();
    space.parameters[0].lower = 30;
    space.parameters[1].snap_step = 99;
    const errors = validateSpace(space);
    expect(errors.some((e) => e.message.includes("must be <"))).toBe(true);
    expect(errors.some((e) => e.message.includes("exceeds"))).toBe(true);
  });

  it("flags duplicate parameter names", () => {
    const space = joystickSpace();
    space.parameters[1].name = "shaft_length";
    expect(validateSpace(space).some((e) => e.message.includes("duplicate"))).toBe(true);
  });
});

describe("cost level validation", () => {
  it("blocks negative levels client-side", () => {
    const errors = validateLevels({ shaft: { tweak: -1, swap: 10, create: 100 } });
    expect(errors).toHaveLength(1);
    expect(errors[0].path).toBe("levels.shaft.tweak");
  });

  it("accepts zero and positive levels", () => {
    expect(validateLevels({ shaft: { tweak: 0, swap: 10, create: 100 } })).toEqual([]);
  });
});

describe("weight validation", () => {
  it("accepts a valid simplex point", () => {
    expect(validateWeights(0.5, 0.5)).toEqual([]);
  });
  it("rejects weights not summing to one", () => {
    expect(validateWeights(0.7, 0.5).some((e) => e.message.includes("sum"))).toBe(true);
  });
  it("rejects weights outside [0, 1]", () => {
    expect(validateWeights(1.2, -0.2).length).toBeGreaterThan(0);
  });
});
