import { describe, expect, it } from "vitest";

import {
  LABEL_CODES,
  LABEL_DEFINITIONS,
  LABEL_NAMES,
  isLabelCode,
  shortcutToLabel,
} from "../src/labels.js";

describe("label codes", () => {
  it("defines exactly the six transition codes in canonical order", () => {
    expect(LABEL_CODES).toEqual(["ACT", "ASP", "SUB", "SCE", "MOM", "NON"]);
  });

  it("has a name and a help definition for every code", () => {
    for (const code of LABEL_CODES) {
      expect(LABEL_NAMES[code]).toBeTruthy();
      expect(LABEL_DEFINITIONS[code]).toBeTruthy();
    }
  });

  it("recognizes only the six codes", () => {
    for (const code of LABEL_CODES) expect(isLabelCode(code)).toBe(true);
    for (const bad of ["act", "XXX", "", 1, null, undefined, "ACTION"]) {
      expect(isLabelCode(bad)).toBe(false);
    }
  });
});

describe("keyboard shortcuts", () => {
  it("maps digits 1-6 to labels in order", () => {
    expect(["1", "2", "3", "4", "5", "6"].map(shortcutToLabel)).toEqual([
      "ACT",
      "ASP",
      "SUB",
      "SCE",
      "MOM",
      "NON",
    ]);
  });

  it("ignores everything else", () => {
    for (const key of ["0", "7", "9", "a", "Enter", " ", "12", "-1"]) {
      expect(shortcutToLabel(key)).toBeNull();
    }
  });
});
