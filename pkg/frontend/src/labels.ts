/** The six panel-transition labels and their annotator-facing help text. */

export const LABEL_CODES = ["ACT", "ASP", "SUB", "SCE", "MOM", "NON"] as const;

export type LabelCode = (typeof LABEL_CODES)[number];

export const LABEL_NAMES: Record<LabelCode, string> = {
  ACT: "action-to-action",
  ASP: "aspect-to-aspect",
  SUB: "subject-to-subject",
  SCE: "scene-to-scene",
  MOM: "moment-to-moment",
  NON: "non-sequitur",
};

/** Short definitions shown in the help panel next to each button. */
export const LABEL_DEFINITIONS: Record<LabelCode, string> = {
  ACT: "A single subject progressing through one action.",
  ASP: "Different aspects of the same scene, place, idea, or mood.",
  SUB: "A change of subject while staying within one scene and idea.",
  MOM: "One action drawn out across a series of close moments.",
  SCE: "A jump across significant distance or time to a new scene.",
  NON: "No logical relationship between the two panels.",
};

export function isLabelCode(value: unknown): value is LabelCode {
  return (LABEL_CODES as readonly unknown[]).includes(value);
}

/** Keyboard shortcuts: digits 1-6 in label order; anything else is ignored. */
export function shortcutToLabel(key: string): LabelCode | null {
  const index = Number.parseInt(key, 10) - 1;
  if (!Number.isInteger(index) || key.length !== 1) return null;
  return index >= 0 && index < LABEL_CODES.length ? LABEL_CODES[index] : null;
}
