import type { MasteryState } from "./types.js";

export type LegendColor = "blue" | "yellow" | "green" | "red";

// The four mastery states and their legend colors, one-to-one.
export const MASTERY_COLORS: Record<MasteryState, LegendColor> = {
  Untouched: "blue",
  Learning: "yellow",
  Mastered: "green",
  Weak: "red",
};

export function mapStateToColor(state: MasteryState): LegendColor {
  return MASTERY_COLORS[state];
}

export function stateForColor(color: LegendColor): MasteryState {
  const entry = (Object.entries(MASTERY_COLORS) as [MasteryState, LegendColor][]).find(
    ([, c]) => c === color,
  );
  if (!entry) {
    throw new Error(`no mastery state renders as ${color}`);
  }
  return entry[0];
}
