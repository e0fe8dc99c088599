/** Single shared class-color palette: the graph canvas and the embedding
 * scatter must color node classes identically. */

const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#59a14f",
  "#e15759",
  "#b07aa1",
  "#edc948",
  "#76b7b2",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
];

export function classColor(classIndex: number): string {
  if (classIndex < 0 || !Number.isInteger(classIndex)) return "#888888";
  return PALETTE[classIndex % PALETTE.length];
}

export const EXPLANATION_EDGE_COLOR = "#2ca02c";
export const DEFAULT_EDGE_COLOR = "#cccccc";
export const SELECTION_RING_COLOR = "#000000";
