/** Pure presentation decisions, kept out of the DOM code so they can be
 * tested directly. */

import {
  DEFAULT_EDGE_COLOR,
  EXPLANATION_EDGE_COLOR,
} from "./palette.js";
import type {
  AttentionEntry,
  AttentionPayload,
  Explanation,
  GraphNode,
  NodeInfo,
  TopFeature,
} from "./types.js";

export interface EdgeStyle {
  color: string;
  width: number;
  explained: boolean;
}

/** Explanation top-k edges render distinctly: green and thicker, scaled
 * by mask score. All other edges share the default style. */
export function edgeStyle(
  u: number,
  v: number,
  explanation: Explanation | null,
): EdgeStyle {
  if (explanation) {
    const hit = explanation.top_edges.find(
      (e) =>
        (e.src === u && e.dst === v) || (e.src === v && e.dst === u),
    );
    if (hit) {
      return {
        color: EXPLANATION_EDGE_COLOR,
        width: 2 + 3 * hit.score,
        explained: true,
      };
    }
  }
  return { color: DEFAULT_EDGE_COLOR, width: 1, explained: false };
}

/** The attention panel exists only for GAT sessions. */
export function attentionPanelVisible(arch: "gcn" | "gat" | null): boolean {
  return arch === "gat";
}

export function attentionBars(
  attention: AttentionPayload,
  direction: "assigns" | "receives",
): AttentionEntry[] {
  const entries = direction === "assigns"
    ? attention.assigns
    : attention.receives;
  return [...entries].sort((a, b) => b.mean - a.mean);
}

export interface FeatureBar {
  label: string;
  value: number;
  highlighted: boolean;
}

/** Before an explanation: the node's raw non-zero features. After: the
 * top-k masked features, highlighted. */
export function featureBars(
  info: NodeInfo | null,
  explanation: Explanation | null,
  limit = 15,
): FeatureBar[] {
  if (explanation && explanation.top_features.length > 0) {
    return explanation.top_features.slice(0, limit).map(
      (f: TopFeature) => ({
        label: f.name,
        value: f.score,
        highlighted: true,
      }),
    );
  }
  if (!info) return [];
  return info.nonzero_features.slice(0, limit).map((f) => ({
    label: f.name,
    value: f.value,
    highlighted: false,
  }));
}

/** Class label helper tolerating unlabeled (added) nodes. */
export function classLabel(
  classNames: string[],
  cls: number | null,
): string {
  if (cls === null) return "(none)";
  return classNames[cls] ?? `class ${cls}`;
}

export function nodeRadius(
  node: GraphNode,
  selected: boolean,
  recentlyChanged: boolean,
): number {
  let r = 5;
  if (selected) r += 3;
  if (recentlyChanged) r += 2;
  return r;
}
