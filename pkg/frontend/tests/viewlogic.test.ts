import { describe, expect, it } from "vitest";

import {
  DEFAULT_EDGE_COLOR,
  EXPLANATION_EDGE_COLOR,
  classColor,
} from "../src/palette.js";
import {
  attentionBars,
  attentionPanelVisible,
  classLabel,
  edgeStyle,
  featureBars,
} from "../src/viewlogic.js";
import type {
  AttentionPayload,
  Explanation,
  NodeInfo,
} from "../src/types.js";

const explanation: Explanation = {
  graph_version: 0,
  center: 5,
  predicted_class: 1,
  edges: [
    [5, 7],
    [7, 5],
    [5, 9],
  ],
  edge_mask: [0.9, 0.1, 0.2],
  feature_mask: [0.8, 0.1],
  top_edges: [{ src: 5, dst: 7, score: 0.9 }],
  top_features: [{ index: 0, name: "f0", score: 0.8 }],
  loss_trace: [2.0, 1.0],
};

describe("edgeStyle", () => {
  it("renders top-k explained edges distinctly", () => {
    const style = edgeStyle(5, 7, explanation);
    expect(style.explained).toBe(true);
    expect(style.color).toBe(EXPLANATION_EDGE_COLOR);
    expect(style.width).toBeGreaterThan(1);
  });

  it("matches the explained edge in either orientation", () => {
    expect(edgeStyle(7, 5, explanation).explained).toBe(true);
  });

  it("leaves non-explained edges on the default style", () => {
    const style = edgeStyle(5, 9, explanation);
    expect(style.explained).toBe(false);
    expect(style.color).toBe(DEFAULT_EDGE_COLOR);
    expect(style.width).toBe(1);
  });

  it("uses the default style with no explanation", () => {
    expect(edgeStyle(5, 7, null).explained).toBe(false);
  });
});

describe("attention panel", () => {
  it("is hidden for GCN sessions and shown for GAT", () => {
    expect(attentionPanelVisible("gcn")).toBe(false);
    expect(attentionPanelVisible("gat")).toBe(true);
    expect(attentionPanelVisible(null)).toBe(false);
  });

  it("selects the requested direction and sorts by mean score", () => {
    const payload: AttentionPayload = {
      graph_version: 0,
      center: 2,
      assigns: [
        { neighbor: 1, per_head: [0.2], mean: 0.2 },
        { neighbor: 2, per_head: [0.8], mean: 0.8 },
      ],
      receives: [{ neighbor: 3, per_head: [1.0], mean: 1.0 }],
    };
    expect(attentionBars(payload, "assigns").map((b) => b.neighbor))
      .toEqual([2, 1]);
    expect(attentionBars(payload, "receives").map((b) => b.neighbor))
      .toEqual([3]);
  });
});

describe("featureBars", () => {
  const info: NodeInfo = {
    graph_version: 0,
    id: 5,
    true_class: 1,
    predicted_class: 1,
    log_probs: [-1.0, -0.5],
    nonzero_features: [
      { index: 0, name: "f0", value: 1.0 },
      { index: 3, name: "f3", value: -0.4 },
    ],
    neighbors: [],
  };

  it("shows raw non-zero features before an explanation", () => {
    const bars = featureBars(info, null);
    expect(bars.map((b) => b.label)).toEqual(["f0", "f3"]);
    expect(bars.every((b) => !b.highlighted)).toBe(true);
  });

  it("switches to highlighted top-k features after an explanation", () => {
    const bars = featureBars(info, explanation);
    expect(bars).toEqual([{ label: "f0", value: 0.8, highlighted: true }]);
  });

  it("is empty with no selection", () => {
    expect(featureBars(null, null)).toEqual([]);
  });
});

describe("palette and labels", () => {
  it("gives one stable color per class shared by all views", () => {
    expect(classColor(0)).toBe(classColor(0));
    expect(classColor(0)).not.toBe(classColor(1));
  });

  it("cycles for many classes and tolerates bad input", () => {
    expect(classColor(12)).toBe(classColor(2));
    expect(classColor(-1)).toBe("#888888");
  });

  it("labels unlabeled added nodes as (none)", () => {
    expect(classLabel(["a", "b"], null)).toBe("(none)");
    expect(classLabel(["a", "b"], 1)).toBe("b");
    expect(classLabel(["a"], 4)).toBe("class 4");
  });
});
