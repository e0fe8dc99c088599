/** DOM and canvas rendering for the coordinated panels. Every function
 * draws from a single ViewState snapshot; no model math happens here. */

import { layoutGraph, Point } from "./layout.js";
import { classColor, SELECTION_RING_COLOR } from "./palette.js";
import type { ViewState } from "./state.js";
import {
  attentionBars,
  attentionPanelVisible,
  classLabel,
  edgeStyle,
  featureBars,
  nodeRadius,
} from "./viewlogic.js";

const layoutCache = new Map<string, Map<number, Point>>();

function cachedLayout(state: ViewState): Map<number, Point> {
  const graph = state.graph;
  if (!graph) return new Map();
  const key = `${state.sessionId}:${graph.graph_version}`;
  let pts = layoutCache.get(key);
  if (!pts) {
    pts = layoutGraph(
      graph.nodes.map((n) => n.id),
      graph.edges,
      graph.graph_version + 1,
    );
    layoutCache.clear();
    layoutCache.set(key, pts);
  }
  return pts;
}

function fit(
  pts: Iterable<Point>,
  width: number,
  height: number,
  pad = 20,
): (p: Point) => Point {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of pts) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  const sx = (width - 2 * pad) / Math.max(maxX - minX, 1e-9);
  const sy = (height - 2 * pad) / Math.max(maxY - minY, 1e-9);
  const s = Math.min(sx, sy);
  return (p) => ({
    x: pad + (p.x - minX) * s,
    y: pad + (p.y - minY) * s,
  });
}

export interface CanvasHit {
  nodeAt(x: number, y: number): number | null;
}

export function renderGraph(
  canvas: HTMLCanvasElement,
  state: ViewState,
): CanvasHit {
  const ctx = canvas.getContext("2d");
  const graph = state.graph;
  if (!ctx || !graph) return { nodeAt: () => null };
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const raw = cachedLayout(state);
  const project = fit(raw.values(), canvas.width, canvas.height);
  const screen = new Map<number, Point>();
  for (const [id, p] of raw) screen.set(id, project(p));

  for (const { u, v } of graph.edges) {
    const a = screen.get(u);
    const b = screen.get(v);
    if (!a || !b) continue;
    const style = edgeStyle(u, v, state.explanation);
    ctx.strokeStyle = style.color;
    ctx.lineWidth = style.width;
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
  }

  const selectedId =
    state.selection.kind === "node" ? state.selection.id : null;
  for (const node of graph.nodes) {
    const p = screen.get(node.id);
    if (!p) continue;
    const r = nodeRadius(
      node,
      node.id === selectedId,
      state.recentlyChanged.has(node.id),
    );
    ctx.fillStyle = classColor(node.predicted_class);
    ctx.beginPath();
    ctx.arc(p.x, p.y, r, 0, Math.PI * 2);
    ctx.fill();
    if (node.id === selectedId || state.recentlyChanged.has(node.id)) {
      ctx.strokeStyle = SELECTION_RING_COLOR;
      ctx.lineWidth = node.id === selectedId ? 2 : 1;
      ctx.stroke();
    }
  }

  return {
    nodeAt(x, y) {
      let best: number | null = null;
      let bestD = 100; // 10px radius
      for (const [id, p] of screen) {
        const d = (p.x - x) ** 2 + (p.y - y) ** 2;
        if (d < bestD) {
          bestD = d;
          best = id;
        }
      }
      return best;
    },
  };
}

export function renderScatter(
  canvas: HTMLCanvasElement,
  state: ViewState,
): CanvasHit {
  const ctx = canvas.getContext("2d");
  const emb = state.embedding;
  const graph = state.graph;
  if (!ctx || !emb || !graph) return { nodeAt: () => null };
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const classOf = new Map(
    graph.nodes.map((n) => [n.id, n.predicted_class]),
  );
  const pts = emb.coords.map(([x, y]) => ({ x, y }));
  const project = fit(pts, canvas.width, canvas.height);
  const selectedId =
    state.selection.kind === "node" ? state.selection.id : null;
  const screen = new Map<number, Point>();
  emb.node_ids.forEach((id, i) => {
    const p = project(pts[i]);
    screen.set(id, p);
    // same palette as the graph view
    ctx.fillStyle = classColor(classOf.get(id) ?? -1);
    ctx.beginPath();
    ctx.arc(p.x, p.y, id === selectedId ? 6 : 3, 0, Math.PI * 2);
    ctx.fill();
    if (id === selectedId) {
      ctx.strokeStyle = SELECTION_RING_COLOR;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  });
  return {
    nodeAt(x, y) {
      let best: number | null = null;
      let bestD = 100;
      for (const [id, p] of screen) {
        const d = (p.x - x) ** 2 + (p.y - y) ** 2;
        if (d < bestD) {
          bestD = d;
          best = id;
        }
      }
      return best;
    },
  };
}

function el(tag: string, cls: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderInfoPanel(root: HTMLElement, state: ViewState): void {
  root.replaceChildren();
  const info = state.nodeInfo;
  const names = state.graph?.class_names ?? [];
  if (!info) {
    root.append(el("p", "hint", "Select a node to inspect it."));
    return;
  }
  root.append(el("h3", "", `Node ${info.id}`));
  root.append(
    el("p", "", `True class: ${classLabel(names, info.true_class)}`),
  );
  const pred = el(
    "p",
    "",
    `Predicted: ${classLabel(names, info.predicted_class)}`,
  );
  pred.style.color = classColor(info.predicted_class);
  root.append(pred);
  const probs = el("ul", "probs");
  info.log_probs.forEach((lp, c) => {
    probs.append(
      el("li", "", `${classLabel(names, c)}: ${Math.exp(lp).toFixed(3)}`),
    );
  });
  root.append(probs);
}

export function renderNeighborPanel(
  root: HTMLElement,
  state: ViewState,
  onSelect: (id: number) => void,
): void {
  root.replaceChildren();
  const info = state.nodeInfo;
  const names = state.graph?.class_names ?? [];
  if (!info) return;
  root.append(el("h3", "", `Neighbors (${info.neighbors.length})`));
  const list = el("ul", "neighbors");
  for (const nbr of info.neighbors) {
    const item = el(
      "li",
      "",
      `${nbr.id} — ${classLabel(names, nbr.predicted_class)}`,
    );
    item.style.borderLeft = `4px solid ${classColor(nbr.predicted_class)}`;
    item.addEventListener("click", () => onSelect(nbr.id));
    list.append(item);
  }
  root.append(list);
}

export function renderFeaturePanel(root: HTMLElement, state: ViewState): void {
  root.replaceChildren();
  const bars = featureBars(state.nodeInfo, state.explanation);
  if (bars.length === 0) return;
  root.append(
    el(
      "h3",
      "",
      state.explanation ? "Top explained features" : "Non-zero features",
    ),
  );
  const max = Math.max(...bars.map((b) => Math.abs(b.value)), 1e-9);
  for (const bar of bars) {
    const row = el("div", "bar-row");
    row.append(el("span", "bar-label", bar.label));
    const track = el("div", "bar-track");
    const fill = el("div", bar.highlighted ? "bar-fill explained" : "bar-fill");
    fill.style.width = `${(Math.abs(bar.value) / max) * 100}%`;
    track.append(fill);
    row.append(track);
    row.append(el("span", "bar-value", bar.value.toFixed(3)));
    root.append(row);
  }
}

export function renderExplanationPanel(
  root: HTMLElement,
  state: ViewState,
): void {
  root.replaceChildren();
  const expl = state.explanation;
  if (!expl) {
    root.append(
      el("p", "hint", "Run “Explain” on a selected node to see its mask."),
    );
    return;
  }
  root.append(el("h3", "", `Explanation of node ${expl.center}`));
  const list = el("ol", "top-edges");
  for (const edge of expl.top_edges) {
    list.append(
      el("li", "", `(${edge.src}, ${edge.dst})  ${edge.score.toFixed(3)}`),
    );
  }
  root.append(list);
  root.append(
    el(
      "p",
      "hint",
      `loss ${expl.loss_trace[0]?.toFixed(3)} → ` +
        `${expl.loss_trace[expl.loss_trace.length - 1]?.toFixed(3)}`,
    ),
  );
}

export function renderAttentionPanel(
  root: HTMLElement,
  state: ViewState,
  onToggle: () => void,
): void {
  root.replaceChildren();
  if (!attentionPanelVisible(state.arch)) {
    root.hidden = true;
    return;
  }
  root.hidden = false;
  root.append(el("h3", "", "GAT attention"));
  const toggle = el(
    "button",
    "toggle",
    state.attentionDirection === "assigns"
      ? "center assigns to neighbors"
      : "center receives from neighbors",
  );
  toggle.addEventListener("click", onToggle);
  root.append(toggle);
  const att = state.attention;
  if (!att) {
    root.append(el("p", "hint", "Select a node to see attention."));
    return;
  }
  const bars = attentionBars(att, state.attentionDirection);
  const max = Math.max(...bars.map((b) => b.mean), 1e-9);
  for (const entry of bars) {
    const row = el("div", "bar-row");
    row.append(el("span", "bar-label", `node ${entry.neighbor}`));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill attention");
    fill.style.width = `${(entry.mean / max) * 100}%`;
    track.append(fill);
    row.append(track);
    row.append(el("span", "bar-value", entry.mean.toFixed(3)));
    root.append(row);
  }
}

export function renderBanner(root: HTMLElement, state: ViewState): void {
  root.textContent = state.banner ?? "";
  root.hidden = !state.banner;
}

export function renderJobs(root: HTMLElement, state: ViewState): void {
  root.replaceChildren();
  for (const [kind, progress] of state.pendingJobs) {
    root.append(
      el("span", "job", `${kind} ${(progress * 100).toFixed(0)}%`),
    );
  }
}
