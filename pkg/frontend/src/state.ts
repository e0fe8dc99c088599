/** View state: one consistent (session_id, graph_version) snapshot per
 * render. Responses tagged with an older graph_version are dropped so
 * panels never mix data from two versions. */

import type {
  AttentionPayload,
  ChangedPrediction,
  EmbeddingPayload,
  Explanation,
  GraphPayload,
  NodeInfo,
} from "./types.js";

export type Selection =
  | { kind: "none" }
  | { kind: "node"; id: number }
  | { kind: "edge"; u: number; v: number };

export interface ViewState {
  sessionId: string | null;
  arch: "gcn" | "gat" | null;
  graphVersion: number;
  graph: GraphPayload | null;
  selection: Selection;
  nodeInfo: NodeInfo | null;
  explanation: Explanation | null;
  attention: AttentionPayload | null;
  attentionDirection: "assigns" | "receives";
  embedding: EmbeddingPayload | null;
  embeddingMethod: "pca" | "tsne";
  /** node ids whose prediction changed in the latest edit, for emphasis */
  recentlyChanged: Set<number>;
  pendingJobs: Map<string, number>; // job kind -> progress fraction
  banner: string | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    arch: null,
    graphVersion: -1,
    graph: null,
    selection: { kind: "none" },
    nodeInfo: null,
    explanation: null,
    attention: null,
    attentionDirection: "assigns",
    embedding: null,
    embeddingMethod: "pca",
    recentlyChanged: new Set(),
    pendingJobs: new Map(),
    banner: null,
  };
}

export type Listener = (state: ViewState) => void;

export class Store {
  private state = initialState();
  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  /** Apply a payload only if it belongs to the current graph version;
   * returns whether it was accepted. Stale responses are discarded. */
  acceptVersioned(
    payloadVersion: number,
    patch: Partial<ViewState>,
  ): boolean {
    if (payloadVersion !== this.state.graphVersion) return false;
    this.update(patch);
    return true;
  }

  startSession(sessionId: string, arch: "gcn" | "gat"): void {
    this.state = {
      ...initialState(),
      sessionId,
      arch,
      graphVersion: 0,
    };
    for (const fn of this.listeners) fn(this.state);
  }

  /** An edit moved the graph to a new version: every versioned panel is
   * stale and cleared until re-fetched. */
  enterVersion(version: number, changed: ChangedPrediction[]): void {
    this.update({
      graphVersion: version,
      graph: null,
      nodeInfo: null,
      explanation: null,
      attention: null,
      embedding: null,
      recentlyChanged: new Set(changed.map((c) => c.id)),
    });
  }
}

/** Apply an edit diff to a graph payload without re-fetching: used to
 * recolor changed nodes immediately while the full graph reloads. */
export function applyDiff(
  graph: GraphPayload,
  version: number,
  changed: ChangedPrediction[],
): GraphPayload {
  const byId = new Map(changed.map((c) => [c.id, c.new]));
  return {
    ...graph,
    graph_version: version,
    nodes: graph.nodes.map((n) =>
      byId.has(n.id)
        ? { ...n, predicted_class: byId.get(n.id) as number }
        : n,
    ),
  };
}
