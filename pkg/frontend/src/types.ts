/** Payload shapes of the service API (see docs/api.md). */

export interface DatasetInfo {
  name: string;
  num_nodes: number;
  num_features: number;
  num_classes: number;
  num_edges: number;
  class_names: string[];
}

export interface ModelInfo {
  name: string;
  arch: "gcn" | "gat";
  in_dim: number;
  hidden_dim: number;
  num_classes: number;
  heads_layer1: number;
}

export interface GraphNode {
  id: number;
  true_class: number | null;
  predicted_class: number;
}

export interface GraphEdge {
  u: number;
  v: number;
}

export interface GraphPayload {
  graph_version: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
  class_names: string[];
}

export interface NeighborEntry {
  id: number;
  true_class: number | null;
  predicted_class: number;
}

export interface NodeInfo {
  graph_version: number;
  id: number;
  true_class: number | null;
  predicted_class: number;
  log_probs: number[];
  nonzero_features: { index: number; name: string; value: number }[];
  neighbors: NeighborEntry[];
}

export interface JobPayload {
  id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed" | "cancelled";
  progress: number;
  result?: unknown;
  error?: { code: string; message: string };
}

export interface ChangedPrediction {
  id: number;
  old: number;
  new: number;
}

export interface EditResponse {
  graph_version: number;
  changed_predictions: ChangedPrediction[];
}

export type EditOp =
  | { kind: "add_edge"; u: number; v: number }
  | { kind: "remove_edge"; u: number; v: number }
  | { kind: "remove_node"; node: number }
  | { kind: "add_node"; feature_source: "zeros" }
  | { kind: "add_node"; feature_source: "copy_of"; node: number };

export interface TopEdge {
  src: number;
  dst: number;
  score: number;
}

export interface TopFeature {
  index: number;
  name: string;
  score: number;
}

export interface Explanation {
  graph_version: number;
  center: number;
  predicted_class: number;
  edges: [number, number][];
  edge_mask: number[];
  feature_mask: number[];
  top_edges: TopEdge[];
  top_features: TopFeature[];
  loss_trace: number[];
}

export interface AttentionEntry {
  neighbor: number;
  per_head: number[];
  mean: number;
}

export interface AttentionPayload {
  graph_version: number;
  center: number;
  assigns: AttentionEntry[];
  receives: AttentionEntry[];
}

export interface EmbeddingPayload {
  graph_version: number;
  node_ids: number[];
  method: string;
  coords: [number, number][];
  diagnostics: Record<string, unknown>;
}

export interface SessionHandle {
  session_id: string;
  graph_version: number;
  dataset: string;
  model: string;
  arch: "gcn" | "gat";
}
