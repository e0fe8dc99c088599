"""Post-hoc explanations: mask optimization over a node's 2-hop computation
subgraph, GAT attention extraction, and top-k summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ComputeError, ValidationError
from .models import (InferenceResult, ModelConfig, ModelParams, forward,
                     gat_edge_order, gat_graph, gcn_graph)
from .numerics import OptimizerState, adam_step, build_normalized_adjacency


@dataclass(frozen=True)
class ExplainConfig:
    epochs: int = 100
    lr: float = 0.01
    edge_size_coeff: float = 0.005
    edge_entropy_coeff: float = 1.0
    feat_size_coeff: float = 1.0
    feat_entropy_coeff: float = 0.1
    top_k_edges: int = 10
    top_k_features: int = 10
    seed: int = 0


@dataclass
class ComputationSubgraph:
    center: int
    nodes: np.ndarray          # global ids, ascending
    edges: np.ndarray          # (E, 2) directed (src, dst), global ids
    local_of: dict             # global id -> local index

    @property
    def local_center(self):
        return self.local_of[self.center]

    def local_edges(self):
        remap = np.vectorize(self.local_of.__getitem__, otypes=[np.int64])
        return remap(self.edges) if self.edges.size else self.edges


@dataclass
class Explanation:
    center: int
    predicted_class: int
    edges: np.ndarray          # directed (src, dst) global pairs
    edge_mask: np.ndarray      # sigmoid-space, aligned with `edges`
    feature_mask: np.ndarray
    top_edges: list            # [((src, dst), score), ...] descending
    top_features: list         # [(feature index, name, score), ...]
    loss_trace: list = field(default_factory=list)

    def to_dict(self):
        return {
            "center": int(self.center),
            "predicted_class": int(self.predicted_class),
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "edge_mask": [float(x) for x in self.edge_mask],
            "feature_mask": [float(x) for x in self.feature_mask],
            "top_edges": [
                {"src": int(u), "dst": int(v), "score": float(s)}
                for (u, v), s in self.top_edges],
            "top_features": [
                {"index": int(i), "name": n, "score": float(s)}
                for i, n, s in self.top_features],
            "loss_trace": [float(x) for x in self.loss_trace],
        }


@dataclass
class AttentionSummary:
    center: int
    # each entry: (neighbor id, per-head scores, head-averaged score)
    assigns: list              # attention center pays to N(center) + self
    receives: list             # attention neighbors pay to the center

    def to_dict(self):
        def rows(entries):
            return [{"neighbor": int(n), "per_head": [float(x) for x in ph],
                     "mean": float(m)} for n, ph, m in entries]
        return {"center": int(self.center), "assigns": rows(self.assigns),
                "receives": rows(self.receives)}


def _adjacency_sets(edges, num_nodes):
    nbrs = [set() for _ in range(num_nodes)]
    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        nbrs[u].add(int(v))
        nbrs[v].add(int(u))
    return nbrs


def extract_computation_subgraph(edges, num_nodes, center,
                                 hops=2) -> ComputationSubgraph:
    if not 0 <= center < num_nodes:
        raise ValidationError(f"node {center} does not exist",
                              code="invalid-node")
    nbrs = _adjacency_sets(edges, num_nodes)
    frontier = {int(center)}
    reached = {int(center)}
    for _ in range(hops):
        frontier = {v for u in frontier for v in nbrs[u]} - reached
        reached |= frontier
    nodes = np.array(sorted(reached), dtype=np.int64)
    node_set = reached
    directed = []
    for u in nodes:
        for v in sorted(nbrs[u]):
            if v in node_set:
                directed.append((int(u), int(v)))
    dedges = np.array(directed, dtype=np.int64).reshape(-1, 2)
    return ComputationSubgraph(
        center=int(center), nodes=nodes, edges=dedges,
        local_of={int(g): i for i, g in enumerate(nodes)})


def top_k_summary(scores, k, names=None):
    """Descending by score, ties by ascending index; at most k items."""
    if k < 1:
        raise ValidationError("k must be >= 1", code="invalid-input")
    scores = np.asarray(scores, dtype=np.float64)
    order = sorted(range(scores.size), key=lambda i: (-scores[i], i))[:k]
    if names is None:
        return [(i, float(scores[i])) for i in order]
    return [(i, names[i], float(scores[i])) for i in order]


def _entropy(p: Tensor) -> Tensor:
    one_minus = 1.0 - p
    return -(p * ad.log(p) + one_minus * ad.log(one_minus))


def _entry_mask_index(rows, cols, directed_edges, local_of=None):
    """For each sparse entry (row, col) find the directed-edge mask slot of
    the message col -> row; self-loops map to the trailing constant-1 slot."""
    slot = {}
    for idx, (s, d) in enumerate(directed_edges):
        slot[(int(s), int(d))] = idx
    pad = len(directed_edges)
    return np.array([
        pad if r == c else slot[(int(c), int(r))]
        for r, c in zip(rows, cols)], dtype=np.int64)


def _restricted_adjacency(edges, num_nodes, sub: ComputationSubgraph):
    """Full-graph normalized adjacency restricted to the subgraph nodes.

    Keeping the full-graph degree normalization (rather than recomputing
    degrees inside the subgraph) makes the subgraph forward exact for the
    center: with all masks at 1 it reproduces the full model's output.
    """
    from .numerics import SparseAdjacency
    full = build_normalized_adjacency(edges, num_nodes)
    member = np.zeros(num_nodes, dtype=bool)
    member[sub.nodes] = True
    keep = member[full.rows] & member[full.cols]
    remap = np.full(num_nodes, -1, dtype=np.int64)
    remap[sub.nodes] = np.arange(len(sub.nodes))
    return SparseAdjacency(len(sub.nodes), remap[full.rows[keep]],
                           remap[full.cols[keep]], full.weights[keep])


def run_gnn_explainer(params: ModelParams, config: ModelConfig, features,
                      edges, num_nodes, center,
                      cfg: ExplainConfig = ExplainConfig(),
                      feature_names=None) -> Explanation:
    """Learn sigmoid-space edge and feature masks that preserve the model's
    original prediction for `center` while being small and low-entropy."""
    if not 0 <= center < num_nodes:
        raise ValidationError(f"node {center} does not exist",
                              code="invalid-node")
    base = forward(params, features, edges, num_nodes, config)
    target = int(base.predicted[center])

    sub = extract_computation_subgraph(edges, num_nodes, center, hops=2)
    local = sub.local_edges()
    sub_n = len(sub.nodes)
    x_sub = np.asarray(features, dtype=np.float64)[sub.nodes]
    und = np.unique(np.sort(local, axis=1), axis=0) if local.size \
        else local.reshape(0, 2)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n_edges = len(local)
    edge_logits = rng.normal(0.0, 0.1, size=n_edges)
    feat_logits = rng.normal(0.0, 0.1, size=features.shape[1])

    if config.arch == "gcn":
        sub_adj = _restricted_adjacency(edges, num_nodes, sub)
        mask_idx = _entry_mask_index(sub_adj.rows, sub_adj.cols, local)
    else:
        nbr, ctr = gat_edge_order(und, sub_n)
        mask_idx = _entry_mask_index(ctr, nbr, local)

    pt = {k: Tensor(v) for k, v in params.arrays.items()}
    state = OptimizerState.init([edge_logits, feat_logits], lr=cfg.lr)
    trace = []
    lc = sub.local_center

    for _ in range(cfg.epochs):
        el = Tensor(edge_logits, requires_grad=True)
        fl = Tensor(feat_logits, requires_grad=True)
        m_e = ad.sigmoid(el)
        m_f = ad.sigmoid(fl)
        padded = ad.concat([m_e, Tensor(np.ones(1))], axis=0)
        entry_weights = ad.gather_rows(padded, mask_idx)
        x_masked = Tensor(x_sub) * ad.reshape(m_f, (1, -1))
        if config.arch == "gcn":
            log_probs, _ = gcn_graph(pt, x_masked, sub_adj, config,
                                     mode="eval", edge_weights=entry_weights)
        else:
            log_probs, _, _ = gat_graph(pt, x_masked, und, sub_n, config,
                                        mode="eval",
                                        edge_weights=entry_weights)
        loss = -ad.gather_nd(log_probs, [lc], [target])
        loss = ad.tsum(loss)
        if n_edges:
            loss = loss + cfg.edge_size_coeff * ad.tsum(m_e) \
                + cfg.edge_entropy_coeff * ad.tmean(_entropy(m_e))
        loss = loss + cfg.feat_size_coeff * ad.tsum(m_f) * (1.0 / features.shape[1]) \
            + cfg.feat_entropy_coeff * ad.tmean(_entropy(m_f))
        if not np.isfinite(loss.value):
            raise ComputeError("non-finite explainer loss",
                               code="non-finite-loss")
        loss.backward()
        (edge_logits, feat_logits), state = adam_step(
            [edge_logits, feat_logits], [el.grad, fl.grad], state)
        trace.append(float(loss.value))

    edge_mask = 1.0 / (1.0 + np.exp(-edge_logits))
    feature_mask = 1.0 / (1.0 + np.exp(-feat_logits))
    global_edges = sub.edges
    top_edges = [((int(global_edges[i][0]), int(global_edges[i][1])), s)
                 for i, s in top_k_summary(edge_mask, cfg.top_k_edges)] \
        if n_edges else []
    fnames = list(feature_names) if feature_names is not None \
        else [f"f{i}" for i in range(features.shape[1])]
    top_features = top_k_summary(feature_mask, cfg.top_k_features, fnames)
    return Explanation(
        center=int(center), predicted_class=target, edges=global_edges,
        edge_mask=edge_mask, feature_mask=feature_mask, top_edges=top_edges,
        top_features=top_features, loss_trace=trace)


def extract_attention(inference: InferenceResult, center) -> AttentionSummary:
    if inference.attention is None:
        raise ValidationError("attention requires a GAT model",
                              code="model-not-gat")
    att = inference.attention
    nbr, ctr, layer1 = att["nbr"], att["ctr"], att["layer1"]

    def collect(center_is_ctr):
        side, other = (ctr, nbr) if center_is_ctr else (nbr, ctr)
        rows = np.flatnonzero(side == center)
        rows = rows[np.argsort(other[rows], kind="stable")]
        return [(int(other[i]), layer1[i].copy(), float(layer1[i].mean()))
                for i in rows]

    return AttentionSummary(center=int(center), assigns=collect(True),
                            receives=collect(False))
