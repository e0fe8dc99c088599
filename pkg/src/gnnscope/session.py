"""Editable working graphs bound to a trained model, with re-inference on
every edit, an ordered edit log, and version-keyed caches."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from .dataset import GraphDataset
from .errors import NotFoundError, ValidationError
from .models import InferenceResult, ModelConfig, ModelParams
from .training import infer


@dataclass(frozen=True)
class EditOp:
    kind: str                       # add_node | remove_node | add_edge | remove_edge
    u: int | None = None            # edge endpoints
    v: int | None = None
    node: int | None = None         # remove_node target / copy template
    feature_source: str = "zeros"   # add_node: "zeros" | "copy_of"

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("add_edge", "remove_edge"):
            d.update(u=int(self.u), v=int(self.v))
        elif self.kind == "remove_node":
            d["node"] = int(self.node)
        else:
            d["feature_source"] = self.feature_source
            if self.feature_source == "copy_of":
                d["node"] = int(self.node)
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ValidationError("edit must be a JSON object",
                                  code="invalid-input")
        kind = d.get("kind")
        try:
            if kind in ("add_edge", "remove_edge"):
                return cls(kind=kind, u=int(d["u"]), v=int(d["v"]))
            if kind == "remove_node":
                return cls(kind=kind, node=int(d["node"]))
            if kind == "add_node":
                src = d.get("feature_source", "zeros")
                if src not in ("zeros", "copy_of"):
                    raise ValidationError(
                        f"unknown feature source {src!r}",
                        code="invalid-input")
                node = int(d["node"]) if src == "copy_of" else None
                return cls(kind=kind, feature_source=src, node=node)
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"malformed edit: {e}",
                                  code="invalid-input")
        raise ValidationError(f"unknown edit kind {kind!r}",
                              code="invalid-input")


@dataclass
class NeighborSummary:
    center: int
    neighbors: list                 # (neighbor id, true class or None, predicted)

    def to_dict(self):
        return {"center": int(self.center), "neighbors": [
            {"id": int(n), "true_class": tc, "predicted_class": int(pc)}
            for n, tc, pc in self.neighbors]}


class Session:
    """One working copy of a dataset graph. Edits are serialized by an
    internal lock; node ids are never reused within a session."""

    def __init__(self, dataset: GraphDataset, params: ModelParams,
                 config: ModelConfig, session_id=None):
        if dataset.num_features != config.in_dim:
            raise ValidationError(
                f"dataset has {dataset.num_features} features but the model "
                f"expects {config.in_dim}", code="dimension-mismatch")
        self.id = session_id or uuid.uuid4().hex[:12]
        self.dataset = dataset
        self.params = params
        self.config = config
        self.lock = threading.Lock()
        self.graph_version = 0
        self.edit_log: list[EditOp] = []
        self.caches: dict = {}
        self._load_pristine()
        self._reinfer()

    # -- working graph state --------------------------------------------

    def _load_pristine(self):
        ds = self.dataset
        self.ids = list(range(ds.num_nodes))
        self.features = {i: ds.features[i].copy() for i in self.ids}
        self.edges = {(int(u), int(v)) for u, v in ds.edges}
        self.next_node_id = ds.num_nodes

    def _row_layout(self):
        ids = sorted(self.ids)
        row_of = {nid: r for r, nid in enumerate(ids)}
        feats = np.stack([self.features[i] for i in ids]) if ids \
            else np.zeros((0, self.dataset.num_features), dtype=np.float32)
        edges = np.array(sorted((row_of[u], row_of[v]) if row_of[u] < row_of[v]
                                else (row_of[v], row_of[u])
                                for u, v in self.edges),
                         dtype=np.int64).reshape(-1, 2)
        return ids, row_of, feats, edges

    def _reinfer(self):
        ids, row_of, feats, edges = self._row_layout()
        self.row_ids = ids
        self.row_of = row_of
        self.latest_inference: InferenceResult = infer(
            self.params, self.config, feats, edges, len(ids))

    # -- queries ---------------------------------------------------------

    def predicted_class(self, node):
        self._require_node(node)
        return int(self.latest_inference.predicted[self.row_of[node]])

    def true_class(self, node):
        if node < self.dataset.num_nodes:
            return int(self.dataset.labels[node])
        return None                 # added nodes carry no ground truth

    def node_feature_row(self, node):
        self._require_node(node)
        return self.features[node]

    def neighbor_summary(self, node) -> NeighborSummary:
        self._require_node(node)
        nbrs = sorted({v if u == node else u for u, v in self.edges
                       if node in (u, v)})
        return NeighborSummary(node, [
            (n, self.true_class(n), self.predicted_class(n)) for n in nbrs])

    def _require_node(self, node):
        if node not in self.features:
            raise NotFoundError(f"node {node} does not exist",
                                code="missing-node")

    # -- edits -----------------------------------------------------------

    def apply_edit(self, op: EditOp):
        """Validate, mutate, bump version, re-infer. Returns the list of
        (node id, old prediction, new prediction) changes."""
        with self.lock:
            before = {nid: int(self.latest_inference.predicted[r])
                      for nid, r in self.row_of.items()}
            self._apply(op)
            self.edit_log.append(op)
            self.graph_version += 1
            self.caches = {k: v for k, v in self.caches.items()
                           if k[0] == self.graph_version}
            self._reinfer()
            changed = []
            for nid, r in self.row_of.items():
                new = int(self.latest_inference.predicted[r])
                if nid in before and before[nid] != new:
                    changed.append((nid, before[nid], new))
            return sorted(changed)

    def _apply(self, op: EditOp):
        if op.kind == "add_edge":
            self._require_node(op.u)
            self._require_node(op.v)
            if op.u == op.v:
                raise ValidationError("self-loops are not allowed",
                                      code="self-loop-rejected")
            key = (min(op.u, op.v), max(op.u, op.v))
            if key in self.edges:
                raise ValidationError(f"edge {key} already exists",
                                      code="duplicate-edge")
            self.edges.add(key)
        elif op.kind == "remove_edge":
            key = (min(op.u, op.v), max(op.u, op.v))
            if key not in self.edges:
                raise NotFoundError(f"edge {key} does not exist",
                                    code="missing-edge")
            self.edges.remove(key)
        elif op.kind == "remove_node":
            self._require_node(op.node)
            self.ids.remove(op.node)
            del self.features[op.node]
            self.edges = {(u, v) for u, v in self.edges
                          if op.node not in (u, v)}
        elif op.kind == "add_node":
            if op.feature_source == "zeros":
                row = np.zeros(self.dataset.num_features, dtype=np.float32)
            elif op.feature_source == "copy_of":
                self._require_node(op.node)
                row = self.features[op.node].copy()
            else:
                raise ValidationError(
                    f"unknown feature source {op.feature_source!r}",
                    code="invalid-input")
            nid = self.next_node_id
            self.next_node_id += 1
            self.ids.append(nid)
            self.features[nid] = row
        else:
            raise ValidationError(f"unknown edit kind {op.kind!r}",
                                  code="invalid-input")

    def reset(self):
        with self.lock:
            self._load_pristine()
            self.edit_log = []
            self.graph_version += 1
            self.caches = {}
            self._reinfer()

    # -- consistency helpers ---------------------------------------------

    def replay_log(self):
        """Re-apply the edit log to a fresh copy; returns (ids, edges,
        features) for comparison against the live working graph."""
        twin = Session(self.dataset, self.params, self.config,
                       session_id="replay")
        for op in self.edit_log:
            twin.apply_edit(op)
        return twin

    def working_arrays(self):
        ids, _, feats, edges = self._row_layout()
        return ids, feats, edges
