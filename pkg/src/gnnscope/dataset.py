"""Node-classification dataset container.

Binary layout ("GNNDS1", little-endian) is documented in
docs/dataset-format.md. Datasets are immutable after load; editing happens
on session working copies.
"""

from __future__ import annotations

import pickle
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataFormatError, ValidationError

MAGIC = b"GNNDS1"


@dataclass(frozen=True)
class GraphDataset:
    name: str
    features: np.ndarray        # (num_nodes, num_features) float32
    edges: np.ndarray           # (num_edges, 2) int64, canonical u < v
    labels: np.ndarray          # (num_nodes,) int64
    train_mask: np.ndarray      # bool
    val_mask: np.ndarray
    test_mask: np.ndarray
    class_names: tuple
    feature_names: tuple | None = None

    @property
    def num_nodes(self):
        return self.features.shape[0]

    @property
    def num_features(self):
        return self.features.shape[1]

    @property
    def num_classes(self):
        return len(self.class_names)


@dataclass(frozen=True)
class SplitSpec:
    kind: str = "random-per-class"      # or "planetoid-file"
    train_per_class: int = 20
    val_size: int = 500
    test_size: int = 1000
    seed: int = 0


def build_dataset(name, features, edges, labels, train_mask, val_mask,
                  test_mask, class_names, feature_names=None) -> GraphDataset:
    """Canonicalize raw arrays into a validated GraphDataset.

    Edges may arrive in either direction with duplicates; self-loops are
    dropped (models add their own at compute time).
    """
    features = np.ascontiguousarray(features, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    n = features.shape[0]
    if edges.size:
        if edges.min() < 0 or edges.max() >= n:
            bad = edges[(edges < 0) | (edges >= n)].flat[0]
            raise ValidationError(f"edge endpoint {bad} out of range [0, {n})",
                                  code="index-out-of-range")
        edges = edges[edges[:, 0] != edges[:, 1]]
        edges = np.sort(edges, axis=1)
        edges = np.unique(edges, axis=0)
    ds = GraphDataset(
        name=name, features=features, edges=edges, labels=labels,
        train_mask=np.asarray(train_mask, dtype=bool),
        val_mask=np.asarray(val_mask, dtype=bool),
        test_mask=np.asarray(test_mask, dtype=bool),
        class_names=tuple(class_names),
        feature_names=tuple(feature_names) if feature_names is not None else None,
    )
    _validate(ds)
    return ds


def _validate(ds: GraphDataset):
    n = ds.num_nodes
    for mask in (ds.train_mask, ds.val_mask, ds.test_mask):
        if mask.shape != (n,):
            raise ValidationError("mask length mismatch", code="invalid-input")
    overlap = (ds.train_mask & ds.val_mask) | (ds.train_mask & ds.test_mask) \
        | (ds.val_mask & ds.test_mask)
    if overlap.any():
        node = int(np.flatnonzero(overlap)[0])
        raise DataFormatError(f"masks overlap at node {node}",
                              code="overlapping-masks")
    split = ds.train_mask | ds.val_mask | ds.test_mask
    labeled = ds.labels[split]
    if labeled.size and (labeled.min() < 0 or labeled.max() >= ds.num_classes):
        raise ValidationError("split node label outside [0, num_classes)",
                              code="index-out-of-range")
    if ds.edges.size:
        if (ds.edges[:, 0] >= ds.edges[:, 1]).any():
            raise DataFormatError("edges not canonical (u < v)",
                                  code="invalid-input")


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.data):
            raise DataFormatError(
                f"{self.path}: truncated at byte offset {self.pos} "
                f"(needed {n} more bytes)", code="truncated-file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def string(self):
        return self.take(self.u32()).decode("utf-8")


def load_dataset(path) -> GraphDataset:
    path = Path(path)
    data = path.read_bytes()
    r = _Reader(data, path)
    if r.take(len(MAGIC)) != MAGIC:
        raise DataFormatError(f"{path}: bad magic bytes at offset 0",
                              code="bad-magic")
    n, f, c, m = r.u32(), r.u32(), r.u32(), r.u32()
    flags = r.take(1)[0]
    name = r.string()
    class_names = tuple(r.string() for _ in range(c))
    feature_names = tuple(r.string() for _ in range(f)) if flags & 1 else None
    features = np.frombuffer(r.take(4 * n * f), dtype="<f4").reshape(n, f)
    edges = np.frombuffer(r.take(8 * m), dtype="<u4").reshape(m, 2)
    edges = edges.astype(np.int64)
    if edges.size and edges.max() >= n:
        bad = int(edges.max())
        raise DataFormatError(
            f"{path}: edge endpoint {bad} out of range [0, {n})",
            code="index-out-of-range")
    labels = np.frombuffer(r.take(2 * n), dtype="<u2").astype(np.int64)
    nbytes = (n + 7) // 8
    masks = []
    for _ in range(3):
        packed = np.frombuffer(r.take(nbytes), dtype=np.uint8)
        masks.append(np.unpackbits(packed, bitorder="little")[:n].astype(bool))
    ds = GraphDataset(
        name=name, features=features.astype(np.float32), edges=edges,
        labels=labels, train_mask=masks[0], val_mask=masks[1],
        test_mask=masks[2], class_names=class_names,
        feature_names=feature_names,
    )
    _validate(ds)
    return ds


def export_dataset(ds: GraphDataset, path):
    out = bytearray()
    out += MAGIC
    out += struct.pack("<IIII", ds.num_nodes, ds.num_features,
                       ds.num_classes, len(ds.edges))
    out += bytes([1 if ds.feature_names is not None else 0])

    def put_string(s):
        b = s.encode("utf-8")
        out.extend(struct.pack("<I", len(b)))
        out.extend(b)

    put_string(ds.name)
    for cn in ds.class_names:
        put_string(cn)
    if ds.feature_names is not None:
        for fn in ds.feature_names:
            put_string(fn)
    out += np.ascontiguousarray(ds.features, dtype="<f4").tobytes()
    out += np.ascontiguousarray(ds.edges, dtype="<u4").tobytes()
    out += np.ascontiguousarray(ds.labels, dtype="<u2").tobytes()
    for mask in (ds.train_mask, ds.val_mask, ds.test_mask):
        out += np.packbits(mask, bitorder="little").tobytes()
    try:
        Path(path).write_bytes(bytes(out))
    except OSError as e:
        raise DataFormatError(f"cannot write {path}: {e}", code="io-error")


def make_random_split(ds: GraphDataset, spec: SplitSpec) -> GraphDataset:
    """Seeded per-class split: train_per_class train nodes per class, then
    val_size/test_size drawn from the shuffled remainder."""
    if spec.kind != "random-per-class":
        raise ValidationError(f"unsupported split kind {spec.kind!r}",
                              code="invalid-input")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = ds.num_nodes
    train = np.zeros(n, dtype=bool)
    for c in range(ds.num_classes):
        pool = np.flatnonzero(ds.labels == c)
        if pool.size < spec.train_per_class:
            raise ValidationError(
                f"class {c} ({ds.class_names[c]}) has {pool.size} nodes, "
                f"need {spec.train_per_class}",
                code="insufficient-class-population")
        train[rng.choice(pool, size=spec.train_per_class, replace=False)] = True
    rest = np.flatnonzero(~train)
    if rest.size < spec.val_size + spec.test_size:
        raise ValidationError("not enough nodes for val+test split",
                              code="insufficient-class-population")
    rest = rng.permutation(rest)
    val = np.zeros(n, dtype=bool)
    test = np.zeros(n, dtype=bool)
    val[rest[:spec.val_size]] = True
    test[rest[spec.val_size:spec.val_size + spec.test_size]] = True
    return replace(ds, train_mask=train, val_mask=val, test_mask=test)


# -- converter for the public Planetoid distribution --------------------

# Class order of the one-hot labels in the public Planetoid pickles.
_PLANETOID_CLASS_NAMES = {
    "cora": ("Case_Based", "Genetic_Algorithms", "Neural_Networks",
             "Probabilistic_Methods", "Reinforcement_Learning",
             "Rule_Learning", "Theory"),
    "citeseer": ("Agents", "AI", "DB", "IR", "ML", "HCI"),
}


def convert_planetoid(raw_dir, name, out_path=None) -> GraphDataset:
    """Build a container from the public Planetoid files (ind.<name>.*).

    Uses the standard split convention: first len(y) nodes train, next 500
    val, test.index test. Isolated test nodes missing from the index range
    (CiteSeer) get zero feature/label rows.
    """
    raw_dir = Path(raw_dir)
    lname = name.lower()

    def load_obj(suffix):
        p = raw_dir / f"ind.{lname}.{suffix}"
        with open(p, "rb") as f:
            return pickle.load(f, encoding="latin1")

    x, y, tx, ty, allx, ally = (load_obj(s) for s in
                                ("x", "y", "tx", "ty", "allx", "ally"))
    graph = load_obj("graph")
    test_idx = np.loadtxt(raw_dir / f"ind.{lname}.test.index", dtype=np.int64)
    test_sorted = np.sort(test_idx)

    full_range = np.arange(test_sorted.min(), test_sorted.max() + 1)
    tx_dense = np.asarray(tx.todense(), dtype=np.float32)
    ty = np.asarray(ty)
    tx_full = np.zeros((full_range.size, tx_dense.shape[1]), dtype=np.float32)
    ty_full = np.zeros((full_range.size, ty.shape[1]), dtype=ty.dtype)
    tx_full[test_sorted - test_sorted.min()] = tx_dense[np.argsort(test_idx)]
    ty_full[test_sorted - test_sorted.min()] = ty[np.argsort(test_idx)]

    features = np.vstack([np.asarray(allx.todense(), dtype=np.float32), tx_full])
    onehot = np.vstack([np.asarray(ally), ty_full])
    labels = onehot.argmax(axis=1)
    num_classes = onehot.shape[1]

    n = features.shape[0]
    edges = [(u, v) for u, nbrs in graph.items() for v in nbrs
             if u < n and v < n]
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    test = np.zeros(n, dtype=bool)
    train[:len(y)] = True
    val[len(y):len(y) + 500] = True
    # nodes absent from test.index stay unlabeled / unsplit
    test[test_sorted] = True

    ds = build_dataset(
        name=name, features=features, edges=edges, labels=labels,
        train_mask=train, val_mask=val, test_mask=test,
        class_names=_PLANETOID_CLASS_NAMES.get(
            lname, tuple(f"class_{i}" for i in range(num_classes))),
    )
    if out_path is not None:
        export_dataset(ds, out_path)
    return ds
