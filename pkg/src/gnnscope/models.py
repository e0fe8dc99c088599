"""Two-layer GCN and GAT: initialization, forward/inference, weight files.

Parameters are canonically float32; forward passes compute in float64 on an
autodiff tape so the same code serves inference, training, and the
explainer's masked predictions (via the `edge_weights` hook).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import DataFormatError, ValidationError
from .numerics import SparseAdjacency, dropout_mask

GCN_PARAM_ORDER = ("W1", "b1", "W2", "b2")
GAT_PARAM_ORDER = ("W1", "a_src1", "a_dst1", "b1",
                   "W2", "a_src2", "a_dst2", "b2")


@dataclass(frozen=True)
class ModelConfig:
    arch: str                    # "gcn" | "gat"
    in_dim: int
    hidden_dim: int              # GCN hidden width / GAT per-head width
    num_classes: int
    heads_layer1: int = 8
    dropout_rate: float = 0.5
    leaky_slope: float = 0.2
    layer1_activation: str = "relu"   # GAT layer 1: "relu" or "elu"
    seed: int = 0

    def __post_init__(self):
        if self.arch not in ("gcn", "gat"):
            raise ValidationError(f"unknown arch {self.arch!r}",
                                  code="invalid-input")
        if self.heads_layer1 < 1:
            raise ValidationError("heads_layer1 must be >= 1",
                                  code="invalid-input")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate outside [0, 1)",
                                  code="invalid-rate")

    @property
    def param_order(self):
        return GCN_PARAM_ORDER if self.arch == "gcn" else GAT_PARAM_ORDER

    @property
    def embedding_dim(self):
        if self.arch == "gcn":
            return self.hidden_dim
        return self.hidden_dim * self.heads_layer1


@dataclass
class ModelParams:
    arrays: dict = field(default_factory=dict)   # name -> float32 ndarray

    def flat(self, order):
        return [self.arrays[k] for k in order]


@dataclass
class InferenceResult:
    log_probs: np.ndarray        # (n, C)
    predicted: np.ndarray        # (n,) argmax, ties -> lowest class index
    embeddings: np.ndarray       # (n, embedding_dim) layer-1 post-activation
    attention: dict | None = None


def _glorot(rng, shape):
    fan_in, fan_out = shape[-2], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(config: ModelConfig) -> ModelParams:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    c = config
    if c.arch == "gcn":
        arrays = {
            "W1": _glorot(rng, (c.in_dim, c.hidden_dim)),
            "b1": np.zeros(c.hidden_dim),
            "W2": _glorot(rng, (c.hidden_dim, c.num_classes)),
            "b2": np.zeros(c.num_classes),
        }
    else:
        h, d = c.heads_layer1, c.hidden_dim
        arrays = {
            "W1": _glorot(rng, (h, c.in_dim, d)),
            "a_src1": _glorot(rng, (h, d, 1))[:, :, 0],
            "a_dst1": _glorot(rng, (h, d, 1))[:, :, 0],
            "b1": np.zeros(h * d),
            "W2": _glorot(rng, (h * d, c.num_classes)),
            "a_src2": _glorot(rng, (c.num_classes, 1))[:, 0],
            "a_dst2": _glorot(rng, (c.num_classes, 1))[:, 0],
            "b2": np.zeros(c.num_classes),
        }
    return ModelParams({k: v.astype(np.float32) for k, v in arrays.items()})


def _as_tensors(params, order, trainable=False):
    if isinstance(params, dict):          # already tensors (training path)
        return params
    return {k: Tensor(params.arrays[k], requires_grad=trainable)
            for k in order}


# -- GCN ----------------------------------------------------------------


def gcn_graph(ptensors, features, norm_adj: SparseAdjacency, config,
              mode="eval", seed=0, edge_weights=None):
    """Build the GCN compute graph; returns (log_probs, embeddings) tensors."""
    x = features if isinstance(features, Tensor) else Tensor(features)
    if mode == "train" and config.dropout_rate > 0:
        x = x * Tensor(dropout_mask(x.shape, config.dropout_rate, seed))
    if edge_weights is None:
        adj_mat = norm_adj.to_csr()

        def propagate(t):
            return ad.spmm(adj_mat, t)
    else:
        ew = edge_weights if isinstance(edge_weights, Tensor) \
            else Tensor(np.asarray(edge_weights, dtype=np.float64))
        values = ew * Tensor(norm_adj.weights)
        shape = (norm_adj.num_nodes, norm_adj.num_nodes)

        def propagate(t):
            return ad.coo_spmm(values, norm_adj.rows, norm_adj.cols, shape, t)

    h1 = ad.relu(propagate(x @ ptensors["W1"]) + ptensors["b1"])
    h1d = h1
    if mode == "train" and config.dropout_rate > 0:
        h1d = h1 * Tensor(dropout_mask(h1.shape, config.dropout_rate, seed + 1))
    z = propagate(h1d @ ptensors["W2"]) + ptensors["b2"]
    return ad.log_softmax_rows(z), h1


def gcn_forward(params: ModelParams, features, norm_adj, config: ModelConfig,
                mode="eval", seed=0, edge_weights=None) -> InferenceResult:
    if features.shape[1] != config.in_dim:
        raise ValidationError(
            f"features have {features.shape[1]} dims, model expects "
            f"{config.in_dim}", code="shape-mismatch")
    pt = _as_tensors(params, GCN_PARAM_ORDER)
    log_probs, h1 = gcn_graph(pt, features, norm_adj, config, mode, seed,
                              edge_weights)
    lp = log_probs.value
    return InferenceResult(lp, lp.argmax(axis=1), h1.value)


# -- GAT ----------------------------------------------------------------


def gat_edge_order(edges, num_nodes):
    """Directed message entries (neighbor -> center) plus self-loops, in the
    deterministic order used by the forward pass and the edge_weights hook.

    Returns (nbr, ctr) index arrays sorted by (ctr, nbr).
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    loop = np.arange(num_nodes)
    nbr = np.concatenate([edges[:, 0], edges[:, 1], loop])
    ctr = np.concatenate([edges[:, 1], edges[:, 0], loop])
    order = np.lexsort((nbr, ctr))
    return nbr[order], ctr[order]


def gat_graph(ptensors, features, edges, num_nodes, config, mode="eval",
              seed=0, edge_weights=None):
    """Returns (log_probs, embeddings, attention) for the two-layer GAT.

    attention holds per-entry coefficients: layer1 (entries, heads) and
    layer2 (entries,) value arrays (post renormalization if edge_weights).
    """
    c = config
    nbr, ctr = gat_edge_order(edges, num_nodes)
    x = features if isinstance(features, Tensor) else Tensor(features)
    if mode == "train" and c.dropout_rate > 0:
        x = x * Tensor(dropout_mask(x.shape, c.dropout_rate, seed))

    if edge_weights is not None:
        ew = edge_weights if isinstance(edge_weights, Tensor) \
            else Tensor(np.asarray(edge_weights, dtype=np.float64))

    def attend(xp, a_src, a_dst, drop_seed):
        """One attention head over the directed entries; returns (alpha, msg
        aggregation input xp[nbr])."""
        xp_nbr = ad.gather_rows(xp, nbr)
        xp_ctr = ad.gather_rows(xp, ctr)
        score = ad.leaky_relu(
            ad.tsum(xp_ctr * a_src, axis=1) + ad.tsum(xp_nbr * a_dst, axis=1),
            slope=c.leaky_slope)
        alpha = ad.segment_softmax(score, ctr, num_nodes)
        if edge_weights is not None:
            weighted = alpha * ew
            denom = ad.segment_sum(weighted, ctr, num_nodes)
            alpha = weighted / ad.gather_rows(denom, ctr)
        if mode == "train" and c.dropout_rate > 0:
            alpha = alpha * Tensor(
                dropout_mask(alpha.shape, c.dropout_rate, drop_seed))
        return alpha, xp_nbr

    # layer 1: one pass per head, concatenated
    head_outs = []
    alphas1 = []
    for k in range(c.heads_layer1):
        xp = matmul_head(ptensors["W1"], x, k)
        a_src = ad.reshape(slice_head(ptensors["a_src1"], k), (1, c.hidden_dim))
        a_dst = ad.reshape(slice_head(ptensors["a_dst1"], k), (1, c.hidden_dim))
        alpha, xp_nbr = attend(xp, a_src, a_dst, seed + 10 + k)
        alphas1.append(alpha)
        msg = ad.reshape(alpha, (-1, 1)) * xp_nbr
        head_outs.append(ad.segment_sum(msg, ctr, num_nodes))
    h1_pre = ad.concat(head_outs, axis=1) + ptensors["b1"]
    act = ad.relu if c.layer1_activation == "relu" else ad.elu
    h1 = act(h1_pre)

    # layer 2: single head
    h1d = h1
    if mode == "train" and c.dropout_rate > 0:
        h1d = h1 * Tensor(dropout_mask(h1.shape, c.dropout_rate, seed + 1))
    xp2 = h1d @ ptensors["W2"]
    a_src2 = ad.reshape(ptensors["a_src2"], (1, c.num_classes))
    a_dst2 = ad.reshape(ptensors["a_dst2"], (1, c.num_classes))
    alpha2, xp2_nbr = attend(xp2, a_src2, a_dst2, seed + 2)
    z = ad.segment_sum(ad.reshape(alpha2, (-1, 1)) * xp2_nbr, ctr, num_nodes) \
        + ptensors["b2"]
    log_probs = ad.log_softmax_rows(z)

    attention = {
        "nbr": nbr,
        "ctr": ctr,
        "layer1": np.stack([a.value for a in alphas1], axis=1),
        "layer2": alpha2.value,
    }
    return log_probs, h1, attention


def matmul_head(w_stack: Tensor, x: Tensor, k):
    """x @ w_stack[k] for a (heads, in, out) parameter stack."""
    wk = ad.reshape(ad.gather_rows(w_stack, [k]),
                    (w_stack.shape[1], w_stack.shape[2]))
    return x @ wk


def slice_head(a_stack: Tensor, k):
    return ad.reshape(ad.gather_rows(a_stack, [k]), (a_stack.shape[1],))


def gat_forward(params: ModelParams, features, edges, num_nodes,
                config: ModelConfig, mode="eval", seed=0,
                edge_weights=None) -> InferenceResult:
    if features.shape[1] != config.in_dim:
        raise ValidationError(
            f"features have {features.shape[1]} dims, model expects "
            f"{config.in_dim}", code="shape-mismatch")
    pt = _as_tensors(params, GAT_PARAM_ORDER)
    log_probs, h1, attention = gat_graph(pt, features, edges, num_nodes,
                                         config, mode, seed, edge_weights)
    lp = log_probs.value
    return InferenceResult(lp, lp.argmax(axis=1), h1.value, attention)


def forward(params, ds_features, edges, num_nodes, config, norm_adj=None,
            mode="eval", seed=0, edge_weights=None) -> InferenceResult:
    """Architecture dispatch; builds the normalized adjacency if needed."""
    if config.arch == "gcn":
        if norm_adj is None:
            from .numerics import build_normalized_adjacency
            norm_adj = build_normalized_adjacency(edges, num_nodes)
        return gcn_forward(params, ds_features, norm_adj, config, mode, seed,
                           edge_weights)
    return gat_forward(params, ds_features, edges, num_nodes, config, mode,
                       seed, edge_weights)


# -- weight files -------------------------------------------------------

WEIGHTS_MAGIC = b"GNNW1"
_ACT_CODES = {"relu": 0, "elu": 1}


def save_weights(params: ModelParams, config: ModelConfig, path):
    out = bytearray()
    out += WEIGHTS_MAGIC
    out += bytes([0 if config.arch == "gcn" else 1])
    out += struct.pack("<IIII", config.in_dim, config.hidden_dim,
                       config.num_classes, config.heads_layer1)
    out += struct.pack("<ddB", config.dropout_rate, config.leaky_slope,
                       _ACT_CODES[config.layer1_activation])
    out += struct.pack("<Q", config.seed)
    for name in config.param_order:
        arr = np.ascontiguousarray(params.arrays[name], dtype="<f4")
        out += struct.pack("<B", arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes()
    Path(path).write_bytes(bytes(out))


def load_weights(path, expected_arch=None):
    data = Path(path).read_bytes()
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise DataFormatError(
                f"{path}: truncated weights file at offset {pos}",
                code="truncated-file")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    if take(len(WEIGHTS_MAGIC)) != WEIGHTS_MAGIC:
        raise DataFormatError(f"{path}: bad magic bytes", code="bad-magic")
    arch = "gcn" if take(1)[0] == 0 else "gat"
    if expected_arch is not None and arch != expected_arch:
        raise DataFormatError(
            f"{path}: file holds a {arch} model, expected {expected_arch}",
            code="arch-mismatch")
    in_dim, hidden, classes, heads = struct.unpack("<IIII", take(16))
    dropout, slope, act = struct.unpack("<ddB", take(17))
    (seed,) = struct.unpack("<Q", take(8))
    config = ModelConfig(
        arch=arch, in_dim=in_dim, hidden_dim=hidden, num_classes=classes,
        heads_layer1=heads, dropout_rate=dropout, leaky_slope=slope,
        layer1_activation={v: k for k, v in _ACT_CODES.items()}[act],
        seed=seed)
    arrays = {}
    for name in config.param_order:
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        count = int(np.prod(shape)) if shape else 1
        arrays[name] = np.frombuffer(take(4 * count),
                                     dtype="<f4").reshape(shape).copy()
    if pos != len(data):
        raise DataFormatError(f"{path}: {len(data) - pos} trailing bytes",
                              code="bad-format")
    return ModelParams(arrays), config
