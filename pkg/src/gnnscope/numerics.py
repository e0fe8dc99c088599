"""Numerical building blocks: normalized adjacency, softmax, activations,
seeded dropout, Adam, and a finite-difference gradient checker."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ComputeError, ValidationError


@dataclass
class SparseAdjacency:
    """Symmetric-normalized adjacency with self-loops, in COO entry form.

    entry k is (rows[k], cols[k], weights[k]); `to_csr` gives the compressed
    form used for fast products. Entry order is deterministic (sorted by
    row, then col) so per-entry edge weights align reproducibly.
    """

    num_nodes: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.weights, (self.rows, self.cols)),
            shape=(self.num_nodes, self.num_nodes),
        )

    def entry_lookup(self) -> dict:
        """Map (row, col) -> entry index."""
        return {
            (int(r), int(c)): k
            for k, (r, c) in enumerate(zip(self.rows, self.cols))
        }


def build_normalized_adjacency(edges, num_nodes) -> SparseAdjacency:
    """D^{-1/2} (A + I) D^{-1/2} for an undirected edge list.

    `edges` holds each undirected pair once; both directions plus self-loops
    appear in the output entries.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
        bad = edges[(edges < 0) | (edges >= num_nodes)].flat[0]
        raise ValidationError(f"edge endpoint {bad} out of range [0, {num_nodes})",
                              code="invalid-node-id")
    rows = np.concatenate([edges[:, 0], edges[:, 1], np.arange(num_nodes)])
    cols = np.concatenate([edges[:, 1], edges[:, 0], np.arange(num_nodes)])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    deg = np.bincount(rows, minlength=num_nodes).astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(deg)
    weights = inv_sqrt[rows] * inv_sqrt[cols]
    return SparseAdjacency(num_nodes, rows, cols, weights)


def row_softmax(values, log=False):
    """Softmax over each row (2-D input) or each group (list of 1-D groups).

    Stabilized by max-subtraction; `log=True` returns log-probabilities.
    """
    if isinstance(values, np.ndarray) and values.ndim == 2:
        if values.shape[1] == 0:
            raise ValidationError("empty softmax group", code="empty-group")
        shifted = values - values.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        return shifted - lse if log else np.exp(shifted - lse)
    out = []
    for group in values:
        group = np.asarray(group, dtype=np.float64)
        if group.size == 0:
            raise ValidationError("empty softmax group", code="empty-group")
        shifted = group - group.max()
        lse = np.log(np.exp(shifted).sum())
        out.append(shifted - lse if log else np.exp(shifted - lse))
    return out


def activation(x, kind="relu", slope=0.2):
    x = np.asarray(x, dtype=np.float64)
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "leaky_relu":
        return np.where(x > 0, x, slope * x)
    if kind == "elu":
        return np.where(x > 0, x, np.expm1(x))
    raise ValidationError(f"unknown activation {kind!r}", code="invalid-input")


def dropout_mask(shape, rate, seed):
    """Inverted-dropout mask: kept entries scaled by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValidationError(f"dropout rate {rate} outside [0, 1)",
                              code="invalid-rate")
    if rate == 0.0:
        return np.ones(shape, dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(seed))
    keep = rng.random(shape) >= rate
    return keep.astype(np.float64) / (1.0 - rate)


@dataclass
class OptimizerState:
    """Bias-corrected Adam with coupled L2 weight decay."""

    lr: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    step: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)

    @classmethod
    def init(cls, params, lr=0.005, weight_decay=0.0, beta1=0.9, beta2=0.999,
             eps=1e-8):
        return cls(
            lr=lr, beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay,
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
        )


def adam_step(params, grads, state: OptimizerState):
    """One Adam update; returns new parameter arrays, mutates state."""
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ValidationError("parameter/gradient count mismatch",
                              code="shape-mismatch")
    state.step += 1
    t = state.step
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValidationError(
                f"param {i} shape {p.shape} vs grad {g.shape}",
                code="shape-mismatch")
        g = g + state.weight_decay * p
        m = state.first_moment[i] = state.beta1 * state.first_moment[i] \
            + (1 - state.beta1) * g
        v = state.second_moment[i] = state.beta2 * state.second_moment[i] \
            + (1 - state.beta2) * g * g
        m_hat = m / (1 - state.beta1**t)
        v_hat = v / (1 - state.beta2**t)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out, state


@dataclass
class GradCheckReport:
    max_relative_error: float
    passed: bool
    num_checked: int


def finite_difference_check(loss_fn, params, eps=1e-5, tolerance=1e-4,
                            max_coords_per_param=20, seed=0) -> GradCheckReport:
    """Central-difference check of analytic gradients.

    loss_fn(params) -> (loss, grads); must be deterministic (verified by a
    double evaluation). A sample of coordinates per parameter is checked.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive", code="invalid-input")
    loss0, grads = loss_fn(params)
    loss1, _ = loss_fn(params)
    if loss0 != loss1:
        raise ComputeError("loss function is nondeterministic",
                           code="nondeterministic-loss")
    rng = np.random.Generator(np.random.PCG64(seed))
    max_err = 0.0
    checked = 0
    for i, p in enumerate(params):
        flat_idx = np.arange(p.size)
        if p.size > max_coords_per_param:
            flat_idx = rng.choice(p.size, size=max_coords_per_param,
                                  replace=False)
        for j in flat_idx:
            idx = np.unravel_index(j, p.shape)
            perturbed = [q.copy() for q in params]
            perturbed[i][idx] += eps
            up, _ = loss_fn(perturbed)
            perturbed[i][idx] -= 2 * eps
            down, _ = loss_fn(perturbed)
            g_fd = (up - down) / (2 * eps)
            g_ad = grads[i][idx]
            err = abs(g_ad - g_fd) / max(abs(g_ad), abs(g_fd), 1e-8)
            max_err = max(max_err, err)
            checked += 1
    return GradCheckReport(max_err, max_err < tolerance, checked)
