"""Minimal reverse-mode autodiff over numpy arrays.

Just enough operator coverage for two-layer GCN/GAT forward passes and the
explainer mask objective: elementwise arithmetic, matmul, sparse-dense
products, row gather / segment-sum (the message-passing primitives), and the
usual activations. Values are held in float64; float32 happens only at the
serialization boundary.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

_counter = itertools.count()


class Tensor:
    __slots__ = ("value", "grad", "parents", "_backward", "requires_grad", "_order")

    def __init__(self, value, parents=(), backward=None, requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self._backward = backward
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._order = next(_counter)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, grad={self.requires_grad})"

    # -- graph construction helpers -------------------------------------

    def __add__(self, other):
        return add(self, _wrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __mul__(self, other):
        return mul(self, _wrap(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, _wrap(other))

    # -- backprop -------------------------------------------------------

    def backward(self):
        if self.value.size != 1:
            raise ValueError("backward() requires a scalar output")
        order = []
        seen = set()
        stack = [self]
        while stack:
            t = stack.pop()
            if id(t) in seen:
                continue
            seen.add(id(t))
            order.append(t)
            stack.extend(t.parents)
        order.sort(key=lambda t: t._order, reverse=True)
        for t in order:
            t.grad = None
        self.grad = np.ones_like(self.value)
        for t in order:
            if t.grad is None or t._backward is None:
                continue
            t._backward(t.grad)


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _accumulate(t, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.value)
    t.grad += g


def _unbroadcast(g, shape):
    """Sum gradient g down to `shape` after numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


# -- primitives ---------------------------------------------------------


def add(a, b):
    out = Tensor(a.value + b.value, (a, b))

    def backward(g):
        _accumulate(a, _unbroadcast(g, a.value.shape))
        _accumulate(b, _unbroadcast(g, b.value.shape))

    out._backward = backward
    return out


def neg(a):
    out = Tensor(-a.value, (a,))
    out._backward = lambda g: _accumulate(a, -g)
    return out


def mul(a, b):
    out = Tensor(a.value * b.value, (a, b))

    def backward(g):
        _accumulate(a, _unbroadcast(g * b.value, a.value.shape))
        _accumulate(b, _unbroadcast(g * a.value, b.value.shape))

    out._backward = backward
    return out


def div(a, b):
    out = Tensor(a.value / b.value, (a, b))

    def backward(g):
        _accumulate(a, _unbroadcast(g / b.value, a.value.shape))
        _accumulate(b, _unbroadcast(-g * a.value / (b.value**2), b.value.shape))

    out._backward = backward
    return out


def matmul(a, b):
    out = Tensor(a.value @ b.value, (a, b))

    def backward(g):
        _accumulate(a, g @ b.value.T)
        _accumulate(b, a.value.T @ g)

    out._backward = backward
    return out


def spmm(adj: sp.csr_matrix, x: Tensor) -> Tensor:
    """Constant sparse matrix times dense tensor."""
    out = Tensor(adj @ x.value, (x,))
    adj_t = adj.T.tocsr()
    out._backward = lambda g: _accumulate(x, adj_t @ g)
    return out


def coo_spmm(values: Tensor, rows, cols, shape, x: Tensor) -> Tensor:
    """Sparse matmul where the entry values themselves carry gradient.

    out[i] = sum_k values[k] * x[cols[k]] over entries with rows[k] == i.
    """
    mat = sp.csr_matrix((values.value, (rows, cols)), shape=shape)
    out = Tensor(mat @ x.value, (values, x))
    mat_t = mat.T.tocsr()

    def backward(g):
        _accumulate(x, mat_t @ g)
        _accumulate(values, np.einsum("kd,kd->k", g[rows], x.value[cols]))

    out._backward = backward
    return out


def gather_rows(x: Tensor, idx) -> Tensor:
    idx = np.asarray(idx)
    out = Tensor(x.value[idx], (x,))

    def backward(g):
        gx = np.zeros_like(x.value)
        np.add.at(gx, idx, g)
        _accumulate(x, gx)

    out._backward = backward
    return out


def gather_nd(x: Tensor, rows, cols) -> Tensor:
    """Pick one entry per (row, col) pair; used for NLL of the true class."""
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    out = Tensor(x.value[rows, cols], (x,))

    def backward(g):
        gx = np.zeros_like(x.value)
        np.add.at(gx, (rows, cols), g)
        _accumulate(x, gx)

    out._backward = backward
    return out


def segment_sum(x: Tensor, segments, num_segments) -> Tensor:
    segments = np.asarray(segments)
    val = np.zeros((num_segments,) + x.value.shape[1:], dtype=np.float64)
    np.add.at(val, segments, x.value)
    out = Tensor(val, (x,))
    out._backward = lambda g: _accumulate(x, g[segments])
    return out


def concat(tensors, axis=1):
    out = Tensor(np.concatenate([t.value for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.value.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        for t, gi in zip(tensors, np.split(g, splits, axis=axis)):
            _accumulate(t, gi)

    out._backward = backward
    return out


def reshape(x: Tensor, shape) -> Tensor:
    out = Tensor(x.value.reshape(shape), (x,))
    out._backward = lambda g: _accumulate(x, g.reshape(x.value.shape))
    return out


def relu(x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.value, 0.0), (x,))
    out._backward = lambda g: _accumulate(x, g * (x.value > 0))
    return out


def leaky_relu(x: Tensor, slope=0.2) -> Tensor:
    out = Tensor(np.where(x.value > 0, x.value, slope * x.value), (x,))
    out._backward = lambda g: _accumulate(x, g * np.where(x.value > 0, 1.0, slope))
    return out


def elu(x: Tensor, alpha=1.0) -> Tensor:
    val = np.where(x.value > 0, x.value, alpha * np.expm1(x.value))
    out = Tensor(val, (x,))
    out._backward = lambda g: _accumulate(
        x, g * np.where(x.value > 0, 1.0, val + alpha)
    )
    return out


def sigmoid(x: Tensor) -> Tensor:
    val = 1.0 / (1.0 + np.exp(-x.value))
    out = Tensor(val, (x,))
    out._backward = lambda g: _accumulate(x, g * val * (1.0 - val))
    return out


def exp(x: Tensor) -> Tensor:
    val = np.exp(x.value)
    out = Tensor(val, (x,))
    out._backward = lambda g: _accumulate(x, g * val)
    return out


def log(x: Tensor) -> Tensor:
    out = Tensor(np.log(x.value), (x,))
    out._backward = lambda g: _accumulate(x, g / x.value)
    return out


def tsum(x: Tensor, axis=None, keepdims=False) -> Tensor:
    out = Tensor(x.value.sum(axis=axis, keepdims=keepdims), (x,))

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accumulate(x, np.broadcast_to(g, x.value.shape).copy())

    out._backward = backward
    return out


def tmean(x: Tensor) -> Tensor:
    out = Tensor(np.asarray(x.value.mean()), (x,))
    out._backward = lambda g: _accumulate(
        x, np.full_like(x.value, float(g) / x.value.size)
    )
    return out


def log_softmax_rows(x: Tensor) -> Tensor:
    m = x.value.max(axis=1, keepdims=True)
    shifted = x.value - m
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    out = Tensor(shifted - lse, (x,))

    def backward(g):
        softmax = np.exp(out.value)
        _accumulate(x, g - softmax * g.sum(axis=1, keepdims=True))

    out._backward = backward
    return out


def segment_softmax(scores: Tensor, segments, num_segments) -> Tensor:
    """Softmax of per-edge scores grouped by destination segment.

    Built from exp / segment_sum / gather so gradients fall out of the
    primitives. Max-subtraction uses detached values (constant shift).
    """
    segments = np.asarray(segments)
    seg_max = np.full(num_segments, -np.inf)
    np.maximum.at(seg_max, segments, scores.value)
    shifted = scores - Tensor(seg_max[segments])
    e = exp(shifted)
    denom = segment_sum(e, segments, num_segments)
    return div(e, gather_rows(denom, segments))
