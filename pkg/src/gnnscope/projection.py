"""2D projections of node embeddings: exact PCA and exact O(n^2) t-SNE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .training import Cancelled


@dataclass
class ProjectionResult:
    method: str
    coords: np.ndarray           # (n, 2)
    diagnostics: dict

    def to_dict(self):
        return {
            "method": self.method,
            "coords": [[float(a), float(b)] for a, b in self.coords],
            "diagnostics": {
                k: (float(v) if np.isscalar(v) else
                    [list(map(float, row)) if hasattr(row, "__len__") else
                     float(row) for row in v])
                for k, v in self.diagnostics.items()},
        }


def pca_project(embeddings) -> ProjectionResult:
    """Top-2 principal components of mean-centered embeddings.

    Sign convention: within each component, the largest-magnitude loading is
    positive.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValidationError("PCA needs at least a 2x2 embedding matrix",
                              code="degenerate-input")
    centered = x - x.mean(axis=0)
    if np.unique(centered, axis=0).shape[0] < 2:
        raise ValidationError("fewer than 2 distinct embedding rows",
                              code="degenerate-input")
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    for comp in range(2):
        pivot = np.argmax(np.abs(vt[comp]))
        if vt[comp, pivot] < 0:
            vt[comp] = -vt[comp]
            u[:, comp] = -u[:, comp]
    coords = u[:, :2] * s[:2]
    var = s**2
    ratios = var[:2] / var.sum() if var.sum() > 0 else np.zeros(2)
    return ProjectionResult("pca", coords,
                            {"explained_variance_ratio": ratios.tolist(),
                             "components": vt[:2].tolist()})


def _conditional_affinities(sq_dists, perplexity, tol=1e-5, max_steps=50):
    """Per-point precision by bisection so each conditional distribution hits
    entropy log(perplexity)."""
    n = sq_dists.shape[0]
    target = np.log(perplexity)
    P = np.zeros_like(sq_dists)
    for i in range(n):
        d = np.delete(sq_dists[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(max_steps):
            p = np.exp(-d * beta)
            total = p.sum()
            if total <= 0:
                entropy = 0.0
            else:
                p = p / total
                entropy = -np.sum(p * np.log(np.maximum(p, 1e-300)))
            diff = entropy - target
            if abs(diff) <= tol:
                break
            if diff > 0:        # too flat: raise precision
                lo = beta
                beta = beta * 2 if np.isinf(hi) else (beta + hi) / 2
            else:
                hi = beta
                beta = beta / 2 if lo == 0 else (beta + lo) / 2
        row = np.exp(-sq_dists[i] * beta)
        row[i] = 0.0
        P[i] = row / max(row.sum(), 1e-300)
    return P


def _squared_distances(x):
    sq = (x * x).sum(axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    return d


def tsne_project(embeddings, perplexity=30.0, iters=1000, seed=0,
                 learning_rate=200.0, early_exaggeration=12.0,
                 exaggeration_iters=250, progress=None,
                 should_cancel=None) -> ProjectionResult:
    """Exact t-SNE with PCA initialization (scaled to std 1e-4), momentum
    0.5 then 0.8 after the early-exaggeration phase."""
    x = np.asarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    if perplexity >= (n - 1) / 3:
        raise ValidationError(
            f"perplexity {perplexity} too large for {n} points",
            code="perplexity-too-large")
    cond = _conditional_affinities(_squared_distances(x), perplexity)
    P = (cond + cond.T) / (2.0 * n)
    np.maximum(P, 1e-12, out=P)

    try:
        y = pca_project(x).coords
        y = y / max(y.std(), 1e-300) * 1e-4
    except ValidationError:
        rng = np.random.Generator(np.random.PCG64(seed))
        y = rng.normal(0.0, 1e-4, size=(n, 2))
    velocity = np.zeros_like(y)
    trace = []

    for it in range(1, iters + 1):
        if should_cancel is not None and should_cancel():
            raise Cancelled("t-SNE cancelled")
        exaggerating = it <= exaggeration_iters
        momentum = 0.5 if exaggerating else 0.8
        p_eff = P * early_exaggeration if exaggerating else P

        num = 1.0 / (1.0 + _squared_distances(y))
        np.fill_diagonal(num, 0.0)
        Q = num / num.sum()
        np.maximum(Q, 1e-12, out=Q)

        pq = (p_eff - Q) * num
        grad = 4.0 * (np.diag(pq.sum(axis=1)) @ y - pq @ y)
        velocity = momentum * velocity - learning_rate * grad
        y = y + velocity
        y = y - y.mean(axis=0)

        if it % 10 == 0 or it == iters or it == exaggeration_iters:
            kl = float(np.sum(P * np.log(P / Q)))
            trace.append((it, kl))
        if progress is not None:
            progress(it, iters)

    return ProjectionResult("tsne", y, {"kl_divergence": trace[-1][1],
                                        "kl_trace": trace})
