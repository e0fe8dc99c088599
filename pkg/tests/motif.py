"""Planted-motif synthetic: each star's center is labeled positive exactly
when one leaf carries a hot signal feature, so the ground-truth explanation
(the center-to-signal-leaf edge and the signal feature) is known by
construction.  Every leaf carries a small negative distractor value on the
signal feature so that ordinary neighbor messages actively oppose the
positive class and only the planted leaf supports it."""

import numpy as np

from gnnscope import (ExplainConfig, ModelConfig, TrainConfig, build_dataset,
                      forward, train_model)

SIGNAL_FEATURE = 0

# Known-good optimization settings for the motif oracle: a stronger edge-size
# penalty than the default keeps the non-signal mask logits from drifting up
# uniformly, and 200 epochs gives the signal edge time to separate cleanly.
MOTIF_EXPLAIN_KWARGS = dict(epochs=200, edge_size_coeff=0.2)


def planted_motif_dataset(num_stars=80, leaves=4, num_features=10, seed=0,
                          noise=0.15, signal=1.0, distract=-0.3):
    """Returns (dataset, planted) where planted maps each positive center to
    its signal leaf."""
    rng = np.random.default_rng(seed)
    n = num_stars * (leaves + 1)
    feats = rng.normal(0, noise, size=(n, num_features)).astype(np.float32)
    edges = []
    labels = np.zeros(n, dtype=np.int64)
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    planted = {}
    for s in range(num_stars):
        center = s * (leaves + 1)
        leaf_ids = [center + 1 + k for k in range(leaves)]
        for leaf in leaf_ids:
            edges.append((center, leaf))
            feats[leaf, SIGNAL_FEATURE] += distract
        if s % 2 == 0:
            sig = leaf_ids[int(rng.integers(leaves))]
            feats[sig, SIGNAL_FEATURE] += signal - distract
            labels[center] = 1
            planted[center] = sig
        if s < num_stars * 3 // 4:
            train[center] = True
        else:
            val[center] = True
    ds = build_dataset(
        name="planted-motif", features=feats, edges=edges, labels=labels,
        train_mask=train, val_mask=val, test_mask=np.zeros(n, bool),
        class_names=["plain", "signal"])
    return ds, planted


def train_motif_gcn(ds, seed=0):
    """Trains without early stopping (patience == epochs_max) and with light
    dropout/decay: stopping at the first validation peak returns a barely
    fitted model whose saturating loss starves the explainer of gradient."""
    config = ModelConfig("gcn", in_dim=ds.num_features, hidden_dim=8,
                         num_classes=2, dropout_rate=0.2, seed=seed)
    params, report = train_model(
        ds, config, TrainConfig(seed=seed, epochs_max=300, patience=300,
                                weight_decay=1e-4))
    return params, config, report


def pick_explainable_center(ds, planted, params, config, target=0.8):
    """Among correctly predicted positive centers, the one whose confidence
    is closest to `target`.  Near-saturated predictions (P ~ 1) leave the
    explainer's prediction-loss term with almost no gradient."""
    result = forward(params, ds.features, ds.edges, ds.num_nodes, config)
    best, best_gap = None, np.inf
    for center in sorted(planted):
        if result.predicted[center] != 1:
            continue
        p = float(np.exp(result.log_probs[center, 1]))
        if abs(p - target) < best_gap:
            best, best_gap = center, abs(p - target)
    return best


def motif_explain_config(seed):
    return ExplainConfig(seed=seed, **MOTIF_EXPLAIN_KWARGS)
