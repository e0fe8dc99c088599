"""Shared synthetic data for the demo scripts: a three-community graph
with noisy class-informative features, split per class."""

import numpy as np

from gnnscope import SplitSpec, build_dataset, make_random_split


def community_dataset(per_class=40, num_classes=3, num_features=12,
                      p_in=0.15, p_out=0.01, seed=0):
    rng = np.random.default_rng(seed)
    n = per_class * num_classes
    labels = np.repeat(np.arange(num_classes), per_class)
    means = np.zeros((num_classes, num_features))
    for c in range(num_classes):
        means[c, c * 2:c * 2 + 2] = 1.0
    feats = means[labels] + rng.normal(0, 0.6, size=(n, num_features))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < (p_in if labels[i] == labels[j] else p_out)]
    ds = build_dataset(
        name="communities", features=feats.astype(np.float32), edges=edges,
        labels=labels, train_mask=np.zeros(n, bool),
        val_mask=np.zeros(n, bool), test_mask=np.zeros(n, bool),
        class_names=[f"community-{c}" for c in range(num_classes)])
    return make_random_split(ds, SplitSpec(train_per_class=10, val_size=30,
                                           test_size=40, seed=seed))
