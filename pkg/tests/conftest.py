import os
from pathlib import Path

import numpy as np
import pytest

from gnnscope import (ModelConfig, SplitSpec, TrainConfig, build_dataset,
                      make_random_split, train_model)

# Real citation containers are produced by `gnnscope convert` from the public
# Planetoid distributions (see README); tests that need them skip otherwise.
DATA_DIR = Path(os.environ.get("GNNSCOPE_DATA_DIR",
                               Path(__file__).resolve().parent.parent / "data"))


def dataset_path(name):
    return DATA_DIR / f"{name}.gnnds"


def require_dataset(name):
    path = dataset_path(name)
    if not path.exists():
        pytest.skip(f"{name} container not available at {path}; build it "
                    f"with `gnnscope convert` from the public distribution")
    from gnnscope import load_dataset
    return load_dataset(path)


def two_node_dataset():
    return build_dataset(
        name="pair",
        features=np.array([[1.0], [0.0]], dtype=np.float32),
        edges=[(0, 1)],
        labels=[0, 1],
        train_mask=[True, True],
        val_mask=[False, False],
        test_mask=[False, False],
        class_names=["left", "right"],
    )


def separable_dataset():
    """8 nodes, 2 classes, features linearly separable; homophilous edges."""
    feats = np.zeros((8, 2), dtype=np.float32)
    feats[:4, 0] = 1.0
    feats[4:, 1] = 1.0
    labels = [0, 0, 0, 0, 1, 1, 1, 1]
    train = [True, False, True, False, True, False, True, False]
    val = [not t for t in train]
    return build_dataset(
        name="separable", features=feats, edges=[(0, 1), (2, 3), (4, 5), (6, 7)],
        labels=labels, train_mask=train, val_mask=val,
        test_mask=[False] * 8, class_names=["a", "b"])


def sbm_dataset(per_class=40, num_classes=3, num_features=12, p_in=0.15,
                p_out=0.01, seed=0, name="sbm"):
    """Stochastic block model with class-informative noisy features."""
    rng = np.random.default_rng(seed)
    n = per_class * num_classes
    labels = np.repeat(np.arange(num_classes), per_class)
    means = np.zeros((num_classes, num_features))
    for c in range(num_classes):
        means[c, c * 2:(c * 2) + 2] = 1.0
    feats = means[labels] + rng.normal(0, 0.6, size=(n, num_features))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if labels[i] == labels[j] else p_out
            if rng.random() < p:
                edges.append((i, j))
    ds = build_dataset(
        name=name, features=feats.astype(np.float32), edges=edges,
        labels=labels, train_mask=np.zeros(n, bool),
        val_mask=np.zeros(n, bool), test_mask=np.zeros(n, bool),
        class_names=[f"c{c}" for c in range(num_classes)])
    return make_random_split(ds, SplitSpec(train_per_class=10, val_size=30,
                                           test_size=40, seed=seed))


@pytest.fixture(scope="session")
def sbm():
    return sbm_dataset()


@pytest.fixture(scope="session")
def sbm_gcn(sbm):
    config = ModelConfig("gcn", in_dim=sbm.num_features, hidden_dim=8,
                         num_classes=sbm.num_classes, seed=1)
    params, report = train_model(sbm, config, TrainConfig(seed=1))
    return params, config, report


@pytest.fixture(scope="session")
def sbm_gat(sbm):
    config = ModelConfig("gat", in_dim=sbm.num_features, hidden_dim=4,
                         num_classes=sbm.num_classes, heads_layer1=4,
                         dropout_rate=0.2, seed=1)
    params, report = train_model(
        sbm, config, TrainConfig(seed=1, epochs_max=200, patience=30))
    return params, config, report
