"""Full-graph training with validation-accuracy early stopping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .dataset import GraphDataset
from .errors import ComputeError, GnnScopeError, ValidationError
from .models import (InferenceResult, ModelConfig, ModelParams, forward,
                     gat_graph, gcn_graph, init_params)
from .numerics import OptimizerState, adam_step, build_normalized_adjacency


@dataclass(frozen=True)
class TrainConfig:
    epochs_max: int = 300
    lr: float = 0.005
    weight_decay: float = 5e-4
    patience: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ValidationError("lr must be positive", code="invalid-input")
        if self.patience > self.epochs_max:
            raise ValidationError("patience exceeds epochs_max",
                                  code="invalid-input")


@dataclass
class TrainReport:
    epochs_run: int = 0
    train_loss: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_accuracy: float = 0.0
    test_accuracy: float = 0.0

    def to_dict(self):
        return {
            "epochs_run": self.epochs_run,
            "train_loss": [float(x) for x in self.train_loss],
            "val_accuracy": [float(x) for x in self.val_accuracy],
            "best_epoch": self.best_epoch,
            "best_val_accuracy": float(self.best_val_accuracy),
            "test_accuracy": float(self.test_accuracy),
        }


class Cancelled(GnnScopeError):
    code = "cancelled"


def _epoch_seed(base, epoch):
    # distinct, reproducible dropout stream per epoch
    return (base * 1_000_003 + epoch * 131) % (2**63)


def train_model(ds: GraphDataset, config: ModelConfig, tcfg: TrainConfig,
                progress=None, should_cancel=None):
    """Adam + NLL on train-mask nodes; returns best-validation weights.

    `progress(epoch, epochs_max)` is called per epoch; `should_cancel()`
    returning True aborts with Cancelled.
    """
    train_idx = np.flatnonzero(ds.train_mask)
    if train_idx.size == 0:
        raise ValidationError("train mask is empty", code="empty-train-mask")
    order = config.param_order
    p64 = {k: v.astype(np.float64)
           for k, v in init_params(config).arrays.items()}
    state = OptimizerState.init([p64[k] for k in order], lr=tcfg.lr,
                                weight_decay=tcfg.weight_decay)
    norm_adj = build_normalized_adjacency(ds.edges, ds.num_nodes) \
        if config.arch == "gcn" else None
    labels = ds.labels[train_idx]

    report = TrainReport()
    best_params = None

    for epoch in range(1, tcfg.epochs_max + 1):
        if should_cancel is not None and should_cancel():
            raise Cancelled("training cancelled")
        pt = {k: Tensor(p64[k], requires_grad=True) for k in order}
        dseed = _epoch_seed(tcfg.seed, epoch)
        if config.arch == "gcn":
            log_probs, _ = gcn_graph(pt, ds.features, norm_adj, config,
                                     mode="train", seed=dseed)
        else:
            log_probs, _, _ = gat_graph(pt, ds.features, ds.edges,
                                        ds.num_nodes, config, mode="train",
                                        seed=dseed)
        loss = -ad.tmean(ad.gather_nd(log_probs, train_idx, labels))
        if not np.isfinite(loss.value):
            raise ComputeError(
                f"non-finite training loss at epoch {epoch}: {loss.value}",
                code="divergence")
        loss.backward()
        updated, state = adam_step([p64[k] for k in order],
                                   [pt[k].grad for k in order], state)
        p64 = dict(zip(order, updated))

        snapshot = ModelParams({k: p64[k].astype(np.float32) for k in order})
        val_acc = evaluate(snapshot, config, ds, "val")
        report.train_loss.append(float(loss.value))
        report.val_accuracy.append(float(val_acc))
        report.epochs_run = epoch
        if val_acc > report.best_val_accuracy or best_params is None:
            report.best_val_accuracy = val_acc
            report.best_epoch = epoch
            best_params = snapshot
        if progress is not None:
            progress(epoch, tcfg.epochs_max)
        if epoch - report.best_epoch >= tcfg.patience:
            break

    report.test_accuracy = evaluate(best_params, config, ds, "test") \
        if ds.test_mask.any() else 0.0
    return best_params, report


def evaluate(params: ModelParams, config: ModelConfig, ds: GraphDataset,
             mask) -> float:
    """Eval-mode accuracy over a named split or an explicit boolean mask."""
    if isinstance(mask, str):
        mask = {"train": ds.train_mask, "val": ds.val_mask,
                "test": ds.test_mask}[mask]
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValidationError("evaluation mask is empty", code="empty-mask")
    result = forward(params, ds.features, ds.edges, ds.num_nodes, config)
    return float((result.predicted[idx] == ds.labels[idx]).mean())


def infer(params: ModelParams, config: ModelConfig, features, edges,
          num_nodes) -> InferenceResult:
    """Eval-mode inference on an arbitrary working graph."""
    return forward(params, features, edges, num_nodes, config)
