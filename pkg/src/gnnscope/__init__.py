"""Workbench for explaining GNN node-classification predictions: GCN/GAT
training and inference, mask-based and attention explanations, 2D embedding
projections, and interactive what-if graph editing."""

from .dataset import (GraphDataset, SplitSpec, build_dataset, export_dataset,
                      load_dataset, make_random_split)
from .explain import (AttentionSummary, ExplainConfig, Explanation,
                      extract_attention, extract_computation_subgraph,
                      run_gnn_explainer, top_k_summary)
from .models import (InferenceResult, ModelConfig, ModelParams, forward,
                     init_params, load_weights, save_weights)
from .projection import ProjectionResult, pca_project, tsne_project
from .session import EditOp, NeighborSummary, Session
from .training import TrainConfig, TrainReport, evaluate, infer, train_model

__all__ = [
    "GraphDataset", "SplitSpec", "build_dataset", "export_dataset",
    "load_dataset", "make_random_split",
    "AttentionSummary", "ExplainConfig", "Explanation", "extract_attention",
    "extract_computation_subgraph", "run_gnn_explainer", "top_k_summary",
    "InferenceResult", "ModelConfig", "ModelParams", "forward",
    "init_params", "load_weights", "save_weights",
    "ProjectionResult", "pca_project", "tsne_project",
    "EditOp", "NeighborSummary", "Session",
    "TrainConfig", "TrainReport", "evaluate", "infer", "train_model",
]

__version__ = "0.1.0"
