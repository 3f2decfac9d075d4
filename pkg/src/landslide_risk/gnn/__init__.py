"""Spatial graph neural network: layers, model, training and metrics."""
from .layers import gat_forward, gcn_forward, normalized_adjacency
from .metrics import Metrics, evaluate
from .model import (ModelConfig, forward, init_params, load_checkpoint, loss_and_grads,
                    model_forward, param_count, predict, save_checkpoint)
from .train import TrainConfig, TrainResult, train

__all__ = [
    "Metrics", "ModelConfig", "TrainConfig", "TrainResult", "evaluate", "forward",
    "gat_forward", "gcn_forward", "init_params", "load_checkpoint", "loss_and_grads",
    "model_forward", "normalized_adjacency", "param_count", "predict", "save_checkpoint",
    "train",
]
