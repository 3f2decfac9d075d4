"""Full-batch training loop."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import TrainingError
from . import model as M
from .metrics import evaluate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    seed: int = 7
    patience: int | None = None
    optimizer: str = "gd"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.optimizer not in ("gd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_macro_f1: float


@dataclass
class TrainResult:
    params: dict
    history: list[EpochRecord]
    best_epoch: int
    initial_loss: float
    final_loss: float
    param_count: int = 0
    extra: dict = field(default_factory=dict)

    def log_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_macro_f1"])
        for r in self.history:
            w.writerow([r.epoch, format(r.train_loss, ".17g"), format(r.val_macro_f1, ".17g")])
        return buf.getvalue()


class _Adam:
    def __init__(self, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m, self.v, self.t = {}, {}, 0

    def step(self, params, grads):
        self.t += 1
        for k, g in grads.items():
            m = self.m[k] = self.b1 * self.m.get(k, 0.0) + (1 - self.b1) * g
            v = self.v[k] = self.b2 * self.v.get(k, 0.0) + (1 - self.b2) * g * g
            mh = m / (1 - self.b1 ** self.t)
            vh = v / (1 - self.b2 ** self.t)
            params[k] = params[k] - self.lr * mh / (np.sqrt(vh) + self.eps)


class _GD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for k, g in grads.items():
            params[k] = params[k] - self.lr * g


def train(config: M.ModelConfig, train_config: TrainConfig, x, graph, labels, splits,
          params: dict | None = None) -> TrainResult:
    """Full-batch training with L2 weight decay; keeps the best-validation-F1 params.

    ``splits`` is a ``(train, val, test)`` triple of index arrays. Ties in
    validation F1 resolve to the later epoch.
    """
    train_idx, val_idx = np.asarray(splits[0]), np.asarray(splits[1])
    if train_idx.size == 0:
        raise ValueError("empty training split")
    labels = np.asarray(labels, dtype=np.int64)
    x = np.asarray(x, dtype=np.float64)
    g = M.GraphInput(graph, x.shape[0])
    params = {k: v.copy() for k, v in (params or M.init_params(config, train_config.seed)).items()}
    rng = np.random.default_rng(train_config.seed + 1) if config.dropout_rate > 0 else None
    opt = (_Adam(train_config.learning_rate) if train_config.optimizer == "adam"
           else _GD(train_config.learning_rate))
    wd = train_config.weight_decay
    eval_idx = val_idx if val_idx.size else train_idx

    history: list[EpochRecord] = []
    best = (-1.0, 0, params)
    stale = 0
    for epoch in range(train_config.epochs):
        loss, grads = M.loss_and_grads(config, params, x, g, labels, train_idx, rng)
        if not math.isfinite(loss):
            raise TrainingError(epoch, f"non-finite training loss {loss}")
        pred = M.model_forward(config, params, x, g)[1].argmax(axis=1)
        f1 = evaluate(pred[eval_idx], labels[eval_idx]).macro_f1
        history.append(EpochRecord(epoch, loss, f1))
        if f1 >= best[0]:
            stale = 0 if f1 > best[0] else stale + 1
            best = (f1, epoch, {k: v.copy() for k, v in params.items()})
        else:
            stale += 1
        if train_config.patience and stale >= train_config.patience:
            log.info("early stop at epoch %d", epoch)
            break
        if wd:
            grads = {k: gr + wd * params[k] for k, gr in grads.items()}
        opt.step(params, grads)

    best_params = best[2]
    final_loss = M.cross_entropy(M.model_forward(config, best_params, x, g)[1], labels, train_idx)
    n_params = M.param_count(config)
    log.info("trained %d parameters; best epoch %d, val macro F1 %.4f", n_params, best[1], best[0])
    return TrainResult(best_params, history, best[1], history[0].train_loss, final_loss, n_params)
