"""Multiclass precision / recall / F1 with macro averaging."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CLASS_NAMES = ("Low", "Medium", "High")


@dataclass(frozen=True)
class Metrics:
    macro_f1: float
    macro_precision: float
    macro_recall: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    confusion: np.ndarray = field(compare=False)  # rows: truth, cols: prediction
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "macro_f1": self.macro_f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "confusion": self.confusion.tolist(),
            "diagnostics": list(self.diagnostics),
        }


def confusion_matrix(predictions, labels, n_classes=3) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(labels, dtype=np.int64), np.asarray(predictions, dtype=np.int64)), 1)
    return cm


def evaluate(predictions, labels, n_classes: int = 3) -> Metrics:
    """Per-class and macro metrics.

    Undefined ratios (no predictions / no true members of a class) count as 0
    and are reported in ``diagnostics``.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.shape != labels.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {labels.shape}")
    cm = confusion_matrix(predictions, labels, n_classes)
    tp = np.diag(cm).astype(np.float64)
    n_pred = cm.sum(axis=0)
    n_true = cm.sum(axis=1)
    diagnostics = []
    precision, recall, f1 = [], [], []
    for c in range(n_classes):
        name = CLASS_NAMES[c] if c < len(CLASS_NAMES) else str(c)
        if n_true[c] == 0 and n_pred[c] == 0:
            diagnostics.append(f"class {name} absent from predictions and labels; scored 0")
        elif n_pred[c] == 0:
            diagnostics.append(f"class {name} never predicted; precision set to 0")
        elif n_true[c] == 0:
            diagnostics.append(f"class {name} absent from labels; recall set to 0")
        p = tp[c] / n_pred[c] if n_pred[c] else 0.0
        r = tp[c] / n_true[c] if n_true[c] else 0.0
        precision.append(float(p))
        recall.append(float(r))
        f1.append(float(2 * p * r / (p + r)) if p + r > 0 else 0.0)
    return Metrics(
        macro_f1=float(np.mean(f1)),
        macro_precision=float(np.mean(precision)),
        macro_recall=float(np.mean(recall)),
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        confusion=cm,
        diagnostics=tuple(diagnostics),
    )
