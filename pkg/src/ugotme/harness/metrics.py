"""Evaluation: confusion matrix, weighted F1, per-dialogue response accuracy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..emotions import EMOTION_NAMES, NUM_EMOTIONS
from ..errors import EvalError


def confusion_matrix(preds, golds) -> np.ndarray:
    """7x7 counts; rows = gold class, columns = predicted class."""
    if len(preds) != len(golds):
        raise EvalError(f"length mismatch: {len(preds)} preds vs {len(golds)} golds")
    mat = np.zeros((NUM_EMOTIONS, NUM_EMOTIONS), dtype=np.int64)
    for p, g in zip(preds, golds):
        p, g = int(p), int(g)
        if not (0 <= p < NUM_EMOTIONS and 0 <= g < NUM_EMOTIONS):
            raise EvalError(f"label outside 0..6: pred={p} gold={g}")
        mat[g, p] += 1
    return mat


def per_class_f1(mat: np.ndarray) -> np.ndarray:
    f1 = np.zeros(NUM_EMOTIONS)
    for c in range(NUM_EMOTIONS):
        tp = mat[c, c]
        fp = mat[:, c].sum() - tp
        fn = mat[c, :].sum() - tp
        if tp == 0:
            f1[c] = 0.0
        else:
            precision = tp / (tp + fp)
            recall = tp / (tp + fn)
            f1[c] = 2 * precision * recall / (precision + recall)
    return f1


def weighted_f1(preds, golds) -> float:
    """Per-class F1 weighted by gold support; zero-support classes excluded."""
    mat = confusion_matrix(preds, golds)
    supports = mat.sum(axis=1)
    f1 = per_class_f1(mat)
    total = supports.sum()
    if total == 0:
        raise EvalError("no samples")
    return float((f1 * supports).sum() / total)


def accuracy(preds, golds) -> float:
    if len(preds) != len(golds):
        raise EvalError("length mismatch")
    if not preds:
        raise EvalError("no samples")
    return sum(int(p) == int(g) for p, g in zip(preds, golds)) / len(preds)


def response_accuracy(per_dialogue) -> float:
    """Accuracy within each dialogue first, then averaged across dialogues."""
    if not per_dialogue:
        raise EvalError("no dialogues")
    return float(np.mean([accuracy(p, g) for p, g in per_dialogue]))


@dataclass
class EvalReport:
    weighted_f1: float
    per_class_f1: list[float]
    response_accuracy: float
    per_dialogue_accuracy: list[float]
    confusion: list[list[int]]
    accuracy: float

    @classmethod
    def from_dialogues(cls, per_dialogue) -> "EvalReport":
        preds = [p for ps, _ in per_dialogue for p in ps]
        golds = [g for _, gs in per_dialogue for g in gs]
        mat = confusion_matrix(preds, golds)
        return cls(
            weighted_f1=weighted_f1(preds, golds),
            per_class_f1=[float(x) for x in per_class_f1(mat)],
            response_accuracy=response_accuracy(per_dialogue),
            per_dialogue_accuracy=[accuracy(p, g) for p, g in per_dialogue],
            confusion=mat.tolist(),
            accuracy=accuracy(preds, golds),
        )

    def to_json(self) -> str:
        return json.dumps({
            "weighted_f1": self.weighted_f1,
            "per_class_f1": dict(zip(EMOTION_NAMES, self.per_class_f1)),
            "response_accuracy": self.response_accuracy,
            "per_dialogue_accuracy": self.per_dialogue_accuracy,
            "accuracy": self.accuracy,
            "confusion": self.confusion,
        }, indent=1)

    def format_table(self) -> str:
        """Aligned per-class F1 table plus the weighted aggregate."""
        width = max(len(n) for n in EMOTION_NAMES) + 2
        header = "".join(n.capitalize().ljust(width) for n in EMOTION_NAMES) + "F1"
        row = "".join(f"{100 * v:.2f}".ljust(width) for v in self.per_class_f1)
        row += f"{100 * self.weighted_f1:.2f}"
        return header + "\n" + row
