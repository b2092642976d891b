"""
Confusion-matrix metrics for binary admission predictions.

  accuracy    = (TP + TN) / (TP + TN + FP + FN)
  sensitivity = TP / (TP + FN)
  specificity = TN / (TN + FP)

Sensitivity and specificity are None when their denominator is zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Sequence

from app.core.errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def sensitivity(self) -> Optional[float]:
        return self.tp / self.positives if self.positives else None

    def specificity(self) -> Optional[float]:
        return self.tn / self.negatives if self.negatives else None


class Evaluation(NamedTuple):
    confusion: ConfusionMatrix
    accuracy: float
    sensitivity: Optional[float]
    specificity: Optional[float]

    def as_row(self, model: str) -> Dict[str, object]:
        cm = self.confusion
        return {
            "model": model,
            "tp": cm.tp,
            "fp": cm.fp,
            "tn": cm.tn,
            "fn": cm.fn,
            "accuracy": self.accuracy,
            "specificity": self.specificity,
            "sensitivity": self.sensitivity,
        }


def confusion(predictions: Sequence[bool], labels: Sequence[bool]) -> ConfusionMatrix:
    if len(predictions) != len(labels):
        raise DataError(f"{len(predictions)} predictions for {len(labels)} labels")
    tp = fp = tn = fn = 0
    for p, y in zip(predictions, labels):
        if p and y:
            tp += 1
        elif p:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def evaluate(predictions: Sequence[bool], labels: Sequence[bool]) -> Evaluation:
    if not labels and not predictions:
        raise DataError("cannot evaluate an empty prediction set")
    cm = confusion(predictions, labels)
    result = Evaluation(cm, cm.accuracy(), cm.sensitivity(), cm.specificity())
    if result.sensitivity is None:
        logger.warning("sensitivity undefined: no positive labels among %d records", cm.total)
    if result.specificity is None:
        logger.warning("specificity undefined: no negative labels among %d records", cm.total)
    return result


def format_metric(value: Optional[float], digits: int = 2) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"
