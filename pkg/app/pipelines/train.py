"""
Classifier pipeline: split the records, fit DT1 (all predictors), DT2 (no
test results) and 1-NN (age, hour), and score them on the held-out part.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

from ..core.rng import StreamFamily
from ..models.schemas import KnnParams, PatientRecord, TreeParams
from ..services.features import DT1_FEATURES, DT2_FEATURES
from ..services.knn import KnnModel
from ..services.metrics import Evaluation, evaluate, format_metric
from ..services.population import split_train_test
from ..services.rules import RuleSet
from ..services.storage_csv import write_rows
from ..services.tree import DecisionTree, extract_rules, train_tree

logger = logging.getLogger(__name__)

METRICS_FIELDS = ["model", "tp", "fp", "tn", "fn", "accuracy", "specificity", "sensitivity"]


@dataclass(frozen=True)
class TrainingReport:
    dt1: DecisionTree
    dt2: DecisionTree
    knn: KnnModel
    evaluations: Dict[str, Evaluation]
    n_train: int
    n_test: int

    @property
    def dt2_rules(self) -> RuleSet:
        return extract_rules(self.dt2)

    def rows(self) -> List[Dict[str, object]]:
        return [ev.as_row(name) for name, ev in self.evaluations.items()]

    def table(self) -> str:
        lines = [
            f"train {self.n_train} / test {self.n_test}",
            f"{'Model':<6}{'Accuracy':>10}{'Specificity':>13}{'Sensitivity':>13}   TP  FP  TN  FN",
        ]
        for name, ev in self.evaluations.items():
            cm = ev.confusion
            lines.append(
                f"{name:<6}{ev.accuracy:>10.2f}{format_metric(ev.specificity):>13}{format_metric(ev.sensitivity):>13}"
                f"  {cm.tp:>3} {cm.fp:>3} {cm.tn:>3} {cm.fn:>3}"
            )
        return "\n".join(lines) + "\n"


def train_models(
    records: Sequence[PatientRecord],
    seed: int,
    train_fraction: float = 0.7,
    tree_params: TreeParams | None = None,
    knn_params: KnnParams | None = None,
) -> TrainingReport:
    train, test = split_train_test(records, train_fraction, StreamFamily(seed, 0).stream("split"))
    dt1 = train_tree(train, DT1_FEATURES, tree_params, name="DT1")
    dt2 = train_tree(train, DT2_FEATURES, tree_params, name="DT2")
    knn = KnnModel.fit(train, knn_params)
    labels = [r.admitted for r in test]
    evaluations = {
        "DT1": evaluate(dt1.predict_many(test), labels),
        "DT2": evaluate(dt2.predict_many(test), labels),
        "kNN": evaluate(knn.predict_many(test), labels),
    }
    for name, ev in evaluations.items():
        logger.info("%s: accuracy %.3f specificity %s sensitivity %s", name, ev.accuracy,
                    format_metric(ev.specificity, 3), format_metric(ev.sensitivity, 3))
    return TrainingReport(dt1=dt1, dt2=dt2, knn=knn, evaluations=evaluations, n_train=len(train), n_test=len(test))


def _metric_cell(value: object) -> object:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_training_artifacts(report: TrainingReport, out_dir: str | Path) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for key, tree in (("dt1", report.dt1), ("dt2", report.dt2)):
        path = out_dir / f"tree_{key}.txt"
        path.write_text(tree.render() + "\n" + extract_rules(tree).render(), encoding="utf-8")
        paths.append(path)
    rows = [{k: _metric_cell(v) for k, v in row.items()} for row in report.rows()]
    paths.append(write_rows(out_dir / "metrics.csv", rows, METRICS_FIELDS))
    return paths
