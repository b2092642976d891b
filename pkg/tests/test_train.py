import csv

import pytest

from app.pipelines.datagen import generate_dataset
from app.pipelines.train import METRICS_FIELDS, train_models, write_training_artifacts
from app.services.metrics import evaluate


@pytest.fixture(scope="module")
def report():
    return train_models(generate_dataset(400, seed=5), seed=5)


def test_split_and_models(report):
    assert (report.n_train, report.n_test) == (280, 120)
    assert [row["model"] for row in report.rows()] == ["DT1", "DT2", "kNN"]
    assert "xray" not in report.dt2.features and "lab" not in report.dt2.features
    assert report.dt1.features[-2:] == ("xray", "lab")


def test_metrics_are_consistent(report):
    for ev in report.evaluations.values():
        cm = ev.confusion
        assert cm.total == report.n_test
        assert ev.accuracy == pytest.approx((cm.tp + cm.tn) / cm.total)


def test_training_is_deterministic(report):
    again = train_models(generate_dataset(400, seed=5), seed=5)
    assert again.rows() == report.rows()
    assert again.dt2.render() == report.dt2.render()


def test_dt2_rules_reproduce_dt2(report):
    records = generate_dataset(400, seed=5)
    rules = report.dt2_rules
    assert [rules.predict(r) for r in records] == report.dt2.predict_many(records)
    assert evaluate(report.dt2.predict_many(records), [r.admitted for r in records]).accuracy > 0.5


def test_table_and_artifacts(report, tmp_path):
    table = report.table().splitlines()
    assert table[0] == "train 280 / test 120"
    assert table[1].split()[:4] == ["Model", "Accuracy", "Specificity", "Sensitivity"]
    assert [line.split()[0] for line in table[2:]] == ["DT1", "DT2", "kNN"]

    paths = write_training_artifacts(report, tmp_path)
    assert sorted(p.name for p in paths) == ["metrics.csv", "tree_dt1.txt", "tree_dt2.txt"]
    with (tmp_path / "metrics.csv").open(newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == METRICS_FIELDS
    assert [r["model"] for r in rows] == ["DT1", "DT2", "kNN"]
    assert "admit if ANY rule matches" in (tmp_path / "tree_dt2.txt").read_text()
