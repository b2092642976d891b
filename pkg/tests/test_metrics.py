import logging
from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import DataError
from app.services.metrics import ConfusionMatrix, confusion, evaluate, format_metric


def _expand(tp, fp, tn, fn):
    predictions = [True] * tp + [True] * fp + [False] * tn + [False] * fn
    labels = [True] * tp + [False] * fp + [False] * tn + [True] * fn
    return predictions, labels


def test_all_correct():
    ev = evaluate([True, False, True], [True, False, True])
    assert (ev.accuracy, ev.sensitivity, ev.specificity) == (1.0, 1.0, 1.0)


def test_direct_substitution():
    ev = evaluate(*_expand(tp=1, fp=1, tn=2, fn=1))
    assert ev.confusion == ConfusionMatrix(tp=1, fp=1, tn=2, fn=1)
    assert ev.accuracy == pytest.approx(0.6)
    assert ev.sensitivity == pytest.approx(0.5)
    assert ev.specificity == pytest.approx(2 / 3)


def test_length_mismatch_and_empty_input():
    with pytest.raises(DataError):
        confusion([True], [True, False])
    with pytest.raises(DataError):
        evaluate([], [])


def test_undefined_rates_are_none(caplog):
    with caplog.at_level(logging.WARNING):
        ev = evaluate([False, False], [False, False])
    assert ev.sensitivity is None
    assert ev.specificity == 1.0
    assert "sensitivity undefined" in caplog.text
    assert format_metric(ev.sensitivity) == "n/a"
    assert format_metric(0.8567) == "0.86"


def test_random_matrices_against_exact_fractions():
    rng = np.random.default_rng(5)
    for _ in range(100):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 20, size=4))
        if tp + fp + tn + fn == 0:
            continue
        ev = evaluate(*_expand(tp, fp, tn, fn))
        assert ev.accuracy == float(Fraction(tp + tn, tp + fp + tn + fn))
        if tp + fn:
            assert ev.sensitivity == float(Fraction(tp, tp + fn))
        if tn + fp:
            assert ev.specificity == float(Fraction(tn, tn + fp))


def test_as_row_layout():
    row = evaluate(*_expand(2, 0, 3, 1)).as_row("DT2")
    assert list(row) == ["model", "tp", "fp", "tn", "fn", "accuracy", "specificity", "sensitivity"]
    assert row["model"] == "DT2" and row["tn"] == 3
