"""
Predictor definitions shared by the tree, the rule sets and kNN.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple

from app.core.errors import DataError
from app.models.schemas import Day, Gender, PatientRecord, Triage


@dataclass(frozen=True)
class Feature:
    name: str
    numeric: bool
    getter: Callable[[PatientRecord], Any]
    domain: Tuple[Any, ...] = ()  # category values, fixed order; empty for numeric

    def value(self, record: PatientRecord) -> Any:
        return self.getter(record)


# Fixed order: equal Gini gains resolve to the feature listed first.
FEATURES: Dict[str, Feature] = {
    f.name: f
    for f in [
        Feature("age", True, lambda r: float(r.age)),
        Feature("gender", False, lambda r: r.gender.value, tuple(g.value for g in Gender)),
        Feature("arrival_day", False, lambda r: r.arrival_day.value, tuple(d.value for d in Day)),
        Feature("arrival_hour", True, lambda r: float(r.arrival_hour)),
        Feature("triage", False, lambda r: r.triage.value, tuple(t.value for t in Triage)),
        Feature("xray", False, lambda r: bool(r.xray), (False, True)),
        Feature("lab", False, lambda r: bool(r.lab), (False, True)),
    ]
}

FEATURE_ORDER: List[str] = list(FEATURES)

# DT1 sees every predictor; DT2 stops at triage (no test results yet).
DT1_FEATURES: List[str] = list(FEATURE_ORDER)
DT2_FEATURES: List[str] = [f for f in FEATURE_ORDER if f not in ("xray", "lab")]
KNN_FEATURES: List[str] = ["age", "arrival_hour"]


def resolve(names: Sequence[str]) -> List[Feature]:
    """Features in canonical order; rejects unknown names and empty sets."""
    if not names:
        raise DataError("feature set must not be empty")
    unknown = sorted(set(names) - set(FEATURES))
    if unknown:
        raise DataError(f"unknown features {unknown}; expected a subset of {FEATURE_ORDER}")
    return [FEATURES[n] for n in FEATURE_ORDER if n in set(names)]


def format_category(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)
