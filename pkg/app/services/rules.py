"""
Admission rule sets: a disjunction of conjunctive clauses over patient
features. A record is predicted "admit" when any clause matches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, FrozenSet, List, Optional, Tuple, Union

from app.core.errors import ParameterError
from app.models.schemas import Day, PatientRecord

from .features import FEATURES, FEATURE_ORDER, format_category


@dataclass(frozen=True)
class Interval:
    """Numeric condition low (<|<=) value (<|<=) high; a missing bound is unbounded."""

    feature: str
    low: Optional[float] = None
    high: Optional[float] = None
    low_inclusive: bool = False
    high_inclusive: bool = False

    def matches(self, record: PatientRecord) -> bool:
        x = FEATURES[self.feature].value(record)
        if self.low is not None and (x < self.low or (x == self.low and not self.low_inclusive)):
            return False
        if self.high is not None and (x > self.high or (x == self.high and not self.high_inclusive)):
            return False
        return True

    def is_empty(self) -> bool:
        if self.low is None or self.high is None:
            return False
        if self.low > self.high:
            return True
        return self.low == self.high and not (self.low_inclusive and self.high_inclusive)

    def intersect(self, other: "Interval") -> "Interval":
        low, low_inc = self.low, self.low_inclusive
        if other.low is not None and (low is None or other.low > low or (other.low == low and not other.low_inclusive)):
            low, low_inc = other.low, other.low_inclusive
        high, high_inc = self.high, self.high_inclusive
        if other.high is not None and (high is None or other.high < high or (other.high == high and not other.high_inclusive)):
            high, high_inc = other.high, other.high_inclusive
        return Interval(self.feature, low, high, low_inc, high_inc)

    def render(self) -> str:
        name = self.feature
        if self.low is not None and self.high is not None:
            lo_op = "<=" if self.low_inclusive else "<"
            hi_op = "<=" if self.high_inclusive else "<"
            return f"{self.low:g} {lo_op} {name} {hi_op} {self.high:g}"
        if self.low is not None:
            return f"{name} {'>=' if self.low_inclusive else '>'} {self.low:g}"
        if self.high is not None:
            return f"{name} {'<=' if self.high_inclusive else '<'} {self.high:g}"
        return f"{name} (any)"


@dataclass(frozen=True)
class Membership:
    """Categorical condition: feature value is one of `allowed`."""

    feature: str
    allowed: FrozenSet[Any]

    def matches(self, record: PatientRecord) -> bool:
        return FEATURES[self.feature].value(record) in self.allowed

    def is_empty(self) -> bool:
        return not self.allowed

    def intersect(self, other: "Membership") -> "Membership":
        return Membership(self.feature, self.allowed & other.allowed)

    def render(self) -> str:
        domain = FEATURES[self.feature].domain
        ordered = [v for v in domain if v in self.allowed]
        return f"{self.feature} in {{{', '.join(format_category(v) for v in ordered)}}}"


Condition = Union[Interval, Membership]


@dataclass(frozen=True)
class Clause:
    conditions: Tuple[Condition, ...] = ()

    def __post_init__(self) -> None:
        for cond in self.conditions:
            if cond.is_empty():
                raise ParameterError(f"clause condition can never hold: {cond.render()}")

    def matches(self, record: PatientRecord) -> bool:
        return all(c.matches(record) for c in self.conditions)

    @classmethod
    def merged(cls, conditions: List[Condition]) -> "Clause":
        """One condition per feature, bounds intersected, in canonical feature order."""
        by_feature: dict = {}
        for cond in conditions:
            prev = by_feature.get(cond.feature)
            by_feature[cond.feature] = cond if prev is None else prev.intersect(cond)
        return cls(tuple(by_feature[f] for f in FEATURE_ORDER if f in by_feature))

    def render(self) -> List[str]:
        return [c.render() for c in self.conditions] or ["(always)"]


@dataclass(frozen=True)
class RuleSet:
    clauses: Tuple[Clause, ...] = field(default_factory=tuple)
    name: str = "rules"

    def matches(self, record: PatientRecord) -> bool:
        return any(c.matches(record) for c in self.clauses)

    def predict(self, record: PatientRecord) -> bool:
        return self.matches(record)

    def render(self) -> str:
        lines = [f"{self.name}: admit if ANY rule matches ({len(self.clauses)} rules)"]
        for i, clause in enumerate(self.clauses, start=1):
            lines.append(f"rule {i}:")
            lines.extend(f"  {text}" for text in clause.render())
        return "\n".join(lines) + "\n"


def _days(*days: Day) -> Membership:
    return Membership("arrival_day", frozenset(d.value for d in days))


def reference_ruleset() -> RuleSet:
    """The five admission rules of the reference DT2 tree."""
    return RuleSet(
        name="DT2 (reference rules)",
        clauses=(
            Clause((Interval("age", high=0.4),)),
            Clause((
                Interval("age", low=0.4, high=64.5),
                _days(Day.SAT),
                Interval("arrival_hour", low=17.5, low_inclusive=True),
            )),
            Clause((
                Interval("age", low=3.5, high=64.5),
                _days(Day.WED, Day.FRI),
                Interval("arrival_hour", low=17.0, low_inclusive=True),
            )),
            Clause((
                Interval("age", low=64.5, high=74.0),
                _days(Day.SUN, Day.WED, Day.THU),
            )),
            Clause((
                Interval("age", low=72.5),
                _days(Day.FRI, Day.SAT, Day.MON, Day.TUE),
                Interval("arrival_hour", low=12.5, low_inclusive=True),
            )),
        ),
    )
