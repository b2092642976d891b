"""
Pydantic schemas for configuration and API payloads, plus the domain
dataclasses shared by the classifier and the ED model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator  # type: ignore[import]

from app.core.errors import DataError, ParameterError


# =============================================================================
# Domain enums and dataclasses
# =============================================================================

class Gender(str, Enum):
    F = "F"
    M = "M"


class Day(str, Enum):
    MON = "Mon"
    TUE = "Tue"
    WED = "Wed"
    THU = "Thu"
    FRI = "Fri"
    SAT = "Sat"
    SUN = "Sun"

    @property
    def index(self) -> int:
        return list(Day).index(self)

    @classmethod
    def from_index(cls, i: int) -> "Day":
        return list(cls)[i % 7]


class Triage(str, Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    L5 = "L5"


class Acuity(str, Enum):
    PICU = "PICU"
    ICU = "ICU"
    CCU = "CCU"
    STANDARD = "Standard"

    @property
    def critical(self) -> bool:
        return self is not Acuity.STANDARD


class Disposition(str, Enum):
    DISCHARGED_FROM_ED = "DischargedFromED"
    ADMITTED_VIA_ED = "AdmittedViaED"
    DETOURED_TO_IU = "DetouredToIU"


AGE_MAX = 105.0

RECORD_FIELDS = ["age", "gender", "arrival_day", "arrival_hour", "triage", "xray", "lab", "admitted"]


@dataclass(frozen=True)
class PatientRecord:
    age: float
    gender: Gender
    arrival_day: Day
    arrival_hour: float
    triage: Triage
    xray: bool
    lab: bool
    admitted: bool = False

    def __post_init__(self) -> None:
        if not (0.0 <= self.age <= AGE_MAX):
            raise DataError(f"age must lie in [0, {AGE_MAX:g}], got {self.age}")
        if not (0.0 <= self.arrival_hour < 24.0):
            raise DataError(f"arrival_hour must lie in [0, 24), got {self.arrival_hour}")

    def to_row(self) -> Dict[str, Any]:
        return {
            "age": repr(float(self.age)),
            "gender": self.gender.value,
            "arrival_day": self.arrival_day.value,
            "arrival_hour": repr(float(self.arrival_hour)),
            "triage": self.triage.value,
            "xray": int(self.xray),
            "lab": int(self.lab),
            "admitted": int(self.admitted),
        }

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "PatientRecord":
        try:
            return cls(
                age=float(row["age"]),
                gender=Gender(row["gender"].strip()),
                arrival_day=Day(row["arrival_day"].strip()),
                arrival_hour=float(row["arrival_hour"]),
                triage=Triage(row["triage"].strip()),
                xray=_as_bool(row["xray"]),
                lab=_as_bool(row["lab"]),
                admitted=_as_bool(row["admitted"]),
            )
        except (KeyError, ValueError) as exc:
            raise DataError(f"malformed record row {row}: {exc}") from exc


def _as_bool(value: str) -> bool:
    s = str(value).strip().lower()
    if s in {"1", "true", "yes"}:
        return True
    if s in {"0", "false", "no"}:
        return False
    raise ValueError(f"not a 0/1 flag: {value!r}")


# =============================================================================
# Configuration sections (every section rejects unknown keys)
# =============================================================================

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# Six evening hours have observed shares; the other 18 split the remaining 60.5%.
_EVENING_HOURS = {16: 6.7, 17: 6.3, 18: 7.7, 19: 5.8, 21: 6.7, 22: 6.3}


def _default_hour_weights() -> List[float]:
    rest = (100.0 - sum(_EVENING_HOURS.values())) / (24 - len(_EVENING_HOURS))
    return [_EVENING_HOURS.get(h, rest) for h in range(24)]


def _check_weights(name: str, weights: Dict[str, float], allowed: List[str]) -> Dict[str, float]:
    unknown = sorted(set(weights) - set(allowed))
    if unknown:
        raise ValueError(f"{name}: unknown categories {unknown}; allowed {allowed}")
    if any(w < 0 or not math.isfinite(w) for w in weights.values()):
        raise ValueError(f"{name}: weights must be nonnegative")
    if sum(weights.values()) <= 0:
        raise ValueError(f"{name}: weights must not all be zero")
    return weights


class PopulationSpec(_Section):
    """Marginals for generated patient records and the latent labelling rule."""

    age_mean: float = Field(31.7, gt=0, description="Target mean age (years) of generated records")
    age_sd: float = Field(24.4, gt=0, description="Target SD of age (years)")
    age_min: float = Field(0.0, ge=0, description="Lower truncation bound for age")
    age_max: float = Field(AGE_MAX, le=AGE_MAX, description="Upper truncation bound for age")
    age_moment_match: bool = Field(
        True, description="Fit the normal so the truncated age distribution keeps age_mean/age_sd"
    )
    gender_weights: Dict[str, float] = Field(
        default_factory=lambda: {"F": 51.9, "M": 48.1}, description="Percent per gender"
    )
    day_weights: Dict[str, float] = Field(
        default_factory=lambda: {
            "Mon": 7.5, "Tue": 17.5, "Wed": 20.9, "Thu": 7.5, "Fri": 21.4, "Sat": 7.5, "Sun": 17.7,
        },
        description="Percent per arrival day (Sat/Mon/Thu share the remainder equally)",
    )
    hour_weights: List[float] = Field(
        default_factory=_default_hour_weights,
        description="Percent per arrival hour 0..23 (non-evening hours share the remainder)",
    )
    triage_weights: Dict[str, float] = Field(
        default_factory=lambda: {"L2": 2.4, "L3": 49.4, "L4": 48.2},
        description="Percent per triage level (L2 takes the remainder)",
    )
    p_xray: float = Field(0.544, ge=0, le=1, description="Probability a record has an X-ray")
    p_lab: float = Field(0.522, ge=0, le=1, description="Probability a record has a lab test")
    label_noise: float = Field(0.10, ge=0, le=1, description="Probability a rule-admitted label flips to not admitted")
    target_admit_rate: Optional[float] = Field(
        0.201, ge=0, le=1,
        description="Base-rate target; negatives flip to admitted as needed to reach it (None: symmetric noise)",
    )
    latent_rule: Literal["reference"] = Field("reference", description="Latent labelling rule")

    @field_validator("gender_weights")
    @classmethod
    def _gender(cls, v: Dict[str, float]) -> Dict[str, float]:
        return _check_weights("gender_weights", v, [g.value for g in Gender])

    @field_validator("day_weights")
    @classmethod
    def _days(cls, v: Dict[str, float]) -> Dict[str, float]:
        return _check_weights("day_weights", v, [d.value for d in Day])

    @field_validator("triage_weights")
    @classmethod
    def _triage(cls, v: Dict[str, float]) -> Dict[str, float]:
        return _check_weights("triage_weights", v, [t.value for t in Triage])

    @field_validator("hour_weights")
    @classmethod
    def _hours(cls, v: List[float]) -> List[float]:
        if len(v) != 24:
            raise ValueError(f"hour_weights needs 24 entries, got {len(v)}")
        _check_weights("hour_weights", {str(i): w for i, w in enumerate(v)}, [str(i) for i in range(24)])
        return v

    @model_validator(mode="after")
    def _age_bounds(self) -> "PopulationSpec":
        if not self.age_min < self.age_mean < self.age_max:
            raise ValueError("need age_min < age_mean < age_max")
        return self


class TreeParams(_Section):
    max_depth: int = Field(6, ge=1, description="Maximum tree depth (root = depth 0)")
    min_leaf: int = Field(5, ge=1, description="Minimum training records per leaf")
    min_gini_gain: float = Field(1e-6, ge=0, description="Smallest Gini decrease worth a split")


class KnnParams(_Section):
    k: int = Field(1, ge=1, description="Number of neighbours")
    standardize: bool = Field(True, description="z-score age and hour with training statistics")


class DatagenParams(_Section):
    n_records: int = Field(500, ge=0, description="Records generated by `datagen`/`train`")
    train_fraction: float = Field(0.7, gt=0, lt=1, description="Training share of the split")


CAPACITY_NAMES = [
    "registration_clerks",
    "triage_nurses",
    "doctors",
    "nurses",
    "orderlies",
    "lab_techs",
    "radiology_units",
]


class Capacities(_Section):
    """Staffing levels. Defaults come from the calibration search."""

    registration_clerks: int = Field(2, ge=0, description="Registration clerks")
    triage_nurses: int = Field(2, ge=0, description="Triage nurses")
    doctors: int = Field(4, ge=0, description="ED doctors (first aid)")
    nurses: int = Field(5, ge=0, description="ED nurses (first aid and complementary treatment)")
    orderlies: int = Field(1, ge=0, description="Orderlies (radiology transport)")
    lab_techs: int = Field(1, ge=0, description="Laboratory technicians")
    radiology_units: int = Field(2, ge=0, description="Radiology units")

    def with_deltas(self, deltas: Dict[str, int]) -> "Capacities":
        values = self.model_dump()
        for name, delta in deltas.items():
            if name not in values:
                raise ParameterError(f"unknown resource {name!r}; expected one of {CAPACITY_NAMES}")
            values[name] += int(delta)
            if values[name] < 0:
                raise ParameterError(f"capacity delta {delta:+d} makes {name} negative")
        return Capacities(**values)


class AcuityMix(_Section):
    """Share of arrivals per acuity class (normalised on use)."""

    picu: float = Field(0.008, ge=0, description="PICU share")
    icu: float = Field(0.008, ge=0, description="ICU share")
    ccu: float = Field(0.008, ge=0, description="CCU share")
    standard: float = Field(0.976, ge=0, description="Standard (non-critical) share")

    @model_validator(mode="after")
    def _nonzero(self) -> "AcuityMix":
        if self.picu + self.icu + self.ccu + self.standard <= 0:
            raise ValueError("acuity_mix weights must not all be zero")
        return self

    def weights(self) -> Dict[Acuity, float]:
        return {Acuity.PICU: self.picu, Acuity.ICU: self.icu, Acuity.CCU: self.ccu, Acuity.STANDARD: self.standard}


class EDConfig(_Section):
    """Everything one replication of the ED model needs."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    capacities: Capacities = Field(default_factory=Capacities)
    interarrival_mean: float = Field(24.0, gt=0, description="Mean interarrival time (minutes)")
    p_lab: float = Field(0.522, ge=0, le=1, description="Share of patients with a lab test")
    p_xray: float = Field(0.544, ge=0, le=1, description="Share of patients with an X-ray")
    lab_routing_scale: float = Field(0.03, ge=0, le=1, description="Multiplier on p_lab for in-simulation routing")
    xray_routing_scale: float = Field(0.15, ge=0, le=1, description="Multiplier on p_xray for in-simulation routing")
    acuity_mix: AcuityMix = Field(default_factory=AcuityMix)
    standard_first_aid_as: Literal["PICU", "ICU", "CCU"] = Field(
        "ICU", description="First-aid duration row used for Standard patients"
    )
    prioritize_critical: bool = Field(
        False,
        description="Critical patients jump doctor/nurse queues (off: one FIFO class, so DTDT is measured under plain FIFO)",
    )
    bed_available_prob: float = Field(0.5, ge=0, le=1, description="Probability an inpatient bed is free")
    ml_enabled: bool = Field(False, description="Apply the detour policy after triage")
    horizon: float = Field(240 * 1440.0, ge=0, description="Arrivals stop after this many minutes")
    warmup: float = Field(1440.0, ge=0, description="Patients arriving earlier are excluded from statistics")
    start_day: Literal["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"] = Field(
        "Mon", description="Weekday at simulated time 0"
    )
    ruleset: Optional[Any] = Field(None, exclude=True, description="Detour RuleSet (None: reference rules)")
    population: PopulationSpec = Field(default_factory=PopulationSpec, exclude=True)

    @property
    def p_lab_effective(self) -> float:
        return self.p_lab * self.lab_routing_scale

    @property
    def p_xray_effective(self) -> float:
        return self.p_xray * self.xray_routing_scale

    @model_validator(mode="after")
    def _window(self) -> "EDConfig":
        if self.warmup > self.horizon or (self.warmup == self.horizon and self.horizon > 0):
            raise ValueError(f"warmup ({self.warmup}) must be < horizon ({self.horizon})")
        return self


class ScenarioSpec(_Section):
    name: str = Field(..., min_length=1)
    capacity_deltas: Dict[str, int] = Field(default_factory=dict)
    ml_enabled: bool = False

    @field_validator("capacity_deltas")
    @classmethod
    def _known(cls, v: Dict[str, int]) -> Dict[str, int]:
        unknown = sorted(set(v) - set(CAPACITY_NAMES))
        if unknown:
            raise ValueError(f"unknown resources {unknown}; expected {CAPACITY_NAMES}")
        return v


STANDARD_SCENARIOS = ["Baseline", "Baseline+ML", "A", "A+ML", "B", "B+ML"]


class ExperimentParams(_Section):
    n_reps: int = Field(30, ge=2, description="Replications per scenario")
    master_seed: int = Field(2021, ge=0, description="Master seed for every stream family")
    scenarios: List[str] = Field(default_factory=lambda: list(STANDARD_SCENARIOS), description="Scenarios to run")
    custom_scenarios: List[ScenarioSpec] = Field(default_factory=list, description="User-defined scenarios")
    jobs: int = Field(1, ge=1, description="Worker processes for replications")


class CalibrationParams(_Section):
    target_los: float = Field(98.68, gt=0, description="Baseline mean LOS to reproduce (minutes)")
    tolerance: float = Field(0.10, gt=0, lt=1, description="Relative band around target_los")
    n_reps: int = Field(10, ge=2, description="Replications per grid point")
    horizon_days: float = Field(30.0, gt=0, description="Simulated days per calibration replication")
    registration_clerks: List[int] = Field(default_factory=lambda: [2])
    triage_nurses: List[int] = Field(default_factory=lambda: [2])
    doctors: List[int] = Field(default_factory=lambda: [4, 5])
    nurses: List[int] = Field(default_factory=lambda: [4, 5, 6])
    orderlies: List[int] = Field(default_factory=lambda: [1, 2])
    lab_techs: List[int] = Field(default_factory=lambda: [1])
    radiology_units: List[int] = Field(default_factory=lambda: [2])
    lab_routing_scale: List[float] = Field(default_factory=lambda: [0.03])
    xray_routing_scale: List[float] = Field(default_factory=lambda: [0.15])


class OutputParams(_Section):
    out_dir: str = Field("data", description="Directory for every artifact")


class RunConfig(_Section):
    population: PopulationSpec = Field(default_factory=PopulationSpec)
    datagen: DatagenParams = Field(default_factory=DatagenParams)
    tree: TreeParams = Field(default_factory=TreeParams)
    knn: KnnParams = Field(default_factory=KnnParams)
    ed: EDConfig = Field(default_factory=EDConfig)
    experiment: ExperimentParams = Field(default_factory=ExperimentParams)
    calibration: CalibrationParams = Field(default_factory=CalibrationParams)
    output: OutputParams = Field(default_factory=OutputParams)

    @model_validator(mode="after")
    def _share_population(self) -> "RunConfig":
        if self.ed.population != self.population:
            object.__setattr__(self, "ed", self.ed.model_copy(update={"population": self.population}))
        return self


# =============================================================================
# API payloads
# =============================================================================

class TrainRequest(BaseModel):
    n_records: int = Field(500, ge=10, le=20000)
    seed: int = Field(2021, ge=0)


class ModelMetricsRow(BaseModel):
    model: str
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    specificity: Optional[float] = None
    sensitivity: Optional[float] = None


class TrainResponse(BaseModel):
    rows: List[ModelMetricsRow]
    dt2_rules: str


class SimulateRequest(BaseModel):
    scenarios: List[str] = Field(default_factory=lambda: list(STANDARD_SCENARIOS))
    reps: int = Field(5, ge=2, le=100)
    seed: int = Field(2021, ge=0)
    horizon_days: float = Field(7.0, gt=1, le=60)


class ReportRow(BaseModel):
    scenario: str
    mean_los: float
    pct_los: Optional[float] = None
    p_los: Optional[float] = None
    mean_dtdt: Optional[float] = None
    pct_dtdt: Optional[float] = None
    p_dtdt: Optional[float] = None
    n_reps: int


class SimulateResponse(BaseModel):
    rows: List[ReportRow]
    report: str
