"""
Emergency-department patient flow on the event kernel.

Path of one patient:
  arrival -> registration (clerk) -> triage (triage nurse)
  -> [detour check: predicted admit and a free inpatient bed -> leaves to IU]
  -> first aid (doctor + nurse) -> lab test (lab tech) -> x-ray (orderly + radiology unit)
  -> complementary treatment (nurse) -> departure

Every random input of a patient is drawn at arrival from its own substream
(the "service ticket"), so replication i of two scenarios sees the same
patients with the same service times whatever the capacities or policy.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.core.des import CRITICAL, STANDARD, TRACE_HEADER, Event, RequestOutcome, Simulation
from app.core.distributions import Categorical, Exponential, Triangular, Uniform
from app.core.errors import DataError, ParameterError
from app.core.rng import RandomStream, StreamFamily
from app.models.schemas import CAPACITY_NAMES, Acuity, Day, Disposition, EDConfig, PatientRecord

from .population import PopulationSampler, draw_attributes
from .rules import RuleSet, reference_ruleset
from .storage_csv import write_rows

logger = logging.getLogger(__name__)

MINUTES_PER_DAY = 1440.0

# Service-time distributions, minutes.
REGISTRATION = Uniform(3.0, 10.0)
TRIAGE = Triangular(5.0, 10.0, 15.0)
FIRST_AID: Dict[Acuity, Uniform] = {
    Acuity.PICU: Uniform(10.0, 45.0),
    Acuity.ICU: Uniform(20.0, 60.0),
    Acuity.CCU: Uniform(30.0, 90.0),
}
LAB_TEST = Triangular(15.0, 45.0, 90.0)
XRAY_EXAM = Triangular(15.0, 45.0, 90.0)
TREATMENT = Uniform(10.0, 60.0)

PATIENT_LOG_FIELDS = ["patient_id", "arrival", "acuity", "disposition", "los", "dtdt", "detoured"]


class DetourDecision(str, Enum):
    DETOUR = "Detour"
    CONTINUE = "Continue"


def detour_decision(record: PatientRecord, ruleset: RuleSet, bed_u: float, bed_prob: float) -> DetourDecision:
    if ruleset.matches(record) and bed_u < bed_prob:
        return DetourDecision.DETOUR
    return DetourDecision.CONTINUE


def apply_detour_policy(
    record: PatientRecord, ruleset: RuleSet, stream: RandomStream, bed_prob: float
) -> DetourDecision:
    """Detour iff the rule set predicts admission and the bed draw succeeds; one draw from `stream`."""
    return detour_decision(record, ruleset, stream.uniform01(), bed_prob)


# -----------------------------
# Patients
# -----------------------------
@dataclass(frozen=True)
class ServiceTicket:
    acuity: Acuity
    registration: float
    triage: float
    first_aid: float
    needs_lab: bool
    needs_xray: bool
    lab: float
    xray: float
    treatment: float
    bed_u: float


@dataclass
class PatientState:
    patient_id: int
    record: PatientRecord
    ticket: ServiceTicket
    arrival: float
    registration_done: Optional[float] = None
    triage_done: Optional[float] = None
    first_doctor_contact: Optional[float] = None
    departure: Optional[float] = None
    disposition: Optional[Disposition] = None

    @property
    def acuity(self) -> Acuity:
        return self.ticket.acuity

    @property
    def detoured(self) -> bool:
        return self.disposition is Disposition.DETOURED_TO_IU

    @property
    def los(self) -> float:
        if self.departure is None:
            raise DataError(f"patient {self.patient_id} has not departed")
        return self.departure - self.arrival

    @property
    def dtdt(self) -> Optional[float]:
        if self.first_doctor_contact is None:
            return None
        return self.first_doctor_contact - self.arrival

    def depart(self, now: float, disposition: Disposition) -> None:
        if self.departure is not None:
            raise DataError(f"patient {self.patient_id} departed twice")
        self.departure = now
        self.disposition = disposition

    def log_row(self) -> Dict[str, object]:
        dtdt = self.dtdt if self.acuity.critical else None
        return {
            "patient_id": self.patient_id,
            "arrival": repr(self.arrival),
            "acuity": self.acuity.value,
            "disposition": self.disposition.value if self.disposition else "",
            "los": repr(self.los) if self.departure is not None else "",
            "dtdt": "" if dtdt is None else repr(dtdt),
            "detoured": int(self.detoured),
        }


# -----------------------------
# Statistics
# -----------------------------
@dataclass(frozen=True)
class ReplicationStats:
    mean_los: float
    mean_dtdt: float  # NaN when no post-warmup critical patient reached a doctor
    patient_count: int
    detour_count: int
    critical_count: int
    utilization: Dict[str, float] = field(default_factory=dict)
    mean_wait: Dict[str, float] = field(default_factory=dict)
    mean_queue: Dict[str, float] = field(default_factory=dict)
    end_time: float = 0.0


def collect_kpis(states: Sequence[PatientState], warmup: float) -> ReplicationStats:
    """LOS over every patient arriving at or after `warmup` (detours included); DTDT over critical ones."""
    counted = [s for s in states if s.arrival >= warmup]
    for s in counted:
        if s.departure is None:
            raise DataError(f"patient {s.patient_id} never departed")
    los = [s.los for s in counted]
    dtdt = [s.dtdt for s in counted if s.acuity.critical and s.dtdt is not None]
    return ReplicationStats(
        mean_los=math.fsum(los) / len(los) if los else 0.0,
        mean_dtdt=math.fsum(dtdt) / len(dtdt) if dtdt else math.nan,
        patient_count=len(counted),
        detour_count=sum(1 for s in counted if s.detoured),
        critical_count=sum(1 for s in counted if s.acuity.critical),
    )


@dataclass(frozen=True)
class ReplicationRun:
    stats: ReplicationStats
    patients: List[PatientState]
    trace: List[str]


# -----------------------------
# Model
# -----------------------------
class EDModel:
    """One replication: builds the world, runs it until every patient has left."""

    def __init__(self, config: EDConfig, seed: int, replication_index: int = 0, trace: bool = False) -> None:
        self.config = config
        self.ruleset: RuleSet = config.ruleset if config.ruleset is not None else reference_ruleset()
        self.streams = StreamFamily(seed, replication_index)
        self.sim = Simulation(warmup=config.warmup, trace=trace)
        for name in CAPACITY_NAMES:
            self.sim.add_resource(name, getattr(config.capacities, name))
        self.patients: List[PatientState] = []
        self._pending: Dict[Tuple[str, int], Callable[[], None]] = {}

        self._interarrival = Exponential(config.interarrival_mean)
        self._acuity = Categorical.from_mapping(config.acuity_mix.weights())
        self._sampler = PopulationSampler.from_spec(config.population)
        self._start_day = Day(config.start_day)
        logger.debug(
            "arrivals %s; registration %s; triage %s; first aid %s; lab %s; x-ray %s; treatment %s; acuity %s",
            self._interarrival.describe(), REGISTRATION.describe(), TRIAGE.describe(),
            ", ".join(f"{a.value}={d.describe()}" for a, d in FIRST_AID.items()),
            LAB_TEST.describe(), XRAY_EXAM.describe(), TREATMENT.describe(), self._acuity.describe(),
        )

        for kind, handler in [
            ("arrival", self._on_arrival),
            ("registration_done", self._on_registration_done),
            ("triage_done", self._on_triage_done),
            ("first_aid_done", self._on_first_aid_done),
            ("lab_done", self._on_lab_done),
            ("xray_done", self._on_xray_done),
            ("treatment_done", self._on_treatment_done),
        ]:
            self.sim.on(kind, handler)

    def _check_staffing(self) -> None:
        caps = self.config.capacities
        required = ["registration_clerks", "triage_nurses", "doctors", "nurses"]
        if self.config.p_lab_effective > 0:
            required.append("lab_techs")
        if self.config.p_xray_effective > 0:
            required += ["orderlies", "radiology_units"]
        empty = [name for name in required if getattr(caps, name) == 0]
        if empty and self.config.horizon > 0:
            raise ParameterError(f"resources with zero capacity would block patients forever: {empty}")

    # ----- draws -----
    def _ticket(self) -> ServiceTicket:
        s = self.streams.stream
        acuity = self._acuity.from_uniform(s("acuity").uniform01())
        first_aid_row = acuity if acuity.critical else Acuity(self.config.standard_first_aid_as)
        routing = s("routing").uniforms(2)
        return ServiceTicket(
            acuity=acuity,
            registration=REGISTRATION.from_uniform(s("registration").uniform01()),
            triage=TRIAGE.from_uniform(s("triage").uniform01()),
            first_aid=FIRST_AID[first_aid_row].from_uniform(s("first_aid").uniform01()),
            needs_lab=bool(routing[0] < self.config.p_lab_effective),
            needs_xray=bool(routing[1] < self.config.p_xray_effective),
            lab=LAB_TEST.from_uniform(s("lab").uniform01()),
            xray=XRAY_EXAM.from_uniform(s("xray").uniform01()),
            treatment=TREATMENT.from_uniform(s("treatment").uniform01()),
            bed_u=s("beds").uniform01(),
        )

    def _record(self, now: float) -> PatientRecord:
        day_offset = int(now // MINUTES_PER_DAY)
        day = Day.from_index(self._start_day.index + day_offset)
        hour = (now - day_offset * MINUTES_PER_DAY) / 60.0
        return draw_attributes(self._sampler, self.streams.stream("attributes"), day, min(hour, math.nextafter(24.0, 0.0)))

    def _next_arrival(self) -> None:
        gap = self._interarrival.from_uniform(self.streams.stream("arrivals").uniform01())
        if self.sim.now + gap < self.config.horizon:
            self.sim.schedule(gap, "arrival")

    # ----- resources -----
    def _priority(self, p: PatientState) -> int:
        return CRITICAL if self.config.prioritize_critical and p.acuity.critical else STANDARD

    def _seize(self, resource: str, p: PatientState, then: Callable[[], None], priority: int = STANDARD) -> None:
        outcome = self.sim.resources[resource].request(p.patient_id, priority, self.sim.now)
        if outcome is RequestOutcome.GRANTED:
            then()
        else:
            self._pending[(resource, p.patient_id)] = then

    def _release(self, resource: str, p: PatientState) -> None:
        granted = self.sim.resources[resource].release(p.patient_id, self.sim.now)
        if granted is not None:
            self._pending.pop((resource, granted))()

    # ----- process steps -----
    def _on_arrival(self, event: Event) -> None:
        now = self.sim.now
        p = PatientState(patient_id=len(self.patients), record=self._record(now), ticket=self._ticket(), arrival=now)
        self.patients.append(p)
        self._next_arrival()
        self._seize("registration_clerks", p, lambda: self.sim.schedule(p.ticket.registration, "registration_done", p.patient_id))

    def _on_registration_done(self, event: Event) -> None:
        p = self.patients[event.entity_id]
        p.registration_done = self.sim.now
        self._release("registration_clerks", p)
        self._seize("triage_nurses", p, lambda: self.sim.schedule(p.ticket.triage, "triage_done", p.patient_id))

    def _on_triage_done(self, event: Event) -> None:
        p = self.patients[event.entity_id]
        p.triage_done = self.sim.now
        self._release("triage_nurses", p)
        if self.config.ml_enabled:
            decision = detour_decision(p.record, self.ruleset, p.ticket.bed_u, self.config.bed_available_prob)
            if decision is DetourDecision.DETOUR:
                p.depart(self.sim.now, Disposition.DETOURED_TO_IU)
                return
        prio = self._priority(p)

        def start_first_aid() -> None:
            p.first_doctor_contact = self.sim.now
            self.sim.schedule(p.ticket.first_aid, "first_aid_done", p.patient_id)

        self._seize("doctors", p, lambda: self._seize("nurses", p, start_first_aid, prio), prio)

    def _on_first_aid_done(self, event: Event) -> None:
        p = self.patients[event.entity_id]
        self._release("nurses", p)
        self._release("doctors", p)
        self._start_tests(p)

    def _start_tests(self, p: PatientState) -> None:
        if p.ticket.needs_lab:
            self._seize("lab_techs", p, lambda: self.sim.schedule(p.ticket.lab, "lab_done", p.patient_id))
        else:
            self._start_xray(p)

    def _start_xray(self, p: PatientState) -> None:
        if not p.ticket.needs_xray:
            self._start_treatment(p)
            return

        def start_exam() -> None:
            self.sim.schedule(p.ticket.xray, "xray_done", p.patient_id)

        # the orderly stays with the patient for the whole exam
        self._seize("orderlies", p, lambda: self._seize("radiology_units", p, start_exam))

    def _on_lab_done(self, event: Event) -> None:
        p = self.patients[event.entity_id]
        self._release("lab_techs", p)
        self._start_xray(p)

    def _on_xray_done(self, event: Event) -> None:
        p = self.patients[event.entity_id]
        self._release("radiology_units", p)
        self._release("orderlies", p)
        self._start_treatment(p)

    def _start_treatment(self, p: PatientState) -> None:
        self._seize(
            "nurses", p, lambda: self.sim.schedule(p.ticket.treatment, "treatment_done", p.patient_id), self._priority(p)
        )

    def _on_treatment_done(self, event: Event) -> None:
        p = self.patients[event.entity_id]
        self._release("nurses", p)
        disposition = Disposition.ADMITTED_VIA_ED if p.acuity.critical else Disposition.DISCHARGED_FROM_ED
        p.depart(self.sim.now, disposition)

    # ----- run -----
    def run(self) -> ReplicationRun:
        self._check_staffing()
        if self.config.horizon > 0:
            self._next_arrival()
        self.sim.run()
        end = max(self.sim.now, self.config.warmup)
        base = collect_kpis(self.patients, self.config.warmup)
        resources = self.sim.resources
        stats = ReplicationStats(
            mean_los=base.mean_los,
            mean_dtdt=base.mean_dtdt,
            patient_count=base.patient_count,
            detour_count=base.detour_count,
            critical_count=base.critical_count,
            utilization={n: r.utilization(end) for n, r in resources.items()},
            mean_wait={n: r.wait.mean for n, r in resources.items()},
            mean_queue={n: r.queue_length.mean(end) for n, r in resources.items()},
            end_time=self.sim.now,
        )
        logger.debug(
            "replication %d: %d patients, %d detours, LOS %.2f, DTDT %.2f",
            self.streams.replication_index, stats.patient_count, stats.detour_count, stats.mean_los, stats.mean_dtdt,
        )
        return ReplicationRun(stats=stats, patients=self.patients, trace=self.sim.trace_lines())


def simulate(config: EDConfig, seed: int, replication_index: int = 0, trace: bool = False) -> ReplicationRun:
    return EDModel(config, seed, replication_index, trace=trace).run()


def run_replication(config: EDConfig, seed: int, replication_index: int = 0) -> ReplicationStats:
    return simulate(config, seed, replication_index).stats


def write_patient_log(patients: Sequence[PatientState], path: str | Path) -> Path:
    return write_rows(path, (p.log_row() for p in patients), PATIENT_LOG_FIELDS)


def write_trace(run: ReplicationRun, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join([TRACE_HEADER, *run.trace]) + "\n", encoding="utf-8")
    return path
