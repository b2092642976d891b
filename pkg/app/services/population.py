"""
Synthetic patient records drawn from the population marginals, with labels
from a latent rule set plus label noise; train/test split; CSV I/O and a
marginal summary of a record set.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.distributions import Bernoulli, Categorical, TruncatedNormal, sample_many
from app.core.errors import ParameterError
from app.core.rng import RandomStream
from app.models.schemas import RECORD_FIELDS, Day, Gender, PatientRecord, PopulationSpec, Triage

from .rules import RuleSet, reference_ruleset
from .storage_csv import read_rows, write_rows

logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def _age_distribution(mean: float, sd: float, low: float, high: float, matched: bool) -> TruncatedNormal:
    dist = TruncatedNormal.moment_matched(mean, sd, low, high) if matched else TruncatedNormal(mean, sd, low, high)
    logger.debug("age ~ %s", dist.describe())
    return dist


@dataclass(frozen=True)
class PopulationSampler:
    """The marginals of a PopulationSpec as distribution objects."""

    age: TruncatedNormal
    gender: Categorical
    day: Categorical
    hour: Categorical
    triage: Categorical
    xray: Bernoulli
    lab: Bernoulli

    @classmethod
    def from_spec(cls, spec: PopulationSpec) -> "PopulationSampler":
        return cls(
            age=_age_distribution(spec.age_mean, spec.age_sd, spec.age_min, spec.age_max, spec.age_moment_match),
            gender=Categorical.from_mapping({Gender(k): w for k, w in spec.gender_weights.items()}),
            day=Categorical.from_mapping({Day(k): w for k, w in spec.day_weights.items()}),
            hour=Categorical(labels=tuple(range(24)), weights=tuple(spec.hour_weights)),
            triage=Categorical.from_mapping({Triage(k): w for k, w in spec.triage_weights.items()}),
            xray=Bernoulli(spec.p_xray),
            lab=Bernoulli(spec.p_lab),
        )


def latent_ruleset(spec: PopulationSpec) -> RuleSet:
    if spec.latent_rule == "reference":
        return reference_ruleset()
    raise ParameterError(f"unknown latent rule {spec.latent_rule!r}")


def draw_attributes(
    sampler: PopulationSampler, stream: RandomStream, arrival_day: Day, arrival_hour: float
) -> PatientRecord:
    """One unlabelled record whose arrival time is given (the ED model's clock); five draws."""
    return PatientRecord(
        age=float(sampler.age.from_uniform(stream.uniform01())),
        gender=sampler.gender.from_uniform(stream.uniform01()),
        arrival_day=arrival_day,
        arrival_hour=arrival_hour,
        triage=sampler.triage.from_uniform(stream.uniform01()),
        xray=sampler.xray.from_uniform(stream.uniform01()),
        lab=sampler.lab.from_uniform(stream.uniform01()),
    )


def flip_up_probability(match_rate: float, noise: float, target: Optional[float]) -> float:
    """
    Probability that a record the latent rule rejects is labelled admitted.

    Positives keep their label with probability 1 - noise, so the expected
    admit rate is match_rate * (1 - noise) + (1 - match_rate) * q; q is set to
    hit `target` (clipped to [0, 1]). Without a target the noise is symmetric.
    """
    if target is None:
        return noise
    if match_rate >= 1.0:
        return 0.0
    q = (target - match_rate * (1.0 - noise)) / (1.0 - match_rate)
    return float(min(1.0, max(0.0, q)))


def generate_records(
    n: int,
    stream: RandomStream,
    spec: Optional[PopulationSpec] = None,
    label_stream: Optional[RandomStream] = None,
) -> List[PatientRecord]:
    """
    `n` records. Attributes are drawn column by column from `stream`; label
    noise takes one uniform per record from `label_stream` (default: the same
    stream, after every attribute draw).
    """
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if n == 0:
        return []
    spec = spec or PopulationSpec()
    sampler = PopulationSampler.from_spec(spec)

    ages = sample_many(sampler.age, stream, n)
    genders = sample_many(sampler.gender, stream, n)
    days = sample_many(sampler.day, stream, n)
    hour_bins = sample_many(sampler.hour, stream, n)
    hour_offsets = stream.uniforms(n)
    triages = sample_many(sampler.triage, stream, n)
    xrays = sample_many(sampler.xray, stream, n)
    labs = sample_many(sampler.lab, stream, n)

    unlabelled = [
        PatientRecord(
            age=float(ages[i]),
            gender=genders[i],
            arrival_day=days[i],
            arrival_hour=float(min(int(hour_bins[i]) + hour_offsets[i], math.nextafter(24.0, 0.0))),
            triage=triages[i],
            xray=bool(xrays[i]),
            lab=bool(labs[i]),
        )
        for i in range(n)
    ]

    rules = latent_ruleset(spec)
    latent = np.asarray([rules.matches(r) for r in unlabelled], dtype=bool)
    match_rate = float(latent.mean())
    q = flip_up_probability(match_rate, spec.label_noise, spec.target_admit_rate)
    noise = (label_stream or stream).uniforms(n)
    admitted = np.where(latent, noise >= spec.label_noise, noise < q)

    records = [replace(r, admitted=bool(a)) for r, a in zip(unlabelled, admitted)]
    logger.info(
        "generated %d records: latent match rate %.3f, flip-up %.4f, admit rate %.3f",
        n, match_rate, q, float(admitted.mean()),
    )
    return records


def split_train_test(
    records: Sequence[PatientRecord], train_fraction: float, stream: RandomStream
) -> Tuple[List[PatientRecord], List[PatientRecord]]:
    """Random partition of size floor(n*f + 0.5) / remainder; one uniform per record."""
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(records)
    n_train = int(math.floor(n * train_fraction + 0.5))
    order = np.argsort(stream.uniforms(n), kind="stable")
    train = [records[i] for i in order[:n_train]]
    test = [records[i] for i in order[n_train:]]
    if not train or not test:
        logger.warning("split of %d records leaves %d train / %d test", n, len(train), len(test))
    return train, test


# -----------------------------
# CSV I/O
# -----------------------------
def records_to_csv(records: Sequence[PatientRecord], path: str | Path) -> Path:
    return write_rows(path, (r.to_row() for r in records), RECORD_FIELDS)


def records_from_csv(path: str | Path) -> List[PatientRecord]:
    path = Path(path)
    rows = read_rows(path, required=RECORD_FIELDS)
    records = [PatientRecord.from_row(row) for row in rows]
    logger.info("read %d records from %s", len(records), path)
    return records


# -----------------------------
# Marginal summary
# -----------------------------
def _percent(values: Sequence[Any], categories: Sequence[Any]) -> Dict[str, float]:
    n = len(values)
    return {str(getattr(c, "value", c)): (100.0 * sum(1 for v in values if v == c) / n if n else 0.0) for c in categories}


def summarize_records(records: Sequence[PatientRecord]) -> Dict[str, Any]:
    """Percent per category, age mean/SD and evening-hour shares of a record set."""
    n = len(records)
    ages = np.asarray([r.age for r in records], dtype=float)
    hours = [int(r.arrival_hour) for r in records]
    return {
        "n": n,
        "admitted": _percent([r.admitted for r in records], [True])["True"],
        "gender": _percent([r.gender for r in records], list(Gender)),
        "age_mean": float(ages.mean()) if n else 0.0,
        "age_sd": float(ages.std(ddof=1)) if n > 1 else 0.0,
        "arrival_day": _percent([r.arrival_day for r in records], list(Day)),
        "arrival_hour": _percent(hours, [16, 17, 18, 19, 21, 22]),
        "triage": _percent([r.triage for r in records], list(Triage)),
        "xray": _percent([r.xray for r in records], [True])["True"],
        "lab": _percent([r.lab for r in records], [True])["True"],
    }


def format_summary(summary: Dict[str, Any]) -> str:
    lines = [f"records: {summary['n']}", f"  admitted yes    {summary['admitted']:.1f}%"]
    lines.append(f"  age             mean {summary['age_mean']:.1f}  sd {summary['age_sd']:.1f}")
    for key in ("gender", "arrival_day", "arrival_hour", "triage"):
        cells = "  ".join(f"{k} {v:.1f}" for k, v in summary[key].items())
        lines.append(f"  {key:<15} {cells}")
    lines.append(f"  xray yes        {summary['xray']:.1f}%")
    lines.append(f"  lab yes         {summary['lab']:.1f}%")
    return "\n".join(lines) + "\n"
