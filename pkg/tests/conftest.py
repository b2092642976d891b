from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from app.models.schemas import Day, EDConfig, Gender, PatientRecord, Triage  # noqa: E402


def make_record(
    age: float = 30.0,
    gender: str = "F",
    day: str = "Tue",
    hour: float = 10.0,
    triage: str = "L3",
    xray: bool = False,
    lab: bool = False,
    admitted: bool = False,
) -> PatientRecord:
    return PatientRecord(
        age=age,
        gender=Gender(gender),
        arrival_day=Day(day),
        arrival_hour=hour,
        triage=Triage(triage),
        xray=xray,
        lab=lab,
        admitted=admitted,
    )


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def short_ed() -> EDConfig:
    """Three simulated days after a half-day warm-up."""
    return EDConfig(horizon=3.5 * 1440.0, warmup=720.0)
