"""
Staffing calibration: grid search over small capacity vectors and the lab and
X-ray routing scales until the Baseline mean LOS lands in the target band.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

from ..config import toml_value
from ..core.errors import ParameterError
from ..models.schemas import CAPACITY_NAMES, CalibrationParams, Capacities, EDConfig, ScenarioSpec
from ..services.storage_csv import write_rows
from .experiments import run_scenario

logger = logging.getLogger(__name__)

ROUTING_FIELDS = ["lab_routing_scale", "xray_routing_scale"]
GRID_FIELDS = CAPACITY_NAMES + ROUTING_FIELDS + ["mean_los", "ci_half_width", "in_band"]
# Rooms and machines; not counted as staff.
EQUIPMENT = ("radiology_units",)


@dataclass(frozen=True)
class GridPoint:
    capacities: Capacities
    lab_routing_scale: float
    xray_routing_scale: float
    mean_los: float
    ci_half_width: float
    in_band: bool

    @property
    def total_staff(self) -> int:
        return sum(getattr(self.capacities, n) for n in CAPACITY_NAMES if n not in EQUIPMENT)

    def row(self) -> Dict[str, object]:
        row: Dict[str, object] = self.capacities.model_dump()
        row.update(
            lab_routing_scale=self.lab_routing_scale,
            xray_routing_scale=self.xray_routing_scale,
            mean_los=repr(self.mean_los),
            ci_half_width=repr(self.ci_half_width),
            in_band=int(self.in_band),
        )
        return row


@dataclass(frozen=True)
class CalibrationResult:
    best: GridPoint
    grid: List[GridPoint]
    target_los: float
    tolerance: float

    def toml_fragment(self) -> str:
        lines = [
            f"# Baseline mean LOS {self.best.mean_los:.2f} min (target {self.target_los:g} +/- {self.tolerance:.0%})",
            "[ed]",
            f"lab_routing_scale = {toml_value(self.best.lab_routing_scale)}",
            f"xray_routing_scale = {toml_value(self.best.xray_routing_scale)}",
            "",
            "[ed.capacities]",
        ]
        lines += [f"{n} = {getattr(self.best.capacities, n)}" for n in CAPACITY_NAMES]
        return "\n".join(lines) + "\n"


def _candidates(params: CalibrationParams) -> Iterator[Tuple[Capacities, float, float]]:
    axes = [getattr(params, n) for n in CAPACITY_NAMES]
    for values in itertools.product(*axes):
        caps = Capacities(**dict(zip(CAPACITY_NAMES, values)))
        for lab, xray in itertools.product(params.lab_routing_scale, params.xray_routing_scale):
            yield caps, float(lab), float(xray)


def pick(grid: List[GridPoint], target_los: float) -> GridPoint:
    """Leanest in-band point (ties: closest to target, then grid order); else the closest point overall."""
    if not grid:
        raise ParameterError("calibration grid is empty: every axis needs at least one value")
    in_band = [p for p in grid if p.in_band]
    if in_band:
        return min(in_band, key=lambda p: (p.total_staff, abs(p.mean_los - target_los)))
    return min(grid, key=lambda p: abs(p.mean_los - target_los))


def calibrate(
    base: EDConfig, params: Optional[CalibrationParams] = None, master_seed: int = 2021, jobs: int = 1
) -> CalibrationResult:
    """Evaluates every grid point on the Baseline scenario over `params.horizon_days` per replication."""
    params = params or CalibrationParams()
    band = params.tolerance * params.target_los
    baseline = ScenarioSpec(name="Baseline")
    horizon = params.horizon_days * 1440.0
    if horizon <= base.warmup:
        raise ParameterError(f"calibration horizon ({horizon:g} min) must exceed the warmup ({base.warmup:g} min)")
    grid: List[GridPoint] = []
    for caps, lab, xray in _candidates(params):
        config = base.model_copy(update={
            "capacities": caps,
            "lab_routing_scale": lab,
            "xray_routing_scale": xray,
            "horizon": horizon,
            "ml_enabled": False,
        })
        result = run_scenario(config, baseline, params.n_reps, master_seed, jobs)
        summary = result.los_summary
        grid.append(GridPoint(
            capacities=caps,
            lab_routing_scale=lab,
            xray_routing_scale=xray,
            mean_los=summary.mean,
            ci_half_width=summary.ci_half_width,
            in_band=abs(summary.mean - params.target_los) <= band,
        ))

    best = pick(grid, params.target_los)
    if not best.in_band:
        logger.warning(
            "no grid point within %.0f%% of %.2f; closest mean LOS %.2f", params.tolerance * 100, params.target_los,
            best.mean_los,
        )
    logger.info(
        "calibration picked %s lab=%g xray=%g (LOS %.2f)",
        best.capacities.model_dump(), best.lab_routing_scale, best.xray_routing_scale, best.mean_los,
    )
    return CalibrationResult(best=best, grid=grid, target_los=params.target_los, tolerance=params.tolerance)


def write_calibration(result: CalibrationResult, out_dir: str | Path) -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    grid_path = write_rows(out_dir / "calibration_grid.csv", (p.row() for p in result.grid), GRID_FIELDS)
    toml_path = out_dir / "calibration.toml"
    toml_path.write_text(result.toml_fragment(), encoding="utf-8")
    return grid_path, toml_path
