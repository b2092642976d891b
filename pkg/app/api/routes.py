"""
HTTP surface over the classifier and experiment pipelines.
"""
import logging
import math
from typing import Optional

from fastapi import APIRouter, HTTPException  # type: ignore[import]

from ..core.errors import EDSimError
from ..models.schemas import (  # type: ignore[import]
    EDConfig,
    ModelMetricsRow,
    ReportRow,
    SimulateRequest,
    SimulateResponse,
    TrainRequest,
    TrainResponse,
)
from ..pipelines.datagen import generate_dataset
from ..pipelines.experiments import compare, render_report, resolve_scenarios, run_experiment
from ..pipelines.train import train_models

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api")


@router.post("/train", response_model=TrainResponse)
def train(req: TrainRequest) -> TrainResponse:
    """Generate records, fit DT1/DT2/kNN and return the held-out metrics."""
    try:
        records = generate_dataset(req.n_records, req.seed)
        report = train_models(records, req.seed)
    except EDSimError as exc:
        logger.warning("train request failed: %s", exc)
        raise HTTPException(status_code=400, detail=str(exc))
    return TrainResponse(
        rows=[ModelMetricsRow(**row) for row in report.rows()],  # type: ignore[arg-type]
        dt2_rules=report.dt2_rules.render(),
    )


@router.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    """Run the requested scenarios (Baseline always included) and return the report rows."""
    try:
        base = EDConfig(horizon=req.horizon_days * 1440.0)
        specs = resolve_scenarios(req.scenarios)
        results = run_experiment(base, specs, req.reps, req.seed)
        text, _ = render_report(results)
    except (EDSimError, ValueError) as exc:
        logger.warning("simulate request failed: %s", exc)
        raise HTTPException(status_code=400, detail=str(exc))

    baseline = results[0]
    rows = []
    for result in results:
        cmp = None if result is baseline else compare(baseline, result)
        rows.append(
            ReportRow(
                scenario=result.name,
                mean_los=result.mean_los,
                pct_los=cmp.pct_change_los if cmp else None,
                p_los=cmp.los_test.p_value if cmp else None,
                mean_dtdt=_finite_or_none(result.mean_dtdt),
                pct_dtdt=_finite_or_none(cmp.pct_change_dtdt) if cmp else None,
                p_dtdt=cmp.dtdt_test.p_value if cmp and cmp.dtdt_test else None,
                n_reps=result.n_reps,
            )
        )
    return SimulateResponse(rows=rows, report=text)


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None
