"""
Scenario experiments: replications per scenario under common random numbers,
Welch comparisons against Baseline, and the LOS/DTDT report.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.errors import DataError, ParameterError, ReportError
from ..core.stats import Summary, WelchResult, pct_change, summarize, welch_t
from ..models.schemas import CAPACITY_NAMES, STANDARD_SCENARIOS, EDConfig, ScenarioSpec
from ..services.ed_model import ReplicationStats, run_replication
from ..services.storage_csv import read_rows, rows_to_csv, write_rows

logger = logging.getLogger(__name__)

BASELINE = "Baseline"
REPORT_FIELDS = ["scenario", "mean_los", "pct_los", "p_los", "mean_dtdt", "pct_dtdt", "p_dtdt", "n_reps"]
REPLICATION_FIELDS = (
    ["scenario", "replication", "mean_los", "mean_dtdt", "patients", "detours", "critical_patients"]
    + [f"util_{name}" for name in CAPACITY_NAMES]
)
ALPHA = 0.05


# -----------------------------
# Scenarios
# -----------------------------
def standard_scenarios() -> List[ScenarioSpec]:
    """Baseline, one extra nurse (A), one extra nurse and orderly (B); each with and without the detour policy."""
    deltas: Dict[str, Dict[str, int]] = {
        "Baseline": {},
        "A": {"nurses": 1},
        "B": {"nurses": 1, "orderlies": 1},
    }
    specs = []
    for name, delta in deltas.items():
        specs.append(ScenarioSpec(name=name, capacity_deltas=delta, ml_enabled=False))
        specs.append(ScenarioSpec(name=f"{name}+ML", capacity_deltas=delta, ml_enabled=True))
    return specs


def resolve_scenarios(names: Sequence[str], custom: Sequence[ScenarioSpec] = ()) -> List[ScenarioSpec]:
    """Look names up (case-insensitive) among custom then standard scenarios; Baseline always comes first."""
    known = {s.name.lower(): s for s in standard_scenarios()}
    known.update({s.name.lower(): s for s in custom})
    chosen: List[ScenarioSpec] = []
    for raw in names:
        key = raw.strip().lower()
        if not key:
            continue
        if key not in known:
            raise ParameterError(f"unknown scenario {raw!r}; known: {STANDARD_SCENARIOS + [s.name for s in custom]}")
        if known[key] not in chosen:
            chosen.append(known[key])
    if not any(s.name == BASELINE for s in chosen):
        chosen.insert(0, known[BASELINE.lower()])
    return chosen


def scenario_config(base: EDConfig, spec: ScenarioSpec) -> EDConfig:
    return base.model_copy(
        update={"capacities": base.capacities.with_deltas(spec.capacity_deltas), "ml_enabled": spec.ml_enabled}
    )


# -----------------------------
# Results
# -----------------------------
@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    replications: List[ReplicationStats]

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def n_reps(self) -> int:
        return len(self.replications)

    @property
    def los(self) -> List[float]:
        return [r.mean_los for r in self.replications]

    @property
    def dtdt(self) -> List[float]:
        return [r.mean_dtdt for r in self.replications]

    @property
    def los_summary(self) -> Summary:
        return summarize(self.los)

    @property
    def dtdt_summary(self) -> Summary:
        return summarize(self.dtdt)

    @property
    def mean_los(self) -> float:
        return self.los_summary.mean

    @property
    def mean_dtdt(self) -> float:
        return self.dtdt_summary.mean

    @property
    def mean_detours(self) -> float:
        return sum(r.detour_count for r in self.replications) / self.n_reps if self.replications else 0.0


@dataclass(frozen=True)
class Comparison:
    scenario: str
    pct_change_los: float
    pct_change_dtdt: float
    los_test: WelchResult
    dtdt_test: Optional[WelchResult]  # None when either side has fewer than two DTDT observations

    @property
    def significant_los(self) -> bool:
        return self.los_test.significant(ALPHA)

    @property
    def significant_dtdt(self) -> bool:
        return self.dtdt_test is not None and self.dtdt_test.significant(ALPHA)

    @property
    def significant_at_05(self) -> bool:
        """Both LOS and DTDT differ at p < 0.05."""
        return self.significant_los and self.significant_dtdt


def _run_one(args: Tuple[EDConfig, int, int]) -> ReplicationStats:
    config, seed, index = args
    return run_replication(config, seed, index)


def run_scenario(
    base: EDConfig, spec: ScenarioSpec, n_reps: int, master_seed: int, jobs: int = 1
) -> ScenarioResult:
    """Replication i uses stream family (master_seed, i) in every scenario."""
    if n_reps < 2:
        raise ParameterError(f"n_reps must be >= 2, got {n_reps}")
    config = scenario_config(base, spec)
    work = [(config, master_seed, i) for i in range(n_reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reps = list(pool.map(_run_one, work))
    else:
        reps = [_run_one(w) for w in work]
    result = ScenarioResult(spec=spec, replications=reps)
    logger.info(
        "%s: %d reps, mean LOS %.2f, mean DTDT %.2f, detours/rep %.1f",
        spec.name, n_reps, result.mean_los, result.mean_dtdt, result.mean_detours,
    )
    return result


def compare(baseline: ScenarioResult, variant: ScenarioResult) -> Comparison:
    if baseline.n_reps != variant.n_reps:
        raise DataError(f"cannot compare {baseline.n_reps} baseline reps with {variant.n_reps} variant reps")
    b_dtdt = [x for x in baseline.dtdt if math.isfinite(x)]
    v_dtdt = [x for x in variant.dtdt if math.isfinite(x)]
    dtdt_test = welch_t(v_dtdt, b_dtdt) if len(b_dtdt) >= 2 and len(v_dtdt) >= 2 else None
    cmp = Comparison(
        scenario=variant.name,
        pct_change_los=pct_change(baseline.mean_los, variant.mean_los),
        pct_change_dtdt=pct_change(baseline.mean_dtdt, variant.mean_dtdt),
        los_test=welch_t(variant.los, baseline.los),
        dtdt_test=dtdt_test,
    )
    logger.debug(
        "%s vs %s: LOS %+.2f%% DTDT %+.2f%% significant_at_05=%s",
        variant.name, baseline.name, cmp.pct_change_los, cmp.pct_change_dtdt, cmp.significant_at_05,
    )
    return cmp


def run_experiment(
    base: EDConfig,
    specs: Sequence[ScenarioSpec],
    n_reps: int,
    master_seed: int,
    jobs: int = 1,
    out_dir: Optional[str | Path] = None,
) -> List[ScenarioResult]:
    results = []
    for spec in specs:
        result = run_scenario(base, spec, n_reps, master_seed, jobs)
        if out_dir is not None:
            write_replications(result, Path(out_dir) / replication_filename(spec.name))
        results.append(result)
    return results


# -----------------------------
# Report
# -----------------------------
def _cell(mean: float, pct: Optional[float], significant: bool) -> str:
    if not math.isfinite(mean):
        return "n/a"
    text = f"{mean:.2f}{'*' if significant else ''}"
    if pct is not None and math.isfinite(pct):
        text += f" ({pct:+.2f}%)"
    return text


def _num(value: Optional[float]) -> str:
    if value is None or not math.isfinite(value):
        return ""
    return repr(float(value))


def render_report(results: Sequence[ScenarioResult]) -> Tuple[str, str]:
    """Plain-text table and CSV mirror; every non-Baseline row is compared against Baseline."""
    baseline = next((r for r in results if r.name == BASELINE), None)
    if baseline is None:
        raise ReportError("the report needs a Baseline scenario")
    rows: List[Dict[str, object]] = []
    lines = [
        f"{'Scenario':<14}{'LOS (min, % change)':<26}{'DTDT (min, % change)':<26}{'Detours/rep':>12}{'Reps':>6}",
        "-" * 84,
    ]
    for result in results:
        if result is baseline:
            cmp: Optional[Comparison] = None
        else:
            cmp = compare(baseline, result)
        los_cell = _cell(result.mean_los, cmp.pct_change_los if cmp else None, bool(cmp and cmp.significant_los))
        dtdt_cell = _cell(result.mean_dtdt, cmp.pct_change_dtdt if cmp else None, bool(cmp and cmp.significant_dtdt))
        lines.append(f"{result.name:<14}{los_cell:<26}{dtdt_cell:<26}{result.mean_detours:>12.1f}{result.n_reps:>6}")
        rows.append({
            "scenario": result.name,
            "mean_los": _num(result.mean_los),
            "pct_los": _num(cmp.pct_change_los) if cmp else "",
            "p_los": _num(cmp.los_test.p_value) if cmp else "",
            "mean_dtdt": _num(result.mean_dtdt),
            "pct_dtdt": _num(cmp.pct_change_dtdt) if cmp else "",
            "p_dtdt": _num(cmp.dtdt_test.p_value) if cmp and cmp.dtdt_test else "",
            "n_reps": result.n_reps,
        })
    lines.append("")
    lines.append(f"* Welch t-test against Baseline significant at p < {ALPHA:g}")
    return "\n".join(lines) + "\n", rows_to_csv(rows, REPORT_FIELDS)


# -----------------------------
# Replication CSVs
# -----------------------------
def replication_filename(scenario: str) -> str:
    return f"scenario_{scenario}.csv"


def write_replications(result: ScenarioResult, path: str | Path) -> Path:
    rows = []
    for i, r in enumerate(result.replications):
        row: Dict[str, object] = {
            "scenario": result.name,
            "replication": i,
            "mean_los": _num(r.mean_los),
            "mean_dtdt": _num(r.mean_dtdt),
            "patients": r.patient_count,
            "detours": r.detour_count,
            "critical_patients": r.critical_count,
        }
        for name in CAPACITY_NAMES:
            row[f"util_{name}"] = _num(r.utilization.get(name))
        rows.append(row)
    return write_rows(path, rows, REPLICATION_FIELDS)


def _float(value: str) -> float:
    return float(value) if value.strip() else math.nan


def load_scenario_result(path: str | Path) -> ScenarioResult:
    path = Path(path)
    rows = read_rows(path, required=("scenario", "replication", "mean_los", "mean_dtdt"))
    if not rows:
        raise DataError(f"replication file has no rows: {path}")
    try:
        name = rows[0]["scenario"]
        rows.sort(key=lambda row: int(row["replication"]))
        reps = [
            ReplicationStats(
                mean_los=_float(row["mean_los"]),
                mean_dtdt=_float(row["mean_dtdt"]),
                patient_count=int(row["patients"]),
                detour_count=int(row["detours"]),
                critical_count=int(row["critical_patients"]),
                utilization={n: _float(row.get(f"util_{n}", "")) for n in CAPACITY_NAMES},
            )
            for row in rows
        ]
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed replication file {path}: {exc}") from exc
    spec = ScenarioSpec(name=name, ml_enabled=name.endswith("+ML"))
    return ScenarioResult(spec=spec, replications=reps)


def load_results(out_dir: str | Path, names: Optional[Sequence[str]] = None) -> List[ScenarioResult]:
    """Replication CSVs found in `out_dir`, standard scenarios first, others by name."""
    out_dir = Path(out_dir)
    found = {p.name[len("scenario_"):-len(".csv")]: p for p in out_dir.glob("scenario_*.csv")}
    order = list(names) if names else [n for n in STANDARD_SCENARIOS if n in found] + sorted(
        n for n in found if n not in STANDARD_SCENARIOS
    )
    missing = [n for n in order if n not in found]
    if missing:
        raise DataError(f"no replication CSV for {missing} in {out_dir}")
    return [load_scenario_result(found[n]) for n in order]
