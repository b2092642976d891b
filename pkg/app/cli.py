"""
Command-line entry point: datagen, train, simulate, calibrate, report, config-reference.

Exit codes: 0 ok, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import functools
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
from pydantic import ValidationError  # type: ignore[import]

from app import config as settings
from app.core.errors import EDSimError, ParameterError
from app.models.schemas import CalibrationParams, EDConfig, RunConfig
from app.pipelines.calibrate import calibrate as run_calibration
from app.pipelines.calibrate import write_calibration
from app.pipelines.datagen import RECORDS_FILE, generate_dataset, run_datagen
from app.pipelines.experiments import load_results, render_report, resolve_scenarios, run_experiment
from app.pipelines.train import train_models, write_training_artifacts
from app.services.ed_model import simulate as simulate_once
from app.services.ed_model import write_patient_log, write_trace
from app.services.population import records_from_csv, records_to_csv

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_RUNTIME = 2
REFERENCE_FILE = "config_reference.toml"


@dataclass
class Options:
    config_path: Optional[str]
    seed: Optional[int]
    out_dir: Optional[str]
    _config: Optional[RunConfig] = None

    @property
    def config(self) -> RunConfig:
        if self._config is None:
            try:
                self._config = settings.load_run_config(self.config_path)
            except OSError as exc:
                raise ParameterError(f"cannot read config {self.config_path}: {exc}") from exc
        return self._config

    @property
    def master_seed(self) -> int:
        return self.seed if self.seed is not None else self.config.experiment.master_seed

    @property
    def out(self) -> Path:
        if self.out_dir:
            path = Path(self.out_dir)
        elif "out_dir" in self.config.output.model_fields_set:
            path = Path(self.config.output.out_dir)
        else:
            path = settings.data_dir()
        path.mkdir(parents=True, exist_ok=True)
        return path

    def jobs(self, flag: Optional[int]) -> int:
        if flag is not None:
            return max(1, flag)
        if "jobs" in self.config.experiment.model_fields_set:
            return self.config.experiment.jobs
        return settings.default_jobs()


def _handles_errors(fn: Callable[..., Any]) -> Callable[..., Any]:
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        ctx = click.get_current_context()
        try:
            return fn(*args, **kwargs)
        except (ValidationError, ParameterError, tomllib.TOMLDecodeError) as exc:
            click.echo(f"configuration error: {exc}", err=True)
            ctx.exit(EXIT_CONFIG)
        except (EDSimError, OSError) as exc:
            logger.debug("command failed", exc_info=True)
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_RUNTIME)

    return wrapper


def _with_days(ed: EDConfig, days: Optional[float]) -> EDConfig:
    if days is None:
        return ed
    values = ed.model_dump()
    values["horizon"] = days * 1440.0
    return EDConfig(**values, ruleset=ed.ruleset, population=ed.population)


def _scenario_names(raw: Optional[str], default: List[str]) -> List[str]:
    return raw.split(",") if raw else list(default)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="TOML run configuration.")
@click.option("--seed", type=int, default=None, help="Master seed (overrides [experiment].master_seed).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory.")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default: ED_SIM_LOG_LEVEL or INFO).")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str], seed: Optional[int], out_dir: Optional[str], log_level: Optional[str]) -> None:
    """Emergency-department simulation with an admission-prediction detour policy."""
    logging.basicConfig(
        level=(log_level or settings.log_level()).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = Options(config_path=config_path, seed=seed, out_dir=out_dir)


@main.command()
@click.option("--n", "n_records", type=int, default=None, help="Number of records (default: [datagen].n_records).")
@click.pass_obj
@_handles_errors
def datagen(opts: Options, n_records: Optional[int]) -> None:
    """Generate synthetic patient records (records.csv)."""
    cfg = opts.config
    n = cfg.datagen.n_records if n_records is None else n_records
    _, summary = run_datagen(n, opts.master_seed, opts.out / RECORDS_FILE, cfg.population)
    click.echo(summary, nl=False)


@main.command()
@click.option("--records", "records_path", type=click.Path(dir_okay=False), default=None,
              help="Records CSV (default: <out>/records.csv, generated when absent).")
@click.pass_obj
@_handles_errors
def train(opts: Options, records_path: Optional[str]) -> None:
    """Train DT1, DT2 and kNN; print the accuracy/specificity/sensitivity table."""
    cfg = opts.config
    out = opts.out
    if records_path:
        records = records_from_csv(records_path)
    elif (out / RECORDS_FILE).exists():
        records = records_from_csv(out / RECORDS_FILE)
    else:
        records = generate_dataset(cfg.datagen.n_records, opts.master_seed, cfg.population)
        records_to_csv(records, out / RECORDS_FILE)
    report = train_models(records, opts.master_seed, cfg.datagen.train_fraction, cfg.tree, cfg.knn)
    write_training_artifacts(report, out)
    click.echo(report.table(), nl=False)
    click.echo()
    click.echo(report.dt2_rules.render(), nl=False)


@main.command()
@click.option("--reps", type=int, default=None, help="Replications per scenario.")
@click.option("--scenarios", default=None, help="Comma-separated scenario names (Baseline is always included).")
@click.option("--jobs", type=int, default=None, help="Worker processes.")
@click.option("--days", type=float, default=None, help="Simulated days per replication (overrides [ed].horizon).")
@click.option("--patient-log", is_flag=True, help="Also write the per-patient log and event trace of Baseline replication 0.")
@click.pass_obj
@_handles_errors
def simulate(
    opts: Options, reps: Optional[int], scenarios: Optional[str], jobs: Optional[int], days: Optional[float],
    patient_log: bool,
) -> None:
    """Run the scenarios and print the LOS/DTDT report."""
    cfg = opts.config
    ed = _with_days(cfg.ed, days)
    specs = resolve_scenarios(_scenario_names(scenarios, cfg.experiment.scenarios), cfg.experiment.custom_scenarios)
    n_reps = cfg.experiment.n_reps if reps is None else reps
    out = opts.out
    results = run_experiment(ed, specs, n_reps, opts.master_seed, opts.jobs(jobs), out_dir=out)
    text, csv_text = render_report(results)
    (out / "report.txt").write_text(text, encoding="utf-8")
    (out / "report.csv").write_text(csv_text, encoding="utf-8")
    if patient_log:
        run = simulate_once(ed.model_copy(update={"ml_enabled": False}), opts.master_seed, 0, trace=True)
        write_patient_log(run.patients, out / "patients_Baseline.csv")
        write_trace(run, out / "trace_Baseline.csv")
    click.echo(text, nl=False)


@main.command()
@click.option("--reps", type=int, default=None, help="Replications per grid point.")
@click.option("--jobs", type=int, default=None, help="Worker processes.")
@click.option("--days", type=float, default=None, help="Simulated days per replication (overrides [calibration].horizon_days).")
@click.pass_obj
@_handles_errors
def calibrate(opts: Options, reps: Optional[int], jobs: Optional[int], days: Optional[float]) -> None:
    """Grid-search capacities and routing scales towards the target Baseline LOS."""
    cfg = opts.config
    overrides: Dict[str, Any] = {}
    if reps is not None:
        overrides["n_reps"] = reps
    if days is not None:
        overrides["horizon_days"] = days
    params = CalibrationParams(**{**cfg.calibration.model_dump(), **overrides})
    result = run_calibration(cfg.ed, params, opts.master_seed, opts.jobs(jobs))
    write_calibration(result, opts.out)
    click.echo(result.toml_fragment(), nl=False)


@main.command()
@click.option("--scenarios", default=None, help="Comma-separated scenario names to include (default: all found).")
@click.pass_obj
@_handles_errors
def report(opts: Options, scenarios: Optional[str]) -> None:
    """Re-render the report from the replication CSVs in the output directory."""
    names = _scenario_names(scenarios, []) or None
    results = load_results(opts.out, names)
    text, csv_text = render_report(results)
    (opts.out / "report.txt").write_text(text, encoding="utf-8")
    (opts.out / "report.csv").write_text(csv_text, encoding="utf-8")
    click.echo(text, nl=False)


@main.command("config-reference")
@click.pass_obj
@_handles_errors
def config_reference(opts: Options) -> None:
    """Print every configuration key with its default as commented TOML; also writes <out>/config_reference.toml."""
    text = settings.render_reference(opts.config)
    (opts.out / REFERENCE_FILE).write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


if __name__ == "__main__":
    main()
