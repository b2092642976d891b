from __future__ import annotations

import logging
import os
from pathlib import Path

# Make sure `app` imports work when run as `python scripts/run_pipeline.py`
import sys
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from app.config import load_run_config
from app.pipelines.datagen import RECORDS_FILE, run_datagen
from app.pipelines.experiments import render_report, resolve_scenarios, run_experiment
from app.pipelines.train import train_models, write_training_artifacts


DATA_DIR = ROOT / "data"


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    os.makedirs(DATA_DIR, exist_ok=True)
    cfg = load_run_config(sys.argv[1] if len(sys.argv) > 1 else None)
    seed = cfg.experiment.master_seed

    # 1) records
    records, summary = run_datagen(cfg.datagen.n_records, seed, DATA_DIR / RECORDS_FILE, cfg.population)
    print(summary)

    # 2) classifiers
    training = train_models(records, seed, cfg.datagen.train_fraction, cfg.tree, cfg.knn)
    write_training_artifacts(training, DATA_DIR)
    print(training.table())
    print(training.dt2_rules.render())

    # 3) scenarios
    specs = resolve_scenarios(cfg.experiment.scenarios, cfg.experiment.custom_scenarios)
    results = run_experiment(cfg.ed, specs, cfg.experiment.n_reps, seed, cfg.experiment.jobs, out_dir=DATA_DIR)
    text, csv_text = render_report(results)
    (DATA_DIR / "report.txt").write_text(text, encoding="utf-8")
    (DATA_DIR / "report.csv").write_text(csv_text, encoding="utf-8")
    print(text)

    print(f"Artifacts written under {DATA_DIR}")


if __name__ == "__main__":
    main()
