from click.testing import CliRunner

from app.cli import main
from app.models.schemas import RECORD_FIELDS


def _run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_datagen_line_counts(tmp_path):
    result = _run("--out", tmp_path, "datagen", "--n", 0)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "records.csv").read_text().splitlines() == [",".join(RECORD_FIELDS)]

    result = _run("--out", tmp_path, "datagen", "--n", 50)
    assert result.exit_code == 0, result.output
    assert len((tmp_path / "records.csv").read_text().splitlines()) == 51
    assert result.output.startswith("records: 50")


def test_datagen_is_byte_identical(tmp_path):
    _run("--out", tmp_path / "a", "--seed", 11, "datagen", "--n", 40)
    _run("--out", tmp_path / "b", "--seed", 11, "datagen", "--n", 40)
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_config_reference_lists_every_section(tmp_path):
    result = _run("--out", tmp_path, "config-reference")
    assert result.exit_code == 0
    assert (tmp_path / "config_reference.toml").read_text() == result.output
    for section in ("[population]", "[datagen]", "[tree]", "[knn]", "[ed]", "[ed.capacities]", "[experiment]",
                    "[calibration]", "[output]"):
        assert section in result.output
    assert "DTDT is measured under plain FIFO" in result.output


def test_unknown_config_key_is_a_configuration_error(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[ed]\nnurse_count = 3\n")
    result = _run("--config", cfg, "--out", tmp_path, "datagen", "--n", 5)
    assert result.exit_code == 1
    assert "configuration error" in result.output


def test_malformed_toml_is_a_configuration_error(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[ed\n")
    assert _run("--config", cfg, "datagen").exit_code == 1
    assert _run("--config", tmp_path / "missing.toml", "datagen").exit_code == 1


def test_config_values_are_used(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'[datagen]\nn_records = 12\n\n[output]\nout_dir = "{(tmp_path / "cfg_out").as_posix()}"\n')
    result = _run("--config", cfg, "datagen")
    assert result.exit_code == 0, result.output
    assert len((tmp_path / "cfg_out" / "records.csv").read_text().splitlines()) == 13


def test_train_writes_artifacts(tmp_path):
    assert _run("--out", tmp_path, "datagen", "--n", 200).exit_code == 0
    result = _run("--out", tmp_path, "train")
    assert result.exit_code == 0, result.output
    assert "train 140 / test 60" in result.output
    for name in ("metrics.csv", "tree_dt1.txt", "tree_dt2.txt"):
        assert (tmp_path / name).exists()


def test_simulate_baseline_only(tmp_path):
    result = _run("--out", tmp_path, "simulate", "--scenarios", "baseline", "--reps", 2, "--days", 2, "--patient-log")
    assert result.exit_code == 0, result.output
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("Baseline,")
    assert (tmp_path / "scenario_Baseline.csv").exists()
    assert (tmp_path / "patients_Baseline.csv").exists()
    assert (tmp_path / "trace_Baseline.csv").exists()

    again = _run("--out", tmp_path, "report")
    assert again.exit_code == 0
    assert again.output == result.output


def test_same_seed_same_report(tmp_path):
    for sub in ("a", "b"):
        result = _run("--out", tmp_path / sub, "--seed", 7, "simulate", "--scenarios", "Baseline,A+ML",
                      "--reps", 2, "--days", 2)
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "report.txt").read_text() == (tmp_path / "b" / "report.txt").read_text()


def test_report_without_replications_is_a_runtime_error(tmp_path):
    result = _run("--out", tmp_path, "report")
    assert result.exit_code == 2
    assert "error:" in result.output


def test_unknown_scenario_is_a_configuration_error(tmp_path):
    result = _run("--out", tmp_path, "simulate", "--scenarios", "C", "--reps", 2, "--days", 2)
    assert result.exit_code == 1


def test_calibrate_days_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[calibration]\nn_reps = 2\ndoctors = [4]\nnurses = [5]\norderlies = [1]\n")
    result = _run("--config", cfg, "--out", tmp_path, "calibrate", "--days", 2)
    assert result.exit_code == 0, result.output
    assert "xray_routing_scale = 0.15" in result.output
    assert len((tmp_path / "calibration_grid.csv").read_text().splitlines()) == 2

    result = _run("--config", cfg, "--out", tmp_path, "calibrate", "--days", 0.5)
    assert result.exit_code == 1
