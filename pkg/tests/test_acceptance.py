"""
End-to-end checks at full size: classifier recoverability, the calibrated
Baseline band, and the direction and significance of the scenario effects.
"""
import pytest

from app.models.schemas import EDConfig, PopulationSpec, ScenarioSpec
from app.pipelines.datagen import generate_dataset
from app.pipelines.experiments import compare, run_experiment, run_scenario, standard_scenarios
from app.pipelines.train import train_models
from app.services.features import DT1_FEATURES
from app.services.metrics import evaluate
from app.services.tree import extract_rules, train_tree

pytestmark = pytest.mark.slow

JOBS = 4


@pytest.fixture(scope="module")
def results():
    runs = run_experiment(EDConfig(), standard_scenarios(), n_reps=30, master_seed=2021, jobs=JOBS)
    return {r.name: r for r in runs}


def _mean_utilization(result, resource):
    return sum(r.utilization[resource] for r in result.replications) / result.n_reps


def test_tree_recovers_noisy_rules():
    spec = PopulationSpec(label_noise=0.10, target_admit_rate=None)
    records = generate_dataset(5000, seed=17, spec=spec)
    train, test = records[:3500], records[3500:]
    tree = train_tree(train, DT1_FEATURES, name="DT1")
    ev = evaluate(tree.predict_many(test), [r.admitted for r in test])
    assert ev.accuracy >= 0.85

    rules = extract_rules(tree)
    probe = generate_dataset(10_000, seed=18, spec=spec)
    mismatches = sum(rules.predict(r) != tree.predict(r) for r in probe)
    assert mismatches == 0


def test_default_pipeline_signature():
    report = train_models(generate_dataset(500, seed=2021), seed=2021)
    dt2 = report.evaluations["DT2"]
    assert 0.70 <= dt2.accuracy <= 0.95
    assert dt2.specificity > dt2.sensitivity


def test_baseline_in_calibrated_band_over_thirty_days():
    month = EDConfig(horizon=30 * 1440.0)
    baseline = run_scenario(month, ScenarioSpec(name="Baseline"), 30, master_seed=2021, jobs=JOBS)
    assert 88.8 <= baseline.mean_los <= 108.5


@pytest.mark.parametrize("name", ["Baseline", "A", "B"])
def test_detour_policy_lowers_los_and_dtdt(results, name):
    plain, ml = results[name], results[f"{name}+ML"]
    cmp = compare(plain, ml)
    assert ml.mean_los < plain.mean_los
    assert ml.mean_dtdt < plain.mean_dtdt
    assert cmp.significant_los
    assert cmp.significant_dtdt
    assert cmp.significant_at_05


def test_b_ml_reduction_band(results):
    pct = compare(results["B"], results["B+ML"]).pct_change_los
    assert -20.0 <= pct <= -2.0


def test_staffing_ordering(results):
    base, a, b = results["Baseline"], results["A"], results["B"]
    assert b.mean_los <= a.mean_los < base.mean_los
    assert compare(base, a).significant_los
    assert compare(a, b).significant_los


def test_orderly_is_loaded_in_scenario_a(results):
    a_util = _mean_utilization(results["A"], "orderlies")
    assert a_util > 0.12
    assert _mean_utilization(results["B"], "orderlies") == pytest.approx(a_util / 2, rel=0.05)
