import csv
import json

import pytest

from _quick import QUICK
from oraclelab import experiments as ex
from oraclelab.errors import ParameterError


def test_six_scenarios_with_anchors():
    listed = ex.list_scenarios()
    assert [s["name"] for s in listed] == ["merkle-gap", "eve-attack", "counterexample",
                                          "disjointness", "lemma-check", "transform-check"]
    assert all(s["anchor"] for s in listed)


def test_config_validation():
    with pytest.raises(ParameterError):
        ex.ExperimentConfig("nope")
    with pytest.raises(ParameterError):
        ex.ExperimentConfig("lemma-check", trials=0)
    with pytest.raises(ParameterError):
        ex.execute_scenario(ex.ExperimentConfig("lemma-check", {"bogus": 1}, 2))


def test_lemma_check_outputs(tmp_path):
    doc = ex.run_experiment(ex.ExperimentConfig("lemma-check", {}, 20, 0, str(tmp_path)))
    assert doc["passed"]
    text = (tmp_path / "lemma-check.csv").read_text()
    assert text.startswith(f"# oraclelab-csv v{ex.CSV_VERSION} scenario=lemma-check\n")
    rows = list(csv.DictReader(text.splitlines()[1:]))
    assert {r["metric"] for r in rows} >= {"pinsker", "hybrid_random"}
    summary = json.loads((tmp_path / "lemma-check.json").read_text())
    assert summary["master_seed"] == 0 and "seed_scheme" in summary
    assert "seconds" in json.loads((tmp_path / "lemma-check.timing.json").read_text())


def test_merkle_gap_curve_budgets(tmp_path):
    trials, params = QUICK["merkle-gap"]
    ex.run_experiment(ex.ExperimentConfig("merkle-gap", params, trials, 0, str(tmp_path)))
    rows = list(csv.DictReader((tmp_path / "merkle-gap.csv").read_text().splitlines()[1:]))
    bf = [int(r["budget"]) for r in rows if r["attacker"] == "brute_force"]
    assert bf == [0, 16, 256]   # ell^2 equals |S| here
    eve = [r for r in rows if r["attacker"] == "heavy_query_eve"][0]
    assert float(eve["delta"]) == 0.25 and int(eve["N"]) == 200


@pytest.mark.parametrize("name", sorted(QUICK))
def test_workers_do_not_change_results(name, tmp_path):
    trials, params = QUICK[name]
    one = ex.execute_scenario(ex.ExperimentConfig(name, params, trials, 3, workers=1))
    two = ex.execute_scenario(ex.ExperimentConfig(name, params, trials, 3, workers=2))
    assert ex.render_csv(name, one.rows) == ex.render_csv(name, two.rows)
    assert one.summary == two.summary


def test_flagged_trials_carry_seeds():
    res = ex.execute_scenario(ex.ExperimentConfig(
        "eve-attack", {"eve_samples": 3, "eve_min_accepted": 3, "census_samples": 300}, 4, 0))
    flagged = res.summary["flagged_trials"]
    assert flagged and {"oracle_seed", "run_seed", "attack_seed", "trial"} <= set(flagged[0])


def test_independence_pvalue():
    assert ex.independence_pvalue([0, 0, 1, 1] * 50, [0, 1, 0, 1] * 50) > 0.5
    assert ex.independence_pvalue([0] * 100 + [1] * 100, [0] * 100 + [1] * 100) < 1e-6
