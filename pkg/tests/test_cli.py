import json
import subprocess
import sys

import pytest

from oraclelab import cli, experiments


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for name in experiments.SCENARIOS:
        assert name in out
    assert cli.main(["list", "--json"]) == 0
    assert len(json.loads(capsys.readouterr().out)["scenarios"]) == 6


def test_unknown_scenario_rejected():
    with pytest.raises(SystemExit):
        cli.main(["run", "nope"])


def test_bad_param_is_an_error(tmp_path, capsys):
    assert cli.main(["run", "lemma-check", "--param", "bogus=1", "--out", str(tmp_path)]) == 2
    assert cli.main(["run", "lemma-check", "--workers", "0"]) == 2


def test_run_uses_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(experiments.OUTPUT_ENV, str(tmp_path))
    assert cli.main(["run", "lemma-check", "--trials", "5", "--param", "hybrid_batch=3"]) == 0
    assert (tmp_path / "lemma-check.csv").exists()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "lemma-check", "trials": 4, "master_seed": 1,
                               "params": {"hybrid_batch": 2}}))
    out = tmp_path / "o"
    assert cli.main(["run", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == 0
    doc = json.loads((out / "lemma-check.json").read_text())
    assert doc["master_seed"] == 9 and doc["trials"] == 4 and doc["params"]["hybrid_batch"] == 2


def test_failing_assertions_exit_nonzero(tmp_path):
    # too few posterior draws: every attack is flagged and fails
    rc = cli.main(["run", "eve-attack", "--trials", "3", "--param", "eve_samples=3",
                   "--param", "eve_min_accepted=3", "--param", "census_samples=300",
                   "--out", str(tmp_path)])
    assert rc == 1
    doc = json.loads((tmp_path / "eve-attack.json").read_text())
    assert not doc["passed"]


def test_calibrate_writes_profile(tmp_path):
    assert cli.main(["calibrate", "--trials", "300", "--out", str(tmp_path)]) == 0
    prof = json.loads((tmp_path / "acc_profile.json").read_text())
    assert prof["chosen_c"] >= 1 and prof["protocol"]["name"] == "merkle_puzzles"


def test_agreement_subcommand(tmp_path, capsys):
    assert cli.main(["agreement", "merkle_puzzles", "--param", "ell=8", "--param",
                     "universe_size=64", "--trials", "50", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "agreement_merkle_puzzles.csv").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "oraclelab", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "merkle-gap" in r.stdout
