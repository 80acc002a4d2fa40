"""Acceptance criteria at their stated sizes and tolerances.

Each test prints one ``CRITERION n PASS|FAIL`` line.  Scenario functions are
the same ones the CLI runs, so these numbers match ``oraclelab run``.
"""

import filecmp
import time

import pytest

from _quick import QUICK
from oraclelab import experiments as ex
from oraclelab import infotheory
from oraclelab.parallel import default_workers

WORKERS = default_workers()
SEED = 20240601


def _report(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'}: {title} | {detail}")


def _failed(result):
    return {k: v for k, v in result.checks.items() if not v["pass"]}


def _run(name, trials=None, **params):
    t0 = time.perf_counter()
    res = ex.SCENARIOS[name].fn(params, trials, SEED, WORKERS)
    return res, time.perf_counter() - t0


def test_criterion_1_inequalities(capsys):
    t0 = time.perf_counter()
    ineq = infotheory.check_inequalities(batch=200, max_alphabet=4, rng_seed=SEED, tol=1e-9)
    hyb = [infotheory.check_hybrid_lemma(100, SEED, 1e-9, fam)
           for fam in ("random", "t_independent", "t_function_of_z")]
    elapsed = time.perf_counter() - t0
    violations = sum(h["violations"] for h in hyb)
    ok = ineq["pass"] and violations == 0 and elapsed < 60
    _report(capsys, 1, "inequality certification", ok,
            f"max violation {ineq['max_violation']:.2e}, hybrid violations {violations}, {elapsed:.1f}s")
    assert ineq["pass"] and ineq["max_violation"] <= 1e-9
    assert violations == 0
    assert elapsed < 60


def test_criterion_2_merkle_gap(capsys):
    res, elapsed = _run("merkle-gap", 2000)
    c = res.checks
    ok = res.passed and elapsed < 300
    _report(capsys, 2, "Merkle gap", ok,
            f"agreement {c['agreement_min']['value']:.3f}, "
            f"|bf-agr| {c['brute_force_full_vs_agreement']['value']:.3f}, "
            f"eve queries {c['eve_max_queries']['value']}, eve success {c['eve_success_max']['value']:.3f}, "
            f"gap {c['gap_brute_force_minus_eve']['value']:.3f}, {elapsed:.0f}s")
    assert res.passed, _failed(res)
    assert elapsed < 300


def test_criterion_3_eve_breaks_heavy_protocols(capsys):
    res, elapsed = _run("eve-attack", 2000, eve_samples=100_000, delta=0.25)
    c = res.checks
    ok = res.passed and elapsed < 600
    _report(capsys, 3, "heavy-query Eve on row/column protocols", ok,
            f"|succ-agr| plain {c['matrix_rowcol_success_vs_agreement']['value']:.3f}, "
            f"transformed {c['xor_masked_normal_form_success_vs_agreement']['value']:.3f}, {elapsed:.0f}s")
    assert res.passed, _failed(res)
    assert elapsed < 600


def test_criterion_4_adaptive_counterexample(capsys):
    res, elapsed = _run("counterexample", 1000, n=8)
    c = res.checks
    ok = res.passed and elapsed < 300
    _report(capsys, 4, "adaptive hash-chain counterexample", ok,
            f"eve queries {c['eve_max_queries']['value']}, eve success {c['eve_success_max']['value']:.3f}"
            f" <= {c['eve_success_max']['bound']:.3f}, "
            f"|sim-agr| {c['simulate_receiver_vs_agreement']['value']:.3f}, {elapsed:.0f}s")
    assert res.passed, _failed(res)
    assert elapsed < 300


@pytest.fixture(scope="module")
def disjointness():
    return _run("disjointness", 200, ell=32, universe_size=128, trials_per_size=10_000,
                epsilon=0.1, faith_ell=16, faith_universe=256, faith_trials=10_000)


def test_criterion_5_reduction(disjointness, capsys):
    res, elapsed = disjointness
    c = res.checks
    keys = ["suc0_abs", "suc1_min", "solver_error", "communication_bound"]
    ok = all(c[k]["pass"] for k in keys) and elapsed < 1200
    _report(capsys, 5, "reduction to set disjointness", ok,
            f"Suc(0) {c['suc0_abs']['value']:.4f}, Suc(1) {c['suc1_min']['value']:.3f}, "
            f"k {res.summary['k']}, error {c['solver_error']['value']:.3f}, {elapsed:.0f}s")
    for k in keys:
        assert c[k]["pass"], (k, c[k])
    assert elapsed < 1200


def test_criterion_6_transform_contracts(capsys):
    res, elapsed = _run("transform-check", 10_000, census_samples=10_000, delta=0.25)
    c = res.checks
    _report(capsys, 6, "transform contracts", res.passed,
            f"mismatches {c['matrix_rowcol_agreement_mismatches']['value']}/"
            f"{c['xor_masked_fixed_agreement_mismatches']['value']}, chi2 p "
            f"{c['matrix_rowcol_appended_bit_chi2_p']['value']:.3f}/"
            f"{c['xor_masked_fixed_appended_bit_chi2_p']['value']:.3f}, "
            f"max heaviness {c['eliminated_max_heaviness']['value']:.3f}, {elapsed:.0f}s")
    assert res.passed, _failed(res)


def test_criterion_7_emulation_faithfulness(disjointness, capsys):
    res, _ = disjointness
    c = res.checks
    ok = c["com_vs_native"]["pass"] and c["com_vs_dist_disjoint"]["pass"]
    _report(capsys, 7, "com emulation faithfulness", ok,
            f"|com-native| {c['com_vs_native']['value']:.4f} <= {c['com_vs_native']['bound']:.4f}, "
            f"|com-dist| on disjoint {c['com_vs_dist_disjoint']['value']:.4f}")
    assert ok, (c["com_vs_native"], c["com_vs_dist_disjoint"])


def test_criterion_8_determinism(tmp_path, capsys):
    diffs = []
    for name, (trials, params) in sorted(QUICK.items()):
        for run in ("a", "b"):
            ex.run_experiment(ex.ExperimentConfig(name, params, trials, SEED,
                                                  str(tmp_path / run), workers=1 if run == "a" else 2))
        for suffix in (".csv", ".json"):
            f = f"{name}{suffix}"
            if not filecmp.cmp(tmp_path / "a" / f, tmp_path / "b" / f, shallow=False):
                diffs.append(f)
    _report(capsys, 8, "determinism", not diffs,
            f"{len(QUICK)} scenarios rerun, differing files: {diffs or 'none'}")
    assert not diffs
