"""Named, seeded experiment scenarios with CSV and JSON reports.

Every scenario is a function ``(params, trials, seed, workers) -> ScenarioResult``.
Rows and summaries depend only on the config and master seed; wall-clock
timings are written to a separate file so reruns compare byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy import stats

from . import eavesdroppers as ev
from . import infotheory, protocols, reduction, transforms
from .core import agreement, communication_cost, estimate_agreement, hoeffding_halfwidth, run_trial
from .errors import ParameterError
from .parallel import parallel_map
from .seeding import derive_seed

CSV_VERSION = 1
OUTPUT_ENV = "ORACLELAB_OUTPUT_DIR"
COLUMNS = ["scenario", "protocol", "params", "attacker", "budget", "delta", "N", "trials",
           "agreement", "success", "ci", "mean_queries", "truncation_flags", "metric", "value"]


@dataclass
class ExperimentConfig:
    scenario: str
    params: Dict[str, Any] = field(default_factory=dict)
    trials: Optional[int] = None
    master_seed: int = 0
    output_path: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ParameterError(f"unknown scenario {self.scenario!r}; choose from {list(SCENARIOS)}")
        if self.trials is not None and self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        with open(path) as fh:
            obj = json.load(fh)
        params = dict(obj.get("params", {}))
        params.update(overrides.pop("params", None) or {})
        obj["params"] = params
        obj.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**obj)


@dataclass
class ScenarioResult:
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any]
    checks: Dict[str, Dict[str, Any]]

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks.values())


def _check(checks, name, value, op, bound):
    ok = {"<=": value <= bound, "<": value < bound, ">=": value >= bound, "==": value == bound}[op]
    checks[name] = {"value": value, "op": op, "bound": bound, "pass": bool(ok)}


def _params_str(params: Dict[str, Any]) -> str:
    return ";".join(f"{k}={params[k]}" for k in sorted(params))


def _resolve(defaults: Dict[str, Any], given: Dict[str, Any]) -> Dict[str, Any]:
    unknown = set(given) - set(defaults)
    if unknown:
        raise ParameterError(f"unknown parameters {sorted(unknown)}; allowed {sorted(defaults)}")
    out = dict(defaults)
    for k, v in given.items():
        d = defaults[k]
        if isinstance(d, bool):
            out[k] = v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes")
        elif isinstance(d, int) and not isinstance(v, bool):
            out[k] = int(v)
        elif isinstance(d, float):
            out[k] = float(v)
        else:
            out[k] = v
    return out


def _attack_row(scenario, spec, name, rep: ev.AttackReport, **extra):
    row = {"scenario": scenario, "protocol": spec.name, "params": _params_str(dict(spec.params)),
           "attacker": name, "trials": rep.trials, "agreement": rep.agreement,
           "success": rep.success, "ci": rep.ci_halfwidth, "mean_queries": rep.mean_queries,
           "truncation_flags": rep.truncations + rep.insufficient}
    row.update(extra)
    return row


def _flagged(pairs, seed, label):
    out = []
    for t, (_, o) in enumerate(pairs):
        if o.truncated or o.insufficient:
            out.append({"attacker": label, "trial": t, "oracle_seed": derive_seed(seed, t, "oracle"),
                        "run_seed": derive_seed(seed, t, "run"),
                        "attack_seed": derive_seed(seed, t, "attack"),
                        "truncated": o.truncated, "insufficient": o.insufficient})
    return out


SEED_SCHEME = ("trial t of a run keyed by s uses oracle seed derive_seed(s, t, 'oracle'), "
               "protocol coins derive_seed(s, t, 'run') and attacker coins "
               "derive_seed(s, t, 'attack'); derive_seed is blake2b over the label path")


# -- scenarios ------------------------------------------------------------------------

MERKLE_GAP = {"ell": 16, "universe_size": 256, "range_bits": 16, "q": 0, "eve_samples": 300,
              "eve_min_accepted": 100, "sampler_draws": 2000, "budgets": ""}


def scenario_merkle_gap(params, trials, seed, workers) -> ScenarioResult:
    p = _resolve(MERKLE_GAP, params)
    trials = trials or 2000
    ell, size = p["ell"], p["universe_size"]
    spec = protocols.merkle_puzzles(ell, size, range_bits=p["range_bits"])
    q = p["q"] or ell * ell
    cfg = ev.EveConfig(ev.default_delta(ell, q), p["eve_samples"], q, p["eve_min_accepted"])
    if p["budgets"]:
        budgets = sorted({int(b) for b in str(p["budgets"]).split(",")} | {size})
    else:
        budgets = sorted({0, ell, ell * ell, size})
    run_seed = derive_seed(seed, "runs")
    rows, flagged, reports = [], [], {}
    for b in budgets:
        pairs = ev.attack_trials(spec, ev.brute_force_attacker(b, p["sampler_draws"]), trials,
                                 run_seed, workers)
        reports[b] = ev.summarize(pairs)
        flagged += _flagged(pairs, run_seed, f"brute_force@{b}")
        rows.append(_attack_row("merkle-gap", spec, "brute_force", reports[b], budget=b))
    eve = ev.HeavyQueryEve(spec, cfg, derive_seed(seed, "eve"))
    pairs = ev.attack_trials(spec, eve, trials, run_seed, workers)
    eve_rep = ev.summarize(pairs)
    flagged += _flagged(pairs, run_seed, "heavy_query_eve")
    rows.append(_attack_row("merkle-gap", spec, "heavy_query_eve", eve_rep, budget=q,
                            delta=cfg.delta, N=cfg.mc_samples))
    full = reports[size]
    checks = {}
    _check(checks, "agreement_min", full.agreement, ">=", 0.55)
    _check(checks, "brute_force_full_vs_agreement", abs(full.success - full.agreement), "<=", 0.05)
    _check(checks, "eve_max_queries", eve_rep.max_queries, "==", 0)
    _check(checks, "eve_success_max", eve_rep.success, "<=", 0.1)
    _check(checks, "gap_brute_force_minus_eve", full.success - eve_rep.success, ">=", 0.3)
    drops = [reports[a].success - reports[b].success for a, b in zip(budgets, budgets[1:])]
    _check(checks, "budget_curve_max_drop", max(drops, default=0.0), "<=",
           2 * hoeffding_halfwidth(trials))
    summary = {"delta": cfg.delta, "q": q, "budgets": budgets, "flagged_trials": flagged}
    return ScenarioResult(rows, summary, checks)


EVE_ATTACK = {"ell": 16, "range_bits": 16, "delta": 0.25, "eve_samples": 100_000,
              "eve_min_accepted": 10, "census_samples": 10_000}


def scenario_eve_attack(params, trials, seed, workers) -> ScenarioResult:
    p = _resolve(EVE_ATTACK, params)
    trials = trials or 2000
    ell, delta = p["ell"], p["delta"]
    q = int(round(4 * ell / delta))
    cfg = ev.EveConfig(delta, p["eve_samples"], q, p["eve_min_accepted"])
    base = protocols.matrix_rowcol(ell, p["range_bits"])
    fixed, table = transforms.eliminate_apriori_heavy(
        protocols.xor_masked_rowcol(ell, p["range_bits"]), delta, p["census_samples"],
        derive_seed(seed, "eliminate"))
    normal = transforms.key_as_last_query(fixed)
    rows, checks, flagged = [], {}, []
    for label, spec in (("matrix_rowcol", base), ("xor_masked_normal_form", normal)):
        run_seed = derive_seed(seed, "runs", label)
        eve = ev.HeavyQueryEve(spec, cfg, derive_seed(seed, "eve", label))
        pairs = ev.attack_trials(spec, eve, trials, run_seed, workers)
        rep = ev.summarize(pairs)
        flagged += _flagged(pairs, run_seed, label)
        rows.append(_attack_row("eve-attack", spec, "heavy_query_eve", rep, budget=q,
                                delta=delta, N=cfg.mc_samples))
        _check(checks, f"{label}_success_vs_agreement", abs(rep.success - rep.agreement), "<=", 0.05)
    summary = {"delta": delta, "q": q, "fixed_points": sorted(table),
               "provenance": [dict(x) for x in normal.provenance], "flagged_trials": flagged}
    return ScenarioResult(rows, summary, checks)


COUNTEREXAMPLE = {"n": 8, "eve_samples": 2000, "eve_min_accepted": 100}


def scenario_counterexample(params, trials, seed, workers) -> ScenarioResult:
    p = _resolve(COUNTEREXAMPLE, params)
    trials = trials or 1000
    spec = protocols.hash_chain_adaptive(p["n"])
    ell = spec.params["ell"]
    q = ell * ell
    cfg = ev.EveConfig(ev.default_delta(ell, q), p["eve_samples"], q, p["eve_min_accepted"])
    run_seed = derive_seed(seed, "runs")
    eve = ev.HeavyQueryEve(spec, cfg, derive_seed(seed, "eve"))
    eve_pairs = ev.attack_trials(spec, eve, trials, run_seed, workers)
    sim_pairs = ev.attack_trials(spec, ev.simulate_receiver_attacker(), trials, run_seed, workers)
    eve_rep, sim_rep = ev.summarize(eve_pairs), ev.summarize(sim_pairs)
    rows = [
        _attack_row("counterexample", spec, "heavy_query_eve", eve_rep, budget=q,
                    delta=cfg.delta, N=cfg.mc_samples),
        _attack_row("counterexample", spec, "simulate_receiver", sim_rep, budget=spec.budget["B"]),
    ]
    checks = {}
    _check(checks, "eve_max_queries", eve_rep.max_queries, "==", 0)
    _check(checks, "eve_success_max", eve_rep.success, "<=", 2 / ell + 3 * eve_rep.ci_halfwidth)
    _check(checks, "simulate_receiver_vs_agreement", abs(sim_rep.success - sim_rep.agreement), "<=", 0.05)
    _check(checks, "simulate_receiver_max_queries", sim_rep.max_queries, "<=", 2 * ell)
    summary = {"delta": cfg.delta, "q": q, "ell": ell,
               "flagged_trials": _flagged(eve_pairs, run_seed, "heavy_query_eve")}
    return ScenarioResult(rows, summary, checks)


DISJOINTNESS = {"ell": 32, "universe_size": 128, "trials_per_size": 10_000, "sizes": "0,1,2",
                "epsilon": 0.1, "faith_ell": 16, "faith_universe": 256, "faith_trials": 10_000}


def _rss(*cis):
    return math.sqrt(sum(c * c for c in cis))


def faithfulness(ell, universe_size, trials, seed, workers):
    """Agreement of native runs, com emulation on uniform inputs and both
    emulations on disjoint inputs."""
    ka = protocols.merkle_puzzles(ell, universe_size)
    native = estimate_agreement(ka, trials, derive_seed(seed, "native"))
    com, dist = reduction.Emulation(ka, reduction.COM), reduction.Emulation(ka, reduction.DIST)

    def uniform_inputs(t):
        rng = random.Random(derive_seed(seed, "uniform", t))
        X = rng.sample(range(universe_size), ell)
        Y = rng.sample(range(universe_size), ell)
        return agreement(com.run(X, Y, derive_seed(seed, "com_uniform", t)))

    com_uniform = sum(parallel_map(uniform_inputs, trials, workers)) / trials
    ci = hoeffding_halfwidth(trials)
    com0 = reduction.emulation_agreement(com, universe_size, 0, trials, derive_seed(seed, "disjoint"), workers)
    dist0 = reduction.emulation_agreement(dist, universe_size, 0, trials, derive_seed(seed, "disjoint"), workers)
    return {"native": native, "com_uniform": (com_uniform, ci), "com_disjoint": com0,
            "dist_disjoint": dist0}


def scenario_disjointness(params, trials, seed, workers) -> ScenarioResult:
    p = _resolve(DISJOINTNESS, params)
    instances = trials or 200
    ell = p["ell"]
    ka = protocols.merkle_puzzles(ell, p["universe_size"])
    sizes = [int(s) for s in str(p["sizes"]).split(",")]
    profile = reduction.calibrate_acc_profile(ka, ell, p["trials_per_size"], sizes,
                                              derive_seed(seed, "calibrate"), workers)
    cfg = reduction.SetSolverConfig.from_profile(profile, p["epsilon"])
    cc = sum(ka.message_widths)

    def solve(i):
        inst = reduction.sample_hard_instance(ell, derive_seed(seed, "instance", i))
        tr = reduction.solve_disjointness_trace(inst, ka, profile, cfg, derive_seed(seed, "solve", i))
        return tr.disjoint != inst.disjoint, tr.communication

    results = parallel_map(solve, instances, workers)
    errors = sum(e for e, _ in results)
    error_rate = errors / instances
    rows = []
    for i in sizes:
        for mode, acc in (("com", profile.acc_com[i]), ("dist", profile.acc_dist[i])):
            rows.append({"scenario": "disjointness", "protocol": ka.name,
                         "params": _params_str(dict(ka.params)), "attacker": mode, "budget": i,
                         "trials": p["trials_per_size"], "agreement": acc[0], "ci": acc[1],
                         "metric": "intersection_size", "value": i})
    ci_inst = hoeffding_halfwidth(instances)
    rows.append({"scenario": "disjointness", "protocol": ka.name, "params": _params_str(dict(ka.params)),
                 "attacker": "set_solver", "trials": instances, "ci": ci_inst,
                 "metric": "error_rate", "value": error_rate})
    faith = faithfulness(p["faith_ell"], p["faith_universe"], p["faith_trials"],
                         derive_seed(seed, "faithfulness"), workers)
    for name, (est, ci) in faith.items():
        rows.append({"scenario": "disjointness", "protocol": "merkle_puzzles",
                     "params": f"ell={p['faith_ell']};universe_size={p['faith_universe']}",
                     "attacker": name, "trials": p["faith_trials"], "agreement": est, "ci": ci,
                     "metric": "faithfulness"})
    checks = {}
    ci_s = _rss(profile.acc_com[0][1], profile.acc_dist[0][1]) if 0 in sizes else 0.0
    if 0 in sizes:
        _check(checks, "suc0_abs", abs(profile.suc[0]), "<=", 2 * ci_s)
    if 1 in sizes:
        _check(checks, "suc1_min", profile.suc[1], ">=", 0.5)
    _check(checks, "solver_error", error_rate, "<=", p["epsilon"] + 0.05)
    _check(checks, "communication_bound", max(b for _, b in results), "<=", cfg.k * (cc + 1) + 1)
    nat, comu = faith["native"], faith["com_uniform"]
    _check(checks, "com_vs_native", abs(nat[0] - comu[0]), "<=", 2 * _rss(nat[1], comu[1]))
    c0, d0 = faith["com_disjoint"], faith["dist_disjoint"]
    _check(checks, "com_vs_dist_disjoint", abs(c0[0] - d0[0]), "<=", 2 * _rss(c0[1], d0[1]))
    summary = {"profile": profile.to_json(), "k": cfg.k, "threshold": cfg.threshold, "c": cfg.c,
               "errors": errors, "instances": instances}
    return ScenarioResult(rows, summary, checks)


LEMMA_CHECK = {"max_alphabet": 4, "hybrid_batch": 100, "tol": 1e-9}


def scenario_lemma_check(params, trials, seed, workers) -> ScenarioResult:
    p = _resolve(LEMMA_CHECK, params)
    batch = trials or 200
    ineq = infotheory.check_inequalities(batch, p["max_alphabet"], derive_seed(seed, "ineq"), p["tol"])
    rows, checks = [], {}
    for name, r in ineq["inequalities"].items():
        rows.append({"scenario": "lemma-check", "trials": r["instances"], "metric": name,
                     "value": r["max_violation"]})
        _check(checks, name, r["max_violation"], "<=", p["tol"])
    hybrids = {}
    for fam in ("random", "t_independent", "t_function_of_z"):
        h = infotheory.check_hybrid_lemma(p["hybrid_batch"], derive_seed(seed, "hybrid"), p["tol"], fam)
        hybrids[fam] = h
        rows.append({"scenario": "lemma-check", "trials": h["batch"], "metric": f"hybrid_{fam}",
                     "value": h["max_violation"]})
        _check(checks, f"hybrid_{fam}_violations", h["violations"], "==", 0)
    return ScenarioResult(rows, {"inequalities": ineq, "hybrid": hybrids}, checks)


TRANSFORM_CHECK = {"ell": 16, "range_bits": 16, "delta": 0.25, "census_samples": 10_000,
                   "chi2_alpha": 0.01}


def _prefix_bucket(m1, m2_base, w2):
    return (m1.bits, m2_base >> max(0, w2 - 2))


def coupled_key_transform(spec, runs, seed, workers):
    """Agreement mismatches between ``spec`` and its key-as-last-query form
    on coupled runs, and the appended bit tabulated against a transcript bucket."""
    ext = transforms.key_as_last_query(spec)
    w2 = spec.message_widths[1]

    def one(t):
        a, _ = run_trial(spec, seed, t)
        b, _ = run_trial(ext, seed, t)
        same_prefix = (b.transcript[0] == a.transcript[0]
                       and b.transcript[1].bits >> 1 == a.transcript[1].bits)
        return (agreement(a) != agreement(b), same_prefix,
                _prefix_bucket(b.transcript[0], a.transcript[1].bits, w2), b.transcript[1].bits & 1,
                communication_cost(b) - communication_cost(a))

    return ext, parallel_map(one, runs, workers)


def independence_pvalue(buckets, bits) -> float:
    """Chi-square test of the bit against the bucket (empty rows dropped)."""
    keys = sorted(set(buckets))
    idx = {k: i for i, k in enumerate(keys)}
    table = np.zeros((len(keys), 2))
    for k, b in zip(buckets, bits):
        table[idx[k], b] += 1
    table = table[table.sum(axis=1) > 0]
    if table.shape[0] < 2 or (table.sum(axis=0) == 0).any():
        return 1.0
    return float(stats.chi2_contingency(table, correction=False)[1])


def scenario_transform_check(params, trials, seed, workers) -> ScenarioResult:
    p = _resolve(TRANSFORM_CHECK, params)
    runs = trials or 10_000
    ell, r = p["ell"], p["range_bits"]
    rows, checks = [], {}
    base = protocols.matrix_rowcol(ell, r)
    masked, table = transforms.eliminate_apriori_heavy(
        protocols.xor_masked_rowcol(ell, r), p["delta"], p["census_samples"],
        derive_seed(seed, "eliminate"))
    for label, spec in (("matrix_rowcol", base), ("xor_masked_fixed", masked)):
        ext, res = coupled_key_transform(spec, runs, derive_seed(seed, "coupled", label), workers)
        mism = sum(x[0] for x in res)
        prefix_ok = all(x[1] for x in res)
        pval = independence_pvalue([x[2] for x in res], [x[3] for x in res])
        extra_bits = sorted({x[4] for x in res})
        for metric, value in (("agreement_mismatches", mism), ("prefix_preserved", int(prefix_ok)),
                              ("appended_bit_chi2_p", pval), ("extra_bits", extra_bits[0])):
            rows.append({"scenario": "transform-check", "protocol": ext.name,
                         "params": _params_str(dict(ext.params)), "trials": runs,
                         "metric": metric, "value": value})
        _check(checks, f"{label}_agreement_mismatches", mism, "==", 0)
        _check(checks, f"{label}_prefix_preserved", prefix_ok, "==", True)
        _check(checks, f"{label}_appended_bit_chi2_p", pval, ">=", p["chi2_alpha"])
        _check(checks, f"{label}_extra_bits", extra_bits, "==", [1])
    census = ev.prior_census(masked, p["census_samples"], derive_seed(seed, "post_census"))
    top = max(census.values(), default=0.0)
    rows.append({"scenario": "transform-check", "protocol": masked.name,
                 "params": _params_str(dict(masked.params)), "delta": p["delta"],
                 "N": p["census_samples"], "metric": "max_prior_heaviness", "value": top})
    _check(checks, "eliminated_max_heaviness", top, "<", p["delta"])
    summary = {"fixed_points": sorted(table), "provenance": [dict(x) for x in masked.provenance]}
    return ScenarioResult(rows, summary, checks)


@dataclass(frozen=True)
class Scenario:
    name: str
    fn: Callable
    defaults: Dict[str, Any]
    default_trials: int
    description: str
    anchor: str


SCENARIOS: Dict[str, Scenario] = {s.name: s for s in [
    Scenario("merkle-gap", scenario_merkle_gap, MERKLE_GAP, 2000,
             "Merkle's puzzles: agreement, brute-force success by query budget, and the "
             "heavy-query eavesdropper with q = ell^2",
             "quadratic security gap of Merkle's puzzles"),
    Scenario("eve-attack", scenario_eve_attack, EVE_ATTACK, 2000,
             "heavy-query eavesdropper on the row/column protocol and on the masked variant "
             "after both normal-form transforms",
             "heavy-query eavesdropper breaks two-message protocols with heavy intersections"),
    Scenario("counterexample", scenario_counterexample, COUNTEREXAMPLE, 1000,
             "adaptive hash-chain protocol: the heavy-query eavesdropper finds nothing heavy "
             "while re-running the receiver succeeds",
             "adaptive protocol without heavy queries"),
    Scenario("disjointness", scenario_disjointness, DISJOINTNESS, 200,
             "com/dist emulations, accuracy profile by intersection size, and the "
             "set-disjointness solver on the hard input distribution",
             "reduction from uniform-query key agreement to set disjointness"),
    Scenario("lemma-check", scenario_lemma_check, LEMMA_CHECK, 200,
             "exact certification of the information and statistical-distance inequalities "
             "and of the hybrid bound",
             "exact information inequalities and the hybrid bound"),
    Scenario("transform-check", scenario_transform_check, TRANSFORM_CHECK, 10_000,
             "key-as-last-query preserves agreement and appends an independent bit; "
             "fixing heavy answers removes a-priori heavy queries",
             "normal forms: no a-priori heavy queries, key as last query"),
]}


def list_scenarios() -> List[Dict[str, str]]:
    return [{"name": s.name, "description": s.description, "anchor": s.anchor,
             "default_trials": s.default_trials, "params": dict(s.defaults)}
            for s in SCENARIOS.values()]


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "oraclelab-out"))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating, np.integer)):
        return repr(v.item())
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def render_csv(scenario: str, rows: List[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    buf.write(f"# oraclelab-csv v{CSV_VERSION} scenario={scenario}\n")
    w = csv.DictWriter(buf, fieldnames=COLUMNS, restval="", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def execute_scenario(config: ExperimentConfig) -> ScenarioResult:
    sc = SCENARIOS[config.scenario]
    return sc.fn(config.params, config.trials, config.master_seed, config.workers)


def run_experiment(config: ExperimentConfig) -> Dict[str, Any]:
    """Run a scenario and write ``<scenario>.csv``, ``<scenario>.json`` and
    ``<scenario>.timing.json`` under the output directory.

    Returns the summary document, whose ``passed`` flag is the exit status.
    """
    out = Path(config.output_path) if config.output_path else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    res = execute_scenario(config)
    elapsed = time.perf_counter() - t0
    sc = SCENARIOS[config.scenario]
    doc = {
        "scenario": config.scenario, "csv_version": CSV_VERSION,
        "master_seed": config.master_seed,
        "trials": config.trials or sc.default_trials,
        "params": _resolve(sc.defaults, config.params),
        "seed_scheme": SEED_SCHEME,
        "checks": res.checks, "passed": res.passed, "summary": res.summary,
    }
    doc = _jsonable(doc)
    (out / f"{config.scenario}.csv").write_text(render_csv(config.scenario, res.rows))
    (out / f"{config.scenario}.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    timing = {"scenario": config.scenario, "seconds": elapsed, "workers": config.workers}
    (out / f"{config.scenario}.timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    return doc
