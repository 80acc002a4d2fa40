"""Command-line entry point: ``oraclelab {list,run,calibrate,agreement}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, protocols, reduction
from .core import estimate_agreement
from .errors import NoGapError, ParameterError, SpecError


def _kv(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ParameterError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _literal(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else experiments.default_output_dir()


def cmd_list(args) -> int:
    scenarios = experiments.list_scenarios()
    if args.json:
        print(json.dumps({"scenarios": scenarios, "protocols": sorted(protocols.REGISTRY)},
                         indent=2, sort_keys=True))
        return 0
    print("scenarios:")
    for s in scenarios:
        print(f"  {s['name']:<16} {s['description']}")
        print(f"  {'':<16} anchor: {s['anchor']}; default trials {s['default_trials']}")
    print("protocols:")
    for name in sorted(protocols.REGISTRY):
        print(f"  {name}")
    return 0


def cmd_run(args) -> int:
    params = _kv(args.param)
    overrides = {"trials": args.trials, "master_seed": args.seed, "workers": args.workers,
                 "output_path": args.out, "params": params}
    if args.config:
        if args.scenario:
            overrides["scenario"] = args.scenario
        cfg = experiments.ExperimentConfig.from_file(args.config, **overrides)
    else:
        if not args.scenario:
            raise ParameterError("give a scenario name or --config")
        cfg = experiments.ExperimentConfig(
            args.scenario, params, args.trials, args.seed or 0,
            args.out, args.workers or 1)
    if cfg.output_path is None:
        cfg.output_path = str(experiments.default_output_dir())
    doc = experiments.run_experiment(cfg)
    for name, c in doc["checks"].items():
        status = "PASS" if c["pass"] else "FAIL"
        print(f"{status} {name}: {c['value']} {c['op']} {c['bound']}")
    print(f"wrote {cfg.output_path}/{cfg.scenario}.csv and .json")
    return 0 if doc["passed"] else 1


def cmd_calibrate(args) -> int:
    params = {k: _literal(v) for k, v in _kv(args.param).items()}
    if args.protocol == "merkle_puzzles":
        params.setdefault("ell", 32)
        params.setdefault("universe_size", 128)
    ka = protocols.build(args.protocol, **params)
    ell = args.ell or ka.budget["A"]
    sizes = [int(s) for s in args.sizes.split(",")]
    profile = reduction.calibrate_acc_profile(ka, ell, args.trials or 10_000, sizes,
                                              args.seed or 0, args.workers or 1)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "acc_profile.json"
    path.write_text(profile.dumps() + "\n")
    for i in sizes:
        print(f"size {i}: com {profile.acc_com[i][0]:.4f} dist {profile.acc_dist[i][0]:.4f} "
              f"suc {profile.suc[i]:+.4f}")
    print(f"c={profile.chosen_c} d={profile.chosen_d} mode={profile.mode} "
          f"threshold={profile.threshold:.4f}")
    print(f"wrote {path}")
    return 0


def cmd_agreement(args) -> int:
    params = {k: _literal(v) for k, v in _kv(args.param).items()}
    spec = protocols.build(args.protocol, **params)
    trials = args.trials or 10_000
    est, ci = estimate_agreement(spec, trials, args.seed or 0, args.workers or 1)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    row = {"scenario": "agreement", "protocol": spec.name,
           "params": experiments._params_str(dict(spec.params)), "trials": trials,
           "agreement": est, "ci": ci}
    path = out / f"agreement_{spec.name}.csv"
    path.write_text(experiments.render_csv("agreement", [row]))
    print(f"{spec.name} agreement {est:.4f} +/- {ci:.4f} over {trials} runs")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--trials", type=int, default=None, help="trial count override")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")
    common.add_argument("--out", default=None,
                        help=f"output directory (default ${experiments.OUTPUT_ENV} or ./oraclelab-out)")
    common.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="scenario or constructor parameter, repeatable")

    p = argparse.ArgumentParser(prog="oraclelab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("list", help="list scenarios and protocols")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(fn=cmd_list)

    run = sub.add_parser("run", parents=[common], help="run a named scenario")
    run.add_argument("scenario", nargs="?", choices=sorted(experiments.SCENARIOS))
    run.add_argument("--config", help="JSON experiment config")
    run.set_defaults(fn=cmd_run)

    cal = sub.add_parser("calibrate", parents=[common],
                         help="estimate and store the accuracy profile of a protocol")
    cal.add_argument("--protocol", default="merkle_puzzles", choices=sorted(protocols.REGISTRY))
    cal.add_argument("--ell", type=int, default=None, help="set size (default A's budget)")
    cal.add_argument("--sizes", default="0,1,2", help="comma-separated intersection sizes")
    cal.set_defaults(fn=cmd_calibrate)

    ag = sub.add_parser("agreement", parents=[common], help="estimate a protocol's agreement")
    ag.add_argument("protocol", choices=sorted(protocols.REGISTRY))
    ag.set_defaults(fn=cmd_agreement)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except (ParameterError, SpecError, NoGapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
