"""``frl-audit`` command line.

Exit codes: 0 success, 1 usage or config error, 2 runtime failure (the
run's ``failures.json`` lists what broke).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, mi_lab, selftest
from .numerics import ACTIVATIONS

PIPELINE_VERBS = ("prepare", "tune", "sweep", "mine", "report")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    parser = Parser(prog="frl-audit", description="Severe testing of fair representation learners.")
    verbs = parser.add_subparsers(dest="verb", metavar="VERB", required=True)
    helps = {
        "prepare": "write dataset facts and per-repeat splits",
        "tune": "random hyperparameter search at gamma = 0",
        "sweep": "refit the tuned model at every gamma; write metrics and representations",
        "mine": "search adversaries for S on every representation and on raw features",
        "report": "aggregate into summary.json, tradeoff.csv and miner.csv",
    }
    for verb in PIPELINE_VERBS:
        p = verbs.add_parser(verb, help=helps[verb])
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", help="output root; overrides the config and EVALFRL_OUT")
        p.add_argument("--desk", action="store_true",
                       help="fill unset keys from the desk-scale preset instead of full scale")
        p.add_argument("overrides", nargs="*", metavar="KEY=VALUE",
                       help="replace top-level config keys, e.g. r=2 gammas=[0,1]")
    p = verbs.add_parser("verify-theorem1", help="plug-in MI of every layer of a random stack")
    p.add_argument("--activation", default="tanh", choices=ACTIVATIONS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--bits", type=int, nargs="+", default=[1])
    p.add_argument("--json", help="also write the report here")
    p = verbs.add_parser("selftest", help="metric oracles and gradient checks")
    p.add_argument("--metric-instances", type=int, default=200)
    p.add_argument("--grad-configs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _config(args):
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        config = harness.load_config(path, preset=harness.DESK_PRESET if args.desk else None)
        if args.out:
            config = config.with_overrides([f"output={json.dumps(args.out)}"])
        return config.with_overrides(args.overrides)
    except (harness.ConfigError, TypeError) as exc:
        raise UsageError(f"invalid config: {exc}") from None


def _pipeline(verb, config):
    if verb == "prepare":
        ds, info = harness.prepare(config)
        print(f"prepared {info['name']}: n={info['n']}, {config.r} splits under {config.root}")
        return []
    if verb == "tune":
        return harness.tune_stage(config)
    if verb == "sweep":
        return harness.sweep_stage(config)
    if verb == "mine":
        return harness.mine_stage(config)
    art = harness.report(config)
    for fam in config.families:
        mdir = config.root / fam / config.dataset["name"]
        print(mdir / "tradeoff.csv")
        print(mdir / "miner.csv")
    return art.failures


def _verify(args):
    report = mi_lab.theorem1_battery(args.activation, seed=args.seed, n=args.n,
                                     depth=args.depth, bits=tuple(args.bits))
    text = mi_lab.report_json(report)
    print(text)
    if args.json:
        Path(args.json).write_text(text + "\n")
    return 0 if (report["all_equal"] or not report["injective"]) else 2


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verb == "verify-theorem1":
            return _verify(args)
        if args.verb == "selftest":
            ok = selftest.run(args.metric_instances, args.grad_configs, args.seed)
            return 0 if ok else 2
        config = _config(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        failures = _pipeline(args.verb, config)
    except Exception as exc:
        harness.update_manifest(config, args.verb, [harness.failure_entry(args.verb, None, None, None, exc)])
        print(f"frl-audit: {args.verb} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if failures:
        for f in failures:
            print(f"failed: {f['stage']} {f['model']} fold {f['fold']} gamma {f['gamma']}: {f['error']}",
                  file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
