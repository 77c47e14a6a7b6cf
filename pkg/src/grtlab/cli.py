"""Command-line entry point.

    grtlab <mode> [--config PATH] [--seed N] [--trials N]
                  [--profile paper|desk] [--out DIR]

Modes: impulse, montecarlo, theory, selftest.  Exit code 0 iff every
acceptance item in scope of the chosen mode passes.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness, selftest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="grtlab", description=__doc__)
    parser.add_argument("mode", choices=["impulse", "montecarlo", "theory", "selftest"])
    parser.add_argument("--config", help="JSON config file; flags override its keys")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--profile", choices=["paper", "desk"], default=None)
    parser.add_argument("--out", dest="out_dir", default=None)
    parser.add_argument("--progress", action="store_true", help="print per-trial progress")
    args = parser.parse_args(argv)

    overrides = dict(seed=args.seed, trials=args.trials, out_dir=args.out_dir)
    if args.config:
        cfg = harness.load_config(args.config, mode=args.mode, profile=args.profile, **overrides)
    else:
        cfg = harness.make_config(args.mode, args.profile or "paper", **overrides)

    if args.mode == "impulse":
        rep = harness.run_impulse(cfg)
        print(json.dumps(rep.summary(), indent=2))
        return 0 if rep.passed else 1
    if args.mode == "montecarlo":
        rep = harness.run_montecarlo(cfg, progress=args.progress)
        print(json.dumps(rep.summary(), indent=2))
        return 0 if rep.verdicts.get("passed") else 1
    if args.mode == "theory":
        payload = harness.run_theory(cfg)
        print(json.dumps(payload, indent=2))
        return 0
    items = selftest.run_selftest(cfg)
    print(json.dumps(items, indent=2))
    return 0 if all(item["passed"] for item in items["items"]) else 1


if __name__ == "__main__":
    sys.exit(main())
