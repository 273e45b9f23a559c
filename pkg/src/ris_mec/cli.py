"""``simulate`` command-line entry point."""

import argparse
import logging
import sys

from . import experiment
from .config import ConfigError, build_config, parse_sweep, read_config_file


def build_parser():
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo latency comparison of RIS phase schemes.")
    p.add_argument("--config", required=True, help="flat 'key = value' config file")
    p.add_argument("--sweep", help="n=START:STEP:STOP or d=START:STEP:STOP (stop included)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="per-trial CSV path; the summary goes next to it")
    p.add_argument("--scheme", choices=("all",) + experiment.SCHEMES)
    p.add_argument("--workers", type=int, help="worker processes (default from config, 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = dict(trials=args.trials, seed=args.seed, output=args.out,
                         scheme=args.scheme, workers=args.workers)
        if args.sweep:
            overrides["sweep_axis"], overrides["sweep_values"] = parse_sweep(args.sweep)
        cfg = build_config(read_config_file(args.config), **overrides)
        table = experiment.sweep(cfg)
        failed = sum(not r.ok for r in table)
        path, summary = experiment.emit_results(table, cfg.output)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return 2
    if failed:
        print(f"simulate: {failed} of {len(table)} trials failed; see {path}", file=sys.stderr)
        return 1
    logging.getLogger(__name__).info("wrote %s and %s", path, summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
