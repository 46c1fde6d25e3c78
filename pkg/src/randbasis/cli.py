"""Command-line entry point: ``randbasis {reference,strategies,bounds,plots,all}``."""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import RandBasisError
from .experiments import ExperimentConfig, Study, run_bounds, run_reference, run_strategies
from .plots import emit_plots

COMMANDS = ("reference", "strategies", "bounds", "plots", "all")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randbasis", description="Randomized local bases on an oversampled patch.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file (defaults reproduce the full study)")
    parser.add_argument("--out-dir", help="directory for CSV and SVG output")
    parser.add_argument("--seed", type=_u64, help="run a single base seed instead of the configured list")
    parser.add_argument("--tol", type=float, help="eigenvalue threshold for mode selection")
    parser.add_argument("--include-corners", action="store_true",
                        help="treat the four corner nodes as independent boundary DOFs")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        config = config.override(out_dir=args.out_dir, seed=args.seed, tol=args.tol)
        out = config.output_dir
        cmd = args.command
        if cmd == "reference":
            run_reference(config, args.include_corners)
        elif cmd == "strategies":
            run_strategies(config, args.include_corners)
        elif cmd == "bounds":
            run_bounds(config)
        elif cmd == "plots":
            emit_plots(out)
        else:
            study = Study.prepare(config, args.include_corners)
            run_reference(config, study=study)
            outcome = run_strategies(config, study=study)
            run_bounds(config)
            emit_plots(out)
            if outcome.failures:
                print(f"{len(outcome.failures)} strategy runs skipped; see {out / 'failures.csv'}", file=sys.stderr)
    except (RandBasisError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
