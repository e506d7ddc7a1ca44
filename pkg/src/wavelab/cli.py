"""
wavelab command line

Usage:
    wavelab verify --config configs/verify.cfg            # Inequality suite
    wavelab simulate-det --config configs/decay.cfg       # Deterministic run
    wavelab simulate-stoch --config configs/stoch.cfg     # One stochastic path
    wavelab exit-mc --config configs/exit_mc.cfg -w 8     # Exit probability MC
    wavelab constants                                     # Derived constants
    wavelab --help                                        # Show usage

Settings resolve as environment (.env) < config file < command line.
Exit codes: 0 pass, 1 an acceptance predicate failed, 2 error.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from wavelab.harness import EXIT_ERROR, WaveLab, write_error_manifest
from wavelab.utils.config import ExperimentConfig, parse_config
from wavelab.utils.errors import ConfigurationError, WaveLabError
from wavelab.utils.load_env import get_config


logger = logging.getLogger("wavelab")

SUBCOMMANDS = ("verify", "simulate-det", "simulate-stoch", "exit-mc", "constants")


def _non_negative_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {n}")
    return n


def _positive_int(value: str) -> int:
    n = _non_negative_int(value)
    if n == 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="wavelab",
        description="wavelab - stability laboratory for Nagumo travelling fronts",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    wavelab constants --config configs/default.cfg
    wavelab verify --config configs/verify.cfg --seed 7
    wavelab exit-mc --config configs/exit_mc.cfg --out runs/mc -w 8
        """,
    )

    parser.add_argument(
        "subcommand",
        choices=SUBCOMMANDS,
        help="Experiment to run",
    )

    parser.add_argument(
        "-c", "--config",
        type=str,
        default=None,
        help="Path to a key=value experiment config (defaults are used when omitted)",
    )

    parser.add_argument(
        "-s", "--seed",
        type=_non_negative_int,
        default=None,
        help="Override mc.master_seed",
    )

    parser.add_argument(
        "-o", "--out",
        type=str,
        default=None,
        help="Output directory (default: output.directory, else $WAVELAB_OUTPUT_DIR/<subcommand>)",
    )

    parser.add_argument(
        "-w", "--workers",
        type=_positive_int,
        default=None,
        help="Worker count for verify threads and exit-mc processes",
    )

    parser.add_argument(
        "--no-progress",
        action="store_true",
        default=False,
        help="Hide the Monte Carlo progress bar",
    )

    parser.add_argument(
        "--no-color",
        action="store_true",
        default=False,
        help="Plain console summary without ANSI colors",
    )

    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        default=False,
        help="Debug logging",
    )

    return parser.parse_args(argv)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def load_config(path: str) -> ExperimentConfig:
    """
    Read and validate a config file.

    Raises:
        ConfigurationError: if the file cannot be read or does not validate
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"cannot read config file: {e}") from e
    return parse_config(text)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the wavelab CLI."""
    env = get_config()
    args = parse_arguments(argv)
    configure_logging("DEBUG" if args.verbose else str(env["WAVELAB_LOG_LEVEL"]))

    default_out = os.path.join(str(env["WAVELAB_OUTPUT_DIR"]), args.subcommand)
    config: Optional[ExperimentConfig] = None
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            config.mc.master_seed = args.seed
        out_dir = args.out or config.output.directory or default_out
        workers = args.workers or config.mc.workers or int(env["WAVELAB_WORKERS"])
        lab = WaveLab(
            config,
            out_dir,
            workers=workers,
            progress=not args.no_progress,
            color=not args.no_color and sys.stdout.isatty(),
        )
    except WaveLabError as e:
        logger.error(f"Error: {e}")
        out_dir = args.out or (config.output.directory if config is not None else None) or default_out
        path = write_error_manifest(out_dir, args.subcommand, e, config)
        logger.error(f"Error manifest written to {path}")
        return EXIT_ERROR

    logger.debug(f"wavelab {args.subcommand}: config={args.config or 'defaults'}, workers={workers}")
    return lab.run(args.subcommand)


if __name__ == "__main__":
    sys.exit(main())
