#!/usr/bin/env python3
"""
Nonlocal Hirota long-time asymptotics
Command-line entry point: scatter, evolve, asymptotics, compare, validate.
"""

import argparse
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent

COMMANDS = {
    "scatter": "run_scatter",
    "evolve": "run_evolve",
    "asymptotics": "run_asymptotics",
    "compare": "run_compare",
    "validate": "run_validate",
}


def setup_application(verbose: bool = False):
    """Create needed dirs, read .env and configure logging."""
    (BASE_DIR / "logs").mkdir(parents=True, exist_ok=True)
    load_dotenv(BASE_DIR / ".env")

    log_path = BASE_DIR / "logs" / "application.log"
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)-8s %(name)s: %(message)s",
        handlers=[
            logging.FileHandler(log_path, encoding="utf-8"),
            logging.StreamHandler(sys.stdout)
        ]
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-hirota",
        description="Inverse scattering, long-time asymptotics and PDE verification for the nonlocal Hirota equation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", required=True, help="experiment file (YAML or JSON)")
        sub.add_argument("--out", default=None, help="output directory (overrides output_dir)")
        sub.add_argument("--seed", type=int, default=None, help="seed for sampled checks")
        sub.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    """Parse arguments, run one stage and map failures onto exit codes."""
    args = build_parser().parse_args(argv)
    setup_application(args.verbose)

    try:
        from src.config import load_config
        from src.errors import NonlocalHirotaError
        from src.pipeline import ExperimentPipeline
    except ImportError as e:
        logging.error("Import Error: %s", e)
        print("Did you pip install -r requirements.txt?")
        return 1

    try:
        config = load_config(args.config).with_overrides(args.out, args.seed)
        pipeline = ExperimentPipeline(config)
        getattr(pipeline, COMMANDS[args.command])()
        stats = pipeline.get_run_statistics()
        logging.info("%s finished: %d files in %s", args.command, stats["files_written"], stats["output_dir"])
        return 0

    except NonlocalHirotaError as e:
        logging.error("%s failed (%s): %s", args.command, type(e).__name__, e)
        return e.exit_code

    except Exception:
        logging.exception("Unhandled application error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
