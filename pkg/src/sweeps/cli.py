import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from sweeps.config import SCENARIO_NAMES, load_config
from sweeps.output import VERSION
from sweeps.scenarios import run_scenario
from sweeps.workers import resolve_threads
from utils.errors import CasimechError, ConfigError
from utils.logging_utils import configure_logging

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1)"""

    def error(self, message):
        raise ConfigError(message, field="arguments")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="casimech",
        description="Perturbative and exact dynamics of a cavity with a quantized movable wall",
    )
    parser.add_argument("scenario", choices=SCENARIO_NAMES, help="Scenario to run")
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--out", default=None, help="Output directory (default: [run].output)")
    parser.add_argument("--threads", type=int, default=None,
                        help="Worker processes (default: CASIMECH_THREADS or 1)")
    parser.add_argument("--seed", type=int, default=None, help="Ensemble sampling seed")
    parser.add_argument("--log-level", default=None, help="Logging level (default: CASIMECH_LOG_LEVEL or INFO)")
    parser.add_argument("--version", action="version", version=f"casimech {VERSION}")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one scenario from a configuration file

    Returns:
        0 on success, 1 for configuration errors, 2 for physics validation
        errors, 3 for numerical failures
    """
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        run = load_config(args.config, scenario=args.scenario)
        if args.seed is not None:
            run = replace(run, seed=args.seed)
        threads = resolve_threads(args.threads)
        out_dir = Path(args.out or run.output)

        print("=" * 60)
        print(f"CASIMECH: {run.scenario}")
        print("=" * 60)
        result = run_scenario(run, threads)
        paths = result.write(out_dir, run.config_hash)
    except CasimechError as exc:
        print(f"\n✗ {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code

    for path in paths:
        print(f"✓ Saved: {path}")
    for stem, table in result.tables.items():
        print(f"  {stem}: {len(table)} rows, {len(table.columns)} columns")
    return 0
