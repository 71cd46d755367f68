"""CLI entry point for rowdil batch verification experiments."""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from rowdil import __version__
from rowdil.errors import ConfigError
from rowdil.experiments import (
    COMMANDS,
    EXIT_CONFIG,
    EXIT_OK,
    ExperimentConfig,
    ExperimentOutcome,
    load_experiments,
    run_batch,
)
from rowdil.serialization import format_csv, write_report

logger = logging.getLogger(__name__)

_HELP = {
    "dilate": "Purity check, canonical dilation and its residuals",
    "wandering": "Wandering subspace of an invariant subspace, computed two ways",
    "multnorm": "Multiplier norm of a quasi-homogeneous polynomial against its H(K) norm",
    "probe-range": "Smallest nonzero singular value of truncated M_p",
    "uniqueness": "Recover seeded unitary and isometric fiber maps between dilations",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rowdil",
        description="Dilations, wandering subspaces and K-inner functions on truncated kernel spaces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c", "--config",
        required=True,
        metavar="PATH",
        help="Experiment config (one experiment or {\"experiments\": [...]})",
    )
    common.add_argument(
        "-o", "--out",
        metavar="PATH",
        help="Write the JSON report to PATH instead of stdout",
    )
    common.add_argument(
        "--csv",
        metavar="PATH",
        help="Write the report tables as CSV (one file per experiment in a batch)",
    )
    common.add_argument(
        "--seed",
        type=int,
        help="Override the seed of every experiment",
    )
    common.add_argument(
        "--tol",
        type=float,
        metavar="FLOAT",
        help="Override residual_tol (takes precedence over ROWDIL_TOL)",
    )
    common.add_argument(
        "-v", "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr (-v info, -vv debug)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=_HELP[name])
    subparsers.add_parser("run", parents=[common], help="Run each experiment with the command it names")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _prepare(configs: List[ExperimentConfig], args: argparse.Namespace) -> List[ExperimentConfig]:
    """Apply ROWDIL_TOL, --tol and --seed on top of each config."""
    prepared = []
    for config in configs:
        tol = config.tolerances.from_env()
        if args.tol is not None:
            tol = tol.with_residual_tol(args.tol)
        config = config.with_tolerances(tol)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        prepared.append(config)
    return prepared


def _write_tables(outcomes: Sequence[ExperimentOutcome], path: Path) -> None:
    tabled = [o for o in outcomes if o.table is not None]
    for outcome in tabled:
        target = path if len(outcomes) == 1 else path.with_name(f"{path.stem}.{outcome.config.id}{path.suffix}")
        target.write_text(format_csv(outcome.table["headers"], outcome.table["rows"]))


def _assemble(outcomes: Sequence[ExperimentOutcome], exit_code: int) -> Dict[str, Any]:
    return {
        "rowdil_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "exit_code": exit_code,
        "experiments": [o.to_dict() for o in outcomes],
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    default_command = None if args.command == "run" else args.command
    try:
        configs = _prepare(load_experiments(Path(args.config), default_command=default_command), args)
    except (ConfigError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    outcomes = run_batch(configs)
    exit_code = max((o.exit_code for o in outcomes), default=EXIT_OK)
    for outcome in outcomes:
        error = outcome.report.get("error")
        if error:
            print(f"Error: {outcome.config.id}: {error['message']}", file=sys.stderr)

    try:
        text = write_report(_assemble(outcomes, exit_code), args.out)
        if args.csv:
            _write_tables(outcomes, Path(args.csv))
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is None:
        sys.stdout.write(text)
    logger.info("%d experiment(s), exit code %d", len(outcomes), exit_code)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
