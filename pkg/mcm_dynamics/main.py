"""
Command-line entry point.
"""

from argparse import ArgumentParser
from typing import List, Optional
import logging
import sys

from pydantic import ValidationError

from mcm_dynamics import __version__
from mcm_dynamics.commands import cv, predict, solve_lp, synth, trace, train
from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import InvalidInputError, MCMError

logger = logging.getLogger(__name__)

COMMANDS = (train, predict, cv, trace, solve_lp, synth)


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="mcm_dynamics",
        description="Minimal-complexity classifiers trained by primal-dual dynamics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one sub-command.

    Returns:
        0 on success, 1 on I/O or parse failure, 2 on invalid input,
        3 when the dynamics did not converge, 4 on a solve-lp cross-check mismatch
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except MCMError as exc:
        logger.error(exc.detail)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        detail = "; ".join(error["msg"] for error in exc.errors())
        logger.error(f"Invalid input: {detail}")
        print(f"error: {detail}", file=sys.stderr)
        return InvalidInputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
