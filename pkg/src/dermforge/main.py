import argparse
import logging
import sys

import dotenv
from pydantic import ValidationError

from . import __version__
from .commands import analyze, evaluate, gradcheck, predict, train
from .utils.constants import LOGGER_NAME
from .utils.exceptions import DermforgeError
from .utils.initialize_logic import initialize_logging

# Load environment variables from .env file
dotenv.load_dotenv()
logger = logging.getLogger(LOGGER_NAME)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dermforge",
        description="Train, evaluate and apply a from-scratch CNN for 7-class skin-lesion images",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Logging level (default: DERMFORGE_LOG_LEVEL or INFO)")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in (analyze, train, evaluate, predict, gradcheck):
        command.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Exit codes: 0 success, 1 runtime failure, 2 usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    initialize_logging(args.log_level)
    try:
        return args.handler(args)
    except (DermforgeError, OSError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}", exc_info=logger.isEnabledFor(logging.DEBUG))
        return 1
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 1


if __name__ == "__main__":
    sys.exit(main())
