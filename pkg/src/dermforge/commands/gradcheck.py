import argparse
import logging

from ..utils.constants import DEFAULT_SEED, GRADCHECK_LAYERS, GRADCHECK_TOLERANCE, LOGGER_NAME
from ..utils.gradcheck import run_gradcheck
from .common import non_negative_float, seed

logger = logging.getLogger(LOGGER_NAME)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "gradcheck",
        help="Compare every backward pass with central differences in double precision",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--layers", choices=["all", *GRADCHECK_LAYERS], default="all", help="Check to run")
    parser.add_argument("--tolerance", type=non_negative_float, default=GRADCHECK_TOLERANCE, help="Largest accepted relative error")
    parser.add_argument("--seed", type=seed, default=DEFAULT_SEED, help="Seed of the random inputs")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    results = run_gradcheck(args.layers, args.tolerance, args.seed)
    for result in results:
        status = "ok" if result.passed else "FAIL"
        print(f"{result.layer:<12} max relative error {result.max_relative_error:.3e} ({result.checked} coords) {status}")
    failing = [r.layer for r in results if not r.passed]
    if failing:
        logger.error(f"Gradient check failed for {', '.join(failing)} (tolerance {args.tolerance:g})")
        return 1
    return 0
