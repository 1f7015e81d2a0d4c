import argparse
import logging
import sys
from pathlib import Path

from ..utils.checkpoint import load_checkpoint
from ..utils.constants import LOGGER_NAME
from ..utils.exceptions import ImageDecodeError
from ..utils.inference import model_from_checkpoint, predict

logger = logging.getLogger(LOGGER_NAME)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "predict",
        help="Classify one or more images",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file (.dfn)")
    parser.add_argument("images", type=Path, nargs="+", metavar="IMAGE", help="Image files, reported in order")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """One tab-separated line per image: path, code, full name, then all seven probabilities."""
    checkpoint = load_checkpoint(args.checkpoint)
    model = model_from_checkpoint(checkpoint)
    failed = 0
    for image_path in args.images:
        try:
            prediction = predict(checkpoint, image_path, model=model)
        except ImageDecodeError as e:
            failed += 1
            logger.error(str(e))
            print(f"{image_path}\terror\t{e.reason}", file=sys.stderr)
            continue
        probabilities = " ".join(f"{code}={p:.6f}" for code, p in prediction.probabilities.items())
        print(f"{prediction.image}\t{prediction.code}\t{prediction.name}\t{probabilities}")
    if failed:
        logger.error(f"{failed} of {len(args.images)} images could not be classified")
        return 1
    return 0
