import argparse
import logging
from pathlib import Path

from ..utils.artifacts import write_report
from ..utils.checkpoint import load_checkpoint
from ..utils.constants import DEFAULT_SEED, DEFAULT_VAL_FRACTION, LOGGER_NAME
from ..utils.enums import Split
from ..utils.inference import evaluate, model_from_checkpoint
from ..utils.metrics import render_report
from .common import add_data_arguments, load_dataset

logger = logging.getLogger(LOGGER_NAME)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "eval",
        help="Report precision, recall, F1 and ROC of a checkpoint on one split",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file (.dfn)")
    add_data_arguments(parser)
    parser.add_argument("--split", choices=[s.value for s in Split], default=Split.VALIDATION.value, help="Split to evaluate")
    parser.add_argument("--out", type=Path, default=None, help="Report directory (default: the checkpoint's directory)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Evaluate on the split the checkpoint was trained with (same seed and validation share)."""
    checkpoint = load_checkpoint(args.checkpoint)
    model = model_from_checkpoint(checkpoint)
    dataset = load_dataset(
        args,
        checkpoint.config.get("val_fraction", DEFAULT_VAL_FRACTION),
        checkpoint.config.get("seed", DEFAULT_SEED),
    )
    rep, roc, loss = evaluate(checkpoint, dataset, args.split, model=model)
    print(render_report(rep))
    print(f"loss {loss:.6f}")

    out_dir = args.out if args.out is not None else args.checkpoint.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(rep, roc, out_dir)
    logger.info(f"Report written to {out_dir}")
    return 0
