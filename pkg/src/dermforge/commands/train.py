import argparse
import logging
from pathlib import Path

from ..classes.Trainer import Trainer
from ..schemas.config import AugmentConfig, TrainConfig
from ..utils.architecture import render_summary, summarize
from ..utils.artifacts import render_curves, render_roc, write_history, write_report
from ..utils.checkpoint import load_checkpoint
from ..utils.constants import (
    CURVES_SVG_FILE,
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SEED,
    DEFAULT_VAL_FRACTION,
    HISTORY_FILE,
    LOGGER_NAME,
    ROC_SVG_FILE,
)
from ..utils.enums import ClassWeightMode, Split
from ..utils.inference import evaluate
from ..utils.metrics import render_report
from .common import add_data_arguments, load_dataset, non_negative_float, open_fraction, positive_int, seed

logger = logging.getLogger(LOGGER_NAME)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "train",
        help="Train the network; the defaults are the published configuration",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_data_arguments(parser)
    parser.add_argument("--seed", type=seed, default=DEFAULT_SEED, help="Seed for init, split, shuffle, augmentation and dropout")
    parser.add_argument("--epochs", type=positive_int, default=DEFAULT_EPOCHS, help="Maximum number of epochs")
    parser.add_argument("--batch-size", type=positive_int, default=DEFAULT_BATCH_SIZE, help="Images per batch")
    parser.add_argument("--lr", type=non_negative_float, default=DEFAULT_LEARNING_RATE, help="Initial learning rate")
    parser.add_argument("--val-fraction", type=open_fraction, default=DEFAULT_VAL_FRACTION, help="Validation share of the images")
    parser.add_argument(
        "--class-weights",
        choices=[m.value for m in ClassWeightMode],
        default=ClassWeightMode.PAPER.value,
        help="paper: nv weighted 0.5, others 1.0; uniform: all 1.0",
    )
    parser.add_argument("--no-augment", action="store_true", help="Disable flips, rotation, brightness and zoom")
    parser.add_argument("--out", type=Path, default=Path("runs/latest"), help="Output directory")
    parser.add_argument("--resume", type=Path, default=None, help="Continue from a saved checkpoint (epoch granularity)")
    parser.add_argument("--checked", action="store_true", help="Fail on the first NaN or Inf any training operation produces (slower)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Build the dataset, train, then write checkpoints, history, report and curves."""
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        initial_lr=args.lr,
        val_fraction=args.val_fraction,
        seed=args.seed,
        class_weight_mode=args.class_weights,
        augment=None if args.no_augment else AugmentConfig(),
        out_dir=args.out,
        checked=args.checked,
    )
    resume = load_checkpoint(args.resume) if args.resume is not None else None
    dataset = load_dataset(args, config.val_fraction, config.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    trainer = Trainer(config, dataset, resume)
    logger.info("Model summary:\n" + render_summary(summarize(trainer.model.spec, trainer.model.params)))
    result = trainer.train()

    write_history(result.history, args.out / HISTORY_FILE)
    render_curves(result.history, args.out / CURVES_SVG_FILE)

    best_report, best_roc, best_loss = evaluate(result.best, dataset, Split.VALIDATION)
    final_report, _, final_loss = evaluate(result.final, dataset, Split.VALIDATION)
    write_report(best_report, best_roc, args.out)
    render_roc(best_roc, args.out / ROC_SVG_FILE)

    print(render_report(best_report))
    print(
        f"best checkpoint (epoch {result.best.epoch}): val loss {best_loss:.4f}, accuracy {best_report.accuracy:.4f}\n"
        f"final checkpoint (epoch {result.final.epoch}): val loss {final_loss:.4f}, accuracy {final_report.accuracy:.4f}"
    )
    if result.history:
        last = result.history[-1]
        print(f"final epoch train accuracy {last.train_accuracy:.4f}")
    logger.info(f"Artifacts written to {args.out}")
    return 0
