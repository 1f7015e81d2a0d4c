"""Flag types and dataset flags shared by the subcommands."""
import argparse
import os
from pathlib import Path

from ..classes.SkinLesionDataset import SkinLesionDataset
from ..utils.metadata import load_metadata

DEFAULT_DATA_DIR = "data/HAM10000"
METADATA_FILE = "HAM10000_metadata.csv"


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def open_fraction(text: str) -> float:
    value = non_negative_float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {value}")
    return value


def seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"must be a 64-bit unsigned integer, got {value}")
    return value


def add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir",
        type=Path,
        default=Path(os.getenv("DERMFORGE_HAM10000_DIR") or DEFAULT_DATA_DIR),
        help="Directory holding the images (directly or in HAM10000_images_part_* folders)",
    )
    parser.add_argument(
        "--metadata",
        type=Path,
        default=None,
        help=f"Metadata CSV (default: DATA_DIR/{METADATA_FILE})",
    )


def metadata_path(args: argparse.Namespace) -> Path:
    return args.metadata if args.metadata is not None else args.data_dir / METADATA_FILE


def load_dataset(args: argparse.Namespace, val_fraction: float, seed_value: int, threads: int | None = None) -> SkinLesionDataset:
    records = load_metadata(metadata_path(args))
    return SkinLesionDataset.from_metadata(records, args.data_dir, val_fraction, seed_value, threads)
