import argparse
import logging
from pathlib import Path

from ..utils.artifacts import atomic_write_text
from ..utils.constants import LOGGER_NAME
from ..utils.enums import ClassLabel, Facet
from ..utils.metadata import class_fraction, load_metadata, tabulate
from .common import add_data_arguments, metadata_path

logger = logging.getLogger(LOGGER_NAME)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "analyze",
        help="Tabulate the metadata by diagnosis, confirmation type, body site or age",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    add_data_arguments(parser)
    parser.add_argument("--facet", choices=[f.value for f in Facet], default=Facet.DX.value, help="Grouping")
    parser.add_argument("--out", type=Path, default=None, help="Write the table as CSV here (default: stdout only)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Print (and optionally save) counts per facet value."""
    records = load_metadata(metadata_path(args))
    table = tabulate(records, args.facet)
    print(table.to_string(index=False))
    if Facet(args.facet) is Facet.DX:
        nv = ClassLabel.NV
        share = class_fraction(records, nv.code)
        print(f"{nv.code} ({nv.full_name}): {round(share * len(records))} of {len(records)} images ({share:.2%})")
    if args.out is not None:
        atomic_write_text(args.out, table.to_csv(index=False))
        logger.info(f"Wrote {args.facet} table to {args.out}")
    return 0
