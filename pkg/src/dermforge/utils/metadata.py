"""HAM10000 metadata ingestion, the train/validation split and exploratory tables."""
import logging
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd
from pydantic import ValidationError

from ..classes.Rng import Rng
from ..schemas.config import ClassWeights
from ..schemas.records import MetadataRecord
from .constants import AGE_BIN_YEARS, LOGGER_NAME, METADATA_COLUMNS, STREAM_SPLIT
from .enums import ClassWeightMode, Facet
from .exceptions import ArgumentError, MetadataParseError

logger = logging.getLogger(LOGGER_NAME)


def _validation_reason(error: ValidationError) -> str:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"])
    return f"{field}: {first['msg']}" if field else first["msg"]


def load_metadata(path: str | Path) -> list[MetadataRecord]:
    """Parse a HAM10000 metadata CSV.

    Args:
        path: Metadata file; its header must contain the HAM10000 columns

    Returns:
        One record per row, in file order. Missing ages stay None.

    Raises:
        FileNotFoundError: If the file does not exist
        MetadataParseError: For a bad header, a malformed row, an unknown dx or a
            duplicated image_id (the message names the file line)
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Metadata file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise MetadataParseError(str(path), 1, "missing header row") from None
    except pd.errors.ParserError as e:
        # the tokenizer reports the 1-based file line of the offending row
        found = re.search(r"line (\d+)", str(e))
        line = int(found.group(1)) if found else 1
        raise MetadataParseError(str(path), line, f"wrong number of fields: {str(e).strip()}") from e
    except UnicodeDecodeError as e:
        raise MetadataParseError(str(path), 1, f"unreadable CSV: {e}") from e
    if not isinstance(frame.index, pd.RangeIndex):
        # pandas turns surplus leading fields into an index instead of failing
        raise MetadataParseError(str(path), 2, "row has more fields than the header")

    missing = [c for c in METADATA_COLUMNS if c not in frame.columns]
    if missing:
        raise MetadataParseError(str(path), 1, f"header lacks columns {missing}")

    records: list[MetadataRecord] = []
    seen: set[str] = set()
    for offset, row in enumerate(frame[list(METADATA_COLUMNS)].itertuples(index=False)):
        line = offset + 2
        values = dict(zip(METADATA_COLUMNS, ("" if pd.isna(v) else str(v).strip() for v in row)))
        age_text = values.pop("age")
        try:
            age = float(age_text) if age_text and age_text.lower() not in ("nan", "null", "none") else None
            record = MetadataRecord(age=age, **values)
        except (ValueError, ValidationError) as e:
            reason = _validation_reason(e) if isinstance(e, ValidationError) else str(e)
            raise MetadataParseError(str(path), line, reason) from None
        if record.image_id in seen:
            raise MetadataParseError(str(path), line, f"duplicate image_id '{record.image_id}'")
        seen.add(record.image_id)
        records.append(record)

    logger.info(f"Loaded {len(records)} metadata records from {path}")
    return records


def split(
    records: Sequence[MetadataRecord],
    val_fraction: float,
    seed: int,
) -> tuple[list[str], list[str]]:
    """Seeded image-level split into train and validation image ids.

    Ids are sorted before shuffling, so the result does not depend on input order. The
    validation share is ceil(n * val_fraction) (1002 of 10015 at 10%).

    Raises:
        ArgumentError: If val_fraction is not strictly between 0 and 1
    """
    return split_ids([r.image_id for r in records], val_fraction, seed)


def split_ids(image_ids: Sequence[str], val_fraction: float, seed: int) -> tuple[list[str], list[str]]:
    if not 0.0 < val_fraction < 1.0:
        raise ArgumentError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    ids = sorted(image_ids)
    order = Rng(seed).child(STREAM_SPLIT).permutation(len(ids))
    n_val = min(math.ceil(round(len(ids) * val_fraction, 9)), len(ids))
    shuffled = [ids[i] for i in order]
    return shuffled[n_val:], shuffled[:n_val]


def class_weights_for(
    records: Iterable[MetadataRecord] = (),
    mode: ClassWeightMode = ClassWeightMode.PAPER,
) -> ClassWeights:
    """Loss weights: nv at 0.5 and every other class at 1.0, or all ones.

    The records are accepted for interface symmetry; the weighting is fixed.
    """
    return ClassWeights.paper() if ClassWeightMode(mode) is ClassWeightMode.PAPER else ClassWeights.uniform()


def _age_bin(age: float) -> int:
    return int(age // AGE_BIN_YEARS) * AGE_BIN_YEARS


def tabulate(records: Sequence[MetadataRecord], facet: Facet | str) -> pd.DataFrame:
    """Counts per facet value, sorted by descending count then ascending key.

    Facets: dx (per class), dx_type (confirmation procedure per class), localization
    (per body site) and age_by_dx (per class, 5-year bins labelled by their lower
    edge; records without an age are excluded).

    Raises:
        ArgumentError: For an unknown facet
    """
    try:
        facet = Facet(facet)
    except ValueError:
        raise ArgumentError(f"Unknown facet '{facet}'") from None

    keys = {
        Facet.DX: ["dx"],
        Facet.DX_TYPE: ["dx", "dx_type"],
        Facet.LOCALIZATION: ["localization"],
        Facet.AGE_BY_DX: ["dx", "age_bin"],
    }[facet]
    rows = [
        {"dx": r.dx, "dx_type": r.dx_type, "localization": r.localization,
         "age_bin": _age_bin(r.age) if r.age is not None else None}
        for r in records
    ]
    frame = pd.DataFrame(rows, columns=["dx", "dx_type", "localization", "age_bin"])
    if facet is Facet.AGE_BY_DX:
        frame = frame.dropna(subset=["age_bin"]).astype({"age_bin": "int64"})
    if frame.empty:
        return pd.DataFrame(columns=[*keys, "count"])

    counts = frame.groupby(keys).size().reset_index(name="count")
    return counts.sort_values(["count", *keys], ascending=[False, *([True] * len(keys))]).reset_index(drop=True)


def class_fraction(records: Sequence[MetadataRecord], dx: str) -> float:
    if not records:
        return 0.0
    return sum(r.dx == dx for r in records) / len(records)
