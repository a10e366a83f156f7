import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import pandas as pd

from core.errors import ValidationError
from core.fileio import write_csv_atomic
from core.types import LABEL_GRID

log = logging.getLogger(__name__)

N_ANNOTATORS = 7
SCORE_RANGE = (-3, 3)


@dataclass(frozen=True)
class AnnotationRecord:
    scores: Tuple[int, ...]

    def __post_init__(self):
        scores = tuple(self.scores)
        if len(scores) != N_ANNOTATORS:
            raise ValidationError(f"expected {N_ANNOTATORS} scores, got {len(scores)}")
        for s in scores:
            if int(s) != s or not SCORE_RANGE[0] <= s <= SCORE_RANGE[1]:
                raise ValidationError(f"score {s!r} outside [{SCORE_RANGE[0]}, {SCORE_RANGE[1]}]")
        object.__setattr__(self, "scores", tuple(int(s) for s in scores))


def _round_half_away(x):
    whole = int(abs(x) + Fraction(1, 2))
    return whole if x >= 0 else -whole


def aggregate_annotations(record):
    """
    Drop one highest and one lowest score, average the remaining five,
    map [-3, 3] onto [-1, 1] and snap to the nearest multiple of 0.2.
    """
    if not isinstance(record, AnnotationRecord):
        record = AnnotationRecord(tuple(record))
    kept = sorted(record.scores)[1:-1]
    mean = Fraction(sum(kept), len(kept))
    # grid units of 0.2: (mean / 3) / 0.2
    units = _round_half_away(mean * 5 / 3)
    return LABEL_GRID[units + 5]


def _parse_row(row, row_number):
    values = ["" if pd.isna(v) else str(v).strip() for v in row]
    if len(values) != 1 + N_ANNOTATORS or not values[0] or not all(values[1:]):
        raise ValidationError(f"row {row_number}: expected id followed by {N_ANNOTATORS} scores")
    try:
        scores = tuple(int(v) for v in values[1:])
    except ValueError:
        raise ValidationError(f"row {row_number}: scores must be integers") from None
    try:
        return values[0], aggregate_annotations(AnnotationRecord(scores))
    except ValidationError as exc:
        raise ValidationError(f"row {row_number}: {exc}") from None


def aggregate_csv(scores_csv, out_csv):
    """
    Read `id,s1,...,s7` rows (optional header) and write `id,label` rows.
    Nothing is written if any row is malformed.
    """
    # no names: the tokenizer rejects any row wider than the first one
    try:
        raw = pd.read_csv(scores_csv, header=None, dtype=str, keep_default_na=False,
                          on_bad_lines="error")
    except pd.errors.EmptyDataError:
        raw = pd.DataFrame(columns=list(range(1 + N_ANNOTATORS)))
    except pd.errors.ParserError as exc:
        line = re.search(r"line (\d+)", str(exc))
        where = f"row {line.group(1)}" if line else "malformed annotation CSV"
        raise ValidationError(f"{where}: expected id followed by {N_ANNOTATORS} scores") from None

    start = 0
    if len(raw) and raw.shape[1] > 1 and str(raw.iloc[0, 1]).strip().lower() == "s1":
        start = 1

    ids, labels = [], []
    for i in range(start, len(raw)):
        row_id, label = _parse_row(raw.iloc[i].tolist(), i + 1)
        ids.append(row_id)
        labels.append(label)

    out = pd.DataFrame({"id": ids, "label": [f"{v + 0.0:.1f}" for v in labels]})
    write_csv_atomic(out, out_csv)
    log.info("Aggregated %d annotation rows into %s", len(out), out_csv)
    return out
