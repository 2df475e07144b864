"""
CSV files for repetition records and aggregates
"""
from pathlib import Path
from typing import List, Sequence, Union

import pandas as pd

from app.core.errors import DataError
from app.core.output import write_frame
from app.experiments.records import AGGREGATE_COLUMNS, RECORD_COLUMNS, AggregateRow, RepetitionRecord

Rows = Union[Sequence[RepetitionRecord], Sequence[AggregateRow]]


def records_frame(records: Sequence[RepetitionRecord]) -> pd.DataFrame:
    ordered = sorted(records, key=RepetitionRecord.sort_key)
    return pd.DataFrame([rec.model_dump() for rec in ordered], columns=RECORD_COLUMNS)


def aggregates_frame(rows: Sequence[AggregateRow]) -> pd.DataFrame:
    ordered = sorted(rows, key=AggregateRow.sort_key)
    return pd.DataFrame([row.model_dump() for row in ordered], columns=AGGREGATE_COLUMNS)


def write_csv(rows: Rows, path: Union[str, Path], kind: str = "records") -> Path:
    """
    Write records or aggregates sorted by (method, axis_value[, rep_index])

    ``kind`` selects the header for an empty row set; a non-empty set decides by
    its row type.
    """
    if rows:
        kind = "aggregates" if isinstance(rows[0], AggregateRow) else "records"
    frame = aggregates_frame(rows) if kind == "aggregates" else records_frame(rows)
    return write_frame(frame, path)


def read_aggregates(path: Union[str, Path]) -> List[AggregateRow]:
    """Parse an aggregates CSV back into rows"""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {path}: {exc}", path=str(path)) from exc
    missing = set(AGGREGATE_COLUMNS) - set(frame.columns)
    if missing:
        raise DataError(f"{path} lacks columns {sorted(missing)}", path=str(path))
    frame = frame.astype(object).where(frame.notna(), None)
    return [AggregateRow(**record) for record in frame[AGGREGATE_COLUMNS].to_dict(orient="records")]
