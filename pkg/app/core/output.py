"""
CSV output shared by the experiment runner, the verification sweeps and the CLI
"""
from pathlib import Path
from typing import Union

import pandas as pd

from app.core.errors import OutputError
from app.core.logging import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.6g"


def write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    Write a frame as UTF-8 CSV with reals at 6 significant digits

    Raises:
        OutputError: when the file cannot be written
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {target}: {exc}", path=str(target)) from exc
    logger.info("csv_written", path=str(target), rows=len(frame))
    return target
