import csv
import math
import os
from dataclasses import astuple, fields
from typing import Any, Iterable, List, Sequence, TextIO, Union

from src.services.experiment import SweepRecord
from src.utils.logging import logger

SWEEP_FIELDS: List[str] = [field.name for field in fields(SweepRecord)]

Destination = Union[str, os.PathLike, TextIO]


class ResultsWriteError(OSError):
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"Cannot write results to {path}: {reason}")


def format_value(value: Any) -> str:
    """Render one CSV cell: 12 significant digits, nan/inf spelled out, booleans as 1/0"""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def write_table(header: Sequence[str], rows: Iterable[Sequence[Any]], destination: Destination) -> None:
    """
    Write a header and rows as UTF-8 CSV

    Args:
        header: Column names
        rows: Row values in header order
        destination: File path, or an open text stream left open after writing

    Raises:
        ResultsWriteError: Destination cannot be opened or written
    """
    if hasattr(destination, "write"):
        _write_rows(destination, header, rows)
        return

    path = os.fspath(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            _write_rows(handle, header, rows)
    except OSError as e:
        logger.error(f"Error writing results: {str(e)}", {"path": path})
        raise ResultsWriteError(path, e.strerror or str(e)) from e
    logger.info("Results written", {"path": path})


def _write_rows(handle: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])


def emit_csv(records: Sequence[SweepRecord], destination: Destination) -> None:
    """Write sweep records with the fixed SweepRecord column order"""
    write_table(SWEEP_FIELDS, (astuple(record) for record in records), destination)
