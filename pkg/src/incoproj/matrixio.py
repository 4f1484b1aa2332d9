"""Plain-text serialization: matrices, CSV tables, histograms.

Matrix files are header-less CSV, one matrix row per line, 17 significant
digits (round-trips float64 exactly).  Tabular CSVs carry a header line,
use ``.`` as the decimal separator and LF line endings; floats are written
with ``repr`` (shortest exact representation) so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import os
from typing import Iterable, Sequence

import numpy as np

from .linalg import as_matrix


def write_matrix(path: str | os.PathLike, M) -> None:
    M = as_matrix(M)
    with open(path, "w", newline="\n") as fh:
        for row in M:
            fh.write(",".join(f"{v:.16e}" for v in row))
            fh.write("\n")


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed matrix file ({exc})") from exc


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        return header, [row for row in reader]


def write_histogram(path: str | os.PathLike, hist: Sequence[tuple[float, int]]) -> None:
    write_csv(path, ["bin_lower", "count"], hist)
