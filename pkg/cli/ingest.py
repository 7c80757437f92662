"""
Readers for the two input layouts:

  dense-csv  header row of column ids (first cell ignored), then one line per
             row: row id followed by the numeric values
  triplet    row_id, col_id, value per line, comma or tab separated; further
             columns (e.g. a timestamp) are ignored; missing pairs become 0

Errors carry the 1-based line number of the offending line.
"""

import logging
import re
from typing import List

import numpy as np
import pandas as pd

from ccot.core import DataMatrix
from ccot.errors import InputError, ParseError

logger = logging.getLogger(__name__)

FORMATS = ("dense-csv", "triplet")

_LINE = re.compile(r"line (\d+)")


def _parser_error(e: Exception) -> ParseError:
    match = _LINE.search(str(e))
    return ParseError(f"ragged row ({e})", int(match.group(1)) if match else None)


def _numeric(cells: pd.Series, first_line: int) -> np.ndarray:
    values = pd.to_numeric(cells, errors="coerce")
    bad = values.isna() | ~np.isfinite(values.fillna(0.0))
    if bad.any():
        pos = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(f"non-numeric value '{cells.iloc[pos]}'", first_line + pos)
    return values.to_numpy(dtype=float)


def read_dense_csv(path: str) -> DataMatrix:
    try:
        raw = pd.read_csv(
            path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=False
        )
    except pd.errors.EmptyDataError:
        raise ParseError("empty file", 1) from None
    except pd.errors.ParserError as e:
        raise _parser_error(e) from None

    if raw.shape[0] < 2 or raw.shape[1] < 2:
        raise ParseError(f"expected a header and data rows with ids, got a {raw.shape[0]}x{raw.shape[1]} table")

    header = raw.iloc[0]
    if (header.iloc[1:] == "").any():
        raise ParseError("header has empty column ids", 1)
    body = raw.iloc[1:]
    short = (body.isna() | (body == "")).any(axis=1).to_numpy()
    if short.any():
        raise ParseError("ragged row or empty cell", int(np.flatnonzero(short)[0]) + 2)

    values = np.empty((body.shape[0], body.shape[1] - 1))
    for j in range(1, body.shape[1]):
        values[:, j - 1] = _numeric(body.iloc[:, j], 2)

    logger.info("read %dx%d dense matrix from %s", values.shape[0], values.shape[1], path)
    return DataMatrix(values, body.iloc[:, 0].tolist(), header.iloc[1:].tolist())


def _id_order(ids) -> List[str]:
    ids = list(ids)
    if all(re.fullmatch(r"-?\d+", x) for x in ids):
        return sorted(ids, key=int)
    return sorted(ids)


def read_triplets(path: str) -> DataMatrix:
    try:
        raw = pd.read_csv(
            path,
            sep=r"[,\t]",
            engine="python",
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError:
        raise ParseError("empty file", 1) from None
    except pd.errors.ParserError as e:
        raise _parser_error(e) from None

    if raw.shape[1] < 3:
        raise ParseError("triplet lines need row id, column id and value", 1)
    table = raw.iloc[:, :3].apply(lambda col: col.str.strip())
    table.columns = ["row", "col", "value"]
    short = (table.isna() | (table == "")).any(axis=1).to_numpy()
    if short.any():
        raise ParseError("ragged triplet line", int(np.flatnonzero(short)[0]) + 1)

    table["value"] = _numeric(table["value"], 1)
    dup = table.duplicated(subset=["row", "col"]).to_numpy()
    if dup.any():
        pos = int(np.flatnonzero(dup)[0])
        raise ParseError(
            f"duplicate entry for ({table['row'].iloc[pos]}, {table['col'].iloc[pos]})", pos + 1
        )

    dense = table.pivot(index="row", columns="col", values="value")
    dense = dense.reindex(index=_id_order(dense.index), columns=_id_order(dense.columns)).fillna(0.0)
    logger.info(
        "read %d triplets into a %dx%d matrix from %s", len(table), dense.shape[0], dense.shape[1], path
    )
    return DataMatrix(dense.to_numpy(dtype=float), list(dense.index), list(dense.columns))


def ingest(path: str, fmt: str = "dense-csv") -> DataMatrix:
    if fmt == "dense-csv":
        return read_dense_csv(path)
    if fmt == "triplet":
        return read_triplets(path)
    raise InputError(f"unknown input format '{fmt}', expected one of {FORMATS}")
