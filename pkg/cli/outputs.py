"""
Result files of a run:

  partitions.csv  axis,id,label    one line per row id then per column id
  traces.csv      axis,rank,value  sorted scaling vectors
  summary.yaml    counts, block means, diagnostics, manifest (keys sorted)
"""

import logging
import os
from typing import Optional

import numpy as np
import pandas as pd
import yaml

from ccot.coclust import CoClusterResult
from ccot.core import DataMatrix
from ccot.simulate import GroundTruth, cce, error_rate, nmi

logger = logging.getLogger(__name__)

PARTITIONS_FILE = "partitions.csv"
TRACES_FILE = "traces.csv"
SUMMARY_FILE = "summary.yaml"
FLOAT_FORMAT = "%.17g"


def block_means(values: np.ndarray, row_labels, col_labels, exclude_zeros: bool = False):
    """
    g x m matrix of block averages; a block with no usable entry is None.
    """
    row_labels = np.asarray(row_labels)
    col_labels = np.asarray(col_labels)
    g, m = int(row_labels.max()), int(col_labels.max())
    means = []
    for k in range(1, g + 1):
        line = []
        rows = values[row_labels == k]
        for l in range(1, m + 1):
            block = rows[:, col_labels == l]
            if exclude_zeros:
                block = block[block != 0]
            line.append(float(block.mean()) if block.size else None)
        means.append(line)
    return means


def partitions_frame(matrix: DataMatrix, result: CoClusterResult) -> pd.DataFrame:
    rows = pd.DataFrame({"axis": "row", "id": matrix.row_ids, "label": result.row_partition.labels})
    cols = pd.DataFrame({"axis": "col", "id": matrix.col_ids, "label": result.col_partition.labels})
    return pd.concat([rows, cols], ignore_index=True)


def traces_frame(result: CoClusterResult) -> pd.DataFrame:
    diag = result.diagnostics
    frames = []
    for axis, trace in (("row", diag.row_trace), ("col", diag.col_trace)):
        frames.append(pd.DataFrame({"axis": axis, "rank": np.arange(len(trace)), "value": trace}))
    return pd.concat(frames, ignore_index=True)


def build_summary(
    matrix: DataMatrix,
    result: CoClusterResult,
    manifest: dict,
    exclude_zeros: bool,
    truth: Optional[GroundTruth] = None,
    wall_time: Optional[float] = None,
) -> dict:
    summary = {
        "n": matrix.n,
        "d": matrix.d,
        "g": result.g,
        "m": result.m,
        "exclude_zeros": bool(exclude_zeros),
        "block_means": block_means(
            matrix.values, result.row_partition.labels, result.col_partition.labels, exclude_zeros
        ),
        "diagnostics": result.diagnostics.to_dict(),
        "manifest": manifest,
    }
    if truth is not None:
        e_row = error_rate(truth.row_labels, result.row_partition)
        e_col = error_rate(truth.col_labels, result.col_partition)
        summary["truth"] = {
            "g": truth.g,
            "m": truth.m,
            "row_error": float(e_row),
            "col_error": float(e_col),
            "cce": float(cce(truth.row_labels, result.row_partition, truth.col_labels, result.col_partition)),
            "row_nmi": nmi(truth.row_labels, result.row_partition),
            "col_nmi": nmi(truth.col_labels, result.col_partition),
        }
    if wall_time is not None:
        summary["wall_time"] = float(wall_time)
    return summary


def write_run(out_dir: str, matrix: DataMatrix, result: CoClusterResult, summary: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    partitions_frame(matrix, result).to_csv(os.path.join(out_dir, PARTITIONS_FILE), index=False)
    traces_frame(result).to_csv(
        os.path.join(out_dir, TRACES_FILE), index=False, float_format=FLOAT_FORMAT
    )
    with open(os.path.join(out_dir, SUMMARY_FILE), "w") as fh:
        yaml.safe_dump(summary, fh, sort_keys=True, default_flow_style=False)
    logger.info("wrote %s, %s and %s to %s", PARTITIONS_FILE, TRACES_FILE, SUMMARY_FILE, out_dir)
