# /src/utils/report_utils.py

"""
Report Utilities Module

This module renders finalized metrics as pandas tables (percentages with one
decimal) and writes reports and CSV exports atomically.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Optional, Union

import pandas as pd

from models.metric_models import MetricReport

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def to_percent(value: Optional[float]) -> str:
    """Render a ratio as a one-decimal percentage, "n/a" when absent."""
    if value is None:
        return "n/a"
    return f"{100.0 * value:.1f}"


def summary_table(report: MetricReport) -> pd.DataFrame:
    """
    Aggregate scores of a report, one row per metric.

    Args:
        report: Finalized report

    Returns:
        DataFrame with columns metric and value (percent strings)
    """
    rows = []
    if report.semantic is not None:
        rows += [("mIoU", report.semantic.miou), ("fwIoU", report.semantic.fwiou)]
    if report.panoptic is not None:
        p = report.panoptic
        rows += [
            ("PQ", p.pq),
            ("PQ†", p.pq_dagger),
            ("SQ", p.sq),
            ("RQ", p.rq),
            ("PQ^Th", p.pq_things),
            ("SQ^Th", p.sq_things),
            ("RQ^Th", p.rq_things),
            ("PQ^St", p.pq_stuff),
            ("SQ^St", p.sq_stuff),
            ("RQ^St", p.rq_stuff),
            ("mIoU", p.miou),
        ]
    if report.tracking is not None:
        t = report.tracking
        rows += [
            ("PAT", t.pat),
            ("PQ", t.pq),
            ("TQ", t.tq),
            ("LSTQ", t.lstq),
            ("S_assoc", t.s_assoc),
            ("S_cls", t.s_cls),
            ("PTQ", t.ptq),
        ]
    return pd.DataFrame(
        [{"metric": name, "value": to_percent(value)} for name, value in rows],
        columns=["metric", "value"],
    )


def per_class_table(report: MetricReport) -> pd.DataFrame:
    """
    Per-class scores of a report as full-precision ratios.

    Semantic IoU and panoptic scores are joined on the class; absent values are NaN.

    Args:
        report: Finalized report

    Returns:
        DataFrame with one row per class, ordered by class_id
    """
    table: Optional[pd.DataFrame] = None
    if report.semantic is not None:
        table = pd.DataFrame([c.model_dump() for c in report.semantic.per_class])
    if report.panoptic is not None:
        panoptic = pd.DataFrame([c.model_dump() for c in report.panoptic.per_class])
        if table is None:
            table = panoptic
        else:
            table = table.merge(panoptic.drop(columns=["iou"]), on=["class_id", "name"], how="outer")
    if report.tracking is not None and report.tracking.per_class_ptq:
        ptq = pd.DataFrame(
            [{"name": name, "ptq": value} for name, value in report.tracking.per_class_ptq.items()]
        )
        table = ptq if table is None else table.merge(ptq, on="name", how="outer")
    if table is None:
        return pd.DataFrame()
    if "class_id" in table.columns:
        table = table.sort_values("class_id", kind="stable")
    return table.reset_index(drop=True)


def sequence_table(report: MetricReport) -> pd.DataFrame:
    """Per-sequence breakdown with percentages."""
    rows = []
    for seq in report.sequences:
        row = seq.model_dump()
        for key, value in row.items():
            if isinstance(value, float):
                row[key] = to_percent(value)
            elif value is None:
                row[key] = "n/a"
        rows.append(row)
    return pd.DataFrame(rows)


def render_report(report: MetricReport) -> str:
    """Human-readable summary: aggregate table, then the per-sequence table if any."""
    parts = [summary_table(report).to_string(index=False)]
    if report.sequences:
        parts.append(sequence_table(report).to_string(index=False))
    return "\n\n".join(parts)


def _atomic_write(path: PathLike, write: Callable[[str], None]) -> Path:
    """Write through a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(handle)
    try:
        write(tmp_name)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    return path


def write_report(report: MetricReport, path: PathLike) -> Path:
    """
    Write a report as JSON, atomically.

    Args:
        report: Finalized report
        path: Output path

    Returns:
        The written path
    """

    def write(tmp_name: str) -> None:
        with open(tmp_name, "w", encoding="utf-8") as f:
            json.dump(report.model_dump(mode="json"), f, indent=2)
            f.write("\n")

    written = _atomic_write(path, write)
    logger.info(f"Report written to {written}")
    return written


def write_table_csv(table: pd.DataFrame, path: PathLike) -> Path:
    """Write a DataFrame as CSV, atomically."""
    written = _atomic_write(path, lambda tmp_name: table.to_csv(tmp_name, index=False))
    logger.info(f"Table written to {written}")
    return written


def load_report(path: PathLike) -> MetricReport:
    with open(path, "r", encoding="utf-8") as f:
        return MetricReport(**json.load(f))

