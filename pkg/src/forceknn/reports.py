"""Deterministic CSV / JSON-lines emission for runs, window series and grids.

All floats are written with shortest round-trip ``repr`` and every CSV opens
with a ``#``-prefixed config echo, so identical inputs produce byte-identical
files that state how to reproduce them.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .metrics import SummaryRow, TimeModel, cycle_time, sliding_window_series
from .online import RunReport

__all__ = [
    "WindowAggregate",
    "aggregate_window_series",
    "config_echo",
    "write_records_jsonl",
    "write_summary_csv",
    "write_windows_csv",
    "write_grid_csv",
]

SUMMARY_COLUMNS = [
    "l_value",
    "n_runs",
    "n_records",
    "mean_dataset_size",
    "mean_verification_count",
    "mean_precision",
    "precision_undefined_runs",
    "mean_recall",
    "recall_undefined_runs",
    "mean_tp",
    "mean_fp",
    "mean_tn",
    "mean_fn",
    "mean_uncertain",
    "pooled_precision",
    "pooled_recall",
]

WINDOW_COLUMNS = [
    "l_value",
    "index",
    "mean_precision",
    "precision_defined_runs",
    "mean_uncertain_fraction",
    "mean_cycle_cost",
]

GRID_COLUMNS = [
    "k",
    "metric",
    "l_value",
    "train_fraction",
    "status",
    "precision",
    "recall",
    "uncertain_pct",
    "tp",
    "fp",
    "tn",
    "fn",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_echo(pairs: Mapping[str, object]) -> list[str]:
    return [f"# {key} = {_fmt(value)}" for key, value in pairs.items()]


@dataclass(frozen=True)
class WindowAggregate:
    """Across-run mean of one sliding-window index."""

    index: int
    mean_precision: float | None
    precision_defined_runs: int
    mean_uncertain_fraction: float
    mean_cycle_cost: float


def aggregate_window_series(
    reports: Sequence[RunReport],
    tm: TimeModel = TimeModel(),
    window: int = 100,
) -> list[WindowAggregate]:
    """Average the per-run sliding-window series index by index.

    Window precision is undefined when a window holds no classified trials;
    such runs are excluded from that index's mean and counted.
    """
    all_points = [sliding_window_series(report.records, window) for report in reports]
    all_costs = [cycle_time(report.records, tm, window)[1] for report in reports]
    lengths = {len(points) for points in all_points}
    if len(lengths) > 1:
        raise ValueError("runs produced window series of different lengths")
    n_runs = len(reports)
    aggregates = []
    for j in range(lengths.pop() if lengths else 0):
        precisions = [points[j].precision for points in all_points]
        defined = [p for p in precisions if p is not None]
        aggregates.append(
            WindowAggregate(
                index=all_points[0][j].index,
                mean_precision=(sum(defined) / len(defined)) if defined else None,
                precision_defined_runs=len(defined),
                mean_uncertain_fraction=sum(points[j].uncertain_fraction for points in all_points)
                / n_runs,
                mean_cycle_cost=sum(costs[j].mean_cost for costs in all_costs) / n_runs,
            )
        )
    return aggregates


def _write_csv(path: Path, echo: Mapping[str, object], columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in config_echo(echo):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(value) for value in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def write_records_jsonl(path: str | Path, reports: Sequence[RunReport]) -> None:
    """One JSON object per processed trial, across all runs in order."""
    lines = []
    for run_index, report in enumerate(reports):
        for record in report.records:
            payload = {
                "run": run_index,
                "run_seed": report.rng_seed,
                "trial_id": record.trial_id,
                "phase": record.phase.value,
                "decision": record.decision.value,
                "verified": record.verified,
                "predicted": record.predicted.value,
                "truth": record.truth.value,
            }
            lines.append(json.dumps(payload, sort_keys=True))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8", newline="\n")


def write_summary_csv(
    path: str | Path, rows: Sequence[SummaryRow], echo: Mapping[str, object]
) -> None:
    _write_csv(
        Path(path),
        echo,
        SUMMARY_COLUMNS,
        (
            [
                row.l_value,
                row.n_runs,
                row.n_records,
                row.mean_dataset_size,
                row.mean_verification_count,
                row.mean_precision,
                row.precision_undefined_runs,
                row.mean_recall,
                row.recall_undefined_runs,
                row.mean_tp,
                row.mean_fp,
                row.mean_tn,
                row.mean_fn,
                row.mean_uncertain,
                row.pooled_precision,
                row.pooled_recall,
            ]
            for row in rows
        ),
    )


def write_windows_csv(
    path: str | Path,
    series_by_l: Sequence[tuple[float, Sequence[WindowAggregate]]],
    echo: Mapping[str, object],
) -> None:
    _write_csv(
        Path(path),
        echo,
        WINDOW_COLUMNS,
        (
            [
                l_value,
                point.index,
                point.mean_precision,
                point.precision_defined_runs,
                point.mean_uncertain_fraction,
                point.mean_cycle_cost,
            ]
            for l_value, series in series_by_l
            for point in series
        ),
    )


def write_grid_csv(path: str | Path, rows, echo: Mapping[str, object]) -> None:
    _write_csv(
        Path(path),
        echo,
        GRID_COLUMNS,
        (
            [
                row.k,
                row.metric,
                row.l_value,
                row.train_fraction,
                row.status,
                row.precision,
                row.recall,
                row.uncertain_pct,
                row.tp,
                row.fp,
                row.tn,
                row.fn,
            ]
            for row in rows
        ),
    )
