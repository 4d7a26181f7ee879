"""Confusion accounting, precision/recall, window series and the cycle-time model."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .classifier import Label
from .online import Phase, RunReport, TrialRecord

__all__ = [
    "ConfusionMode",
    "ConfusionCounts",
    "TimeModel",
    "WindowPoint",
    "WindowCost",
    "SummaryRow",
    "confusion",
    "precision",
    "recall",
    "sliding_window_series",
    "cycle_time",
    "cycle_time_total",
    "verification_savings",
    "summarize_runs",
]


class ConfusionMode(Enum):
    """What counts as a prediction when tallying records.

    CLASSIFIER_ONLY scores only trials the classifier actually answered;
    seed and fallback trials land in the ``uncertain`` bucket. END_TO_END
    scores the final label of every trial (oracle-resolved ones are correct
    by construction).
    """

    CLASSIFIER_ONLY = "classifier_only"
    END_TO_END = "end_to_end"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    uncertain: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn, self.uncertain) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn + self.uncertain


@dataclass(frozen=True)
class TimeModel:
    """Per-trial cost: a full iteration, minus the verification step when skipped."""

    iteration_cost: float = 45.0
    verification_cost: float = 5.0

    def __post_init__(self) -> None:
        if self.iteration_cost <= 0 or self.verification_cost <= 0:
            raise ValueError("costs must be positive")
        if self.verification_cost > self.iteration_cost:
            raise ValueError("verification_cost cannot exceed iteration_cost")


def _ratio(num: float, den: float) -> float | None:
    """num/den, or None when the ratio is undefined (never a silent 0 or 1)."""
    if den == 0:
        return None
    return num / den


def confusion(
    records: Sequence[TrialRecord],
    mode: ConfusionMode = ConfusionMode.CLASSIFIER_ONLY,
) -> ConfusionCounts:
    """Tally records into confusion cells against ground truth."""
    if not records:
        raise ValueError("no records to tally")
    tp = fp = tn = fn = uncertain = 0
    for record in records:
        if mode is ConfusionMode.CLASSIFIER_ONLY and record.phase is not Phase.CLASSIFIED:
            uncertain += 1
            continue
        if record.predicted is Label.POSITIVE:
            if record.truth is Label.POSITIVE:
                tp += 1
            else:
                fp += 1
        else:
            if record.truth is Label.NEGATIVE:
                tn += 1
            else:
                fn += 1
    return ConfusionCounts(tp, fp, tn, fn, uncertain)


def precision(counts: ConfusionCounts) -> float | None:
    return _ratio(counts.tp, counts.tp + counts.fp)


def recall(counts: ConfusionCounts) -> float | None:
    return _ratio(counts.tp, counts.tp + counts.fn)


class WindowPoint(NamedTuple):
    index: int
    precision: float | None
    uncertain_fraction: float


class WindowCost(NamedTuple):
    index: int
    mean_cost: float


def _window_sums(flags: np.ndarray, window: int) -> np.ndarray:
    cum = np.concatenate(([0], np.cumsum(flags, dtype=np.int64)))
    return cum[window:] - cum[:-window]


def sliding_window_series(
    records: Sequence[TrialRecord], window: int = 100
) -> list[WindowPoint]:
    """Classifier precision and verified fraction over each trailing window.

    Point ``index`` covers ``records[index - window + 1 .. index]``; streams
    shorter than the window yield an empty series.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    n = len(records)
    if n < window:
        return []
    classified = np.fromiter(
        (r.phase is Phase.CLASSIFIED for r in records), dtype=np.int64, count=n
    )
    pred_pos = np.fromiter(
        (r.predicted is Label.POSITIVE for r in records), dtype=np.int64, count=n
    )
    truth_pos = np.fromiter(
        (r.truth is Label.POSITIVE for r in records), dtype=np.int64, count=n
    )
    verified = np.fromiter((r.verified for r in records), dtype=np.int64, count=n)
    tp = _window_sums(classified * pred_pos * truth_pos, window)
    fp = _window_sums(classified * pred_pos * (1 - truth_pos), window)
    ver = _window_sums(verified, window)
    return [
        WindowPoint(
            index=window - 1 + j,
            precision=_ratio(int(tp[j]), int(tp[j] + fp[j])),
            uncertain_fraction=int(ver[j]) / window,
        )
        for j in range(n - window + 1)
    ]


def cycle_time(
    records: Sequence[TrialRecord],
    tm: TimeModel = TimeModel(),
    window: int = 100,
) -> tuple[float, list[WindowCost]]:
    """Total execution time of a record stream plus its sliding-window mean cost.

    A verified trial costs the full iteration; skipping verification saves
    ``tm.verification_cost``.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    n = len(records)
    verified = np.fromiter((r.verified for r in records), dtype=float, count=n)
    costs = np.where(verified > 0, tm.iteration_cost, tm.iteration_cost - tm.verification_cost)
    total = float(costs.sum())
    if n < window:
        return total, []
    cum = np.concatenate(([0.0], np.cumsum(costs)))
    sums = cum[window:] - cum[:-window]
    series = [WindowCost(window - 1 + j, float(sums[j]) / window) for j in range(n - window + 1)]
    return total, series


def cycle_time_total(n_records: float, n_verified: float, tm: TimeModel = TimeModel()) -> float:
    """Closed-form stream cost; accepts fractional run-averaged counts."""
    return n_records * tm.iteration_cost - (n_records - n_verified) * tm.verification_cost


def verification_savings(n_records: float, n_verified: float, tm: TimeModel = TimeModel()) -> float:
    """Time saved versus verifying every trial."""
    return (n_records - n_verified) * tm.verification_cost


@dataclass(frozen=True)
class SummaryRow:
    """Run-averaged statistics for one loop configuration.

    ``mean_precision``/``mean_recall`` average the per-run ratios (runs where
    the ratio is undefined are excluded and counted); the pooled variants are
    ratios of the mean confusion cells, emitted for transparency since the
    two aggregations differ.
    """

    l_value: float
    n_runs: int
    n_records: float
    mean_dataset_size: float
    mean_verification_count: float
    mean_precision: float | None
    mean_recall: float | None
    precision_undefined_runs: int
    recall_undefined_runs: int
    mean_tp: float
    mean_fp: float
    mean_tn: float
    mean_fn: float
    mean_uncertain: float
    pooled_precision: float | None
    pooled_recall: float | None


def summarize_runs(
    reports: Sequence[RunReport],
    mode: ConfusionMode = ConfusionMode.CLASSIFIER_ONLY,
) -> SummaryRow:
    """Average per-run statistics over replicated runs."""
    if not reports:
        raise ValueError("no reports to summarize")
    counts = [confusion(report.records, mode) for report in reports]
    precisions = [precision(c) for c in counts]
    recalls = [recall(c) for c in counts]
    defined_p = [p for p in precisions if p is not None]
    defined_r = [r for r in recalls if r is not None]
    n = len(reports)

    def mean(values) -> float:
        return float(sum(values)) / n

    mean_tp = mean(c.tp for c in counts)
    mean_fp = mean(c.fp for c in counts)
    mean_fn = mean(c.fn for c in counts)
    return SummaryRow(
        l_value=reports[0].config.l_value,
        n_runs=n,
        n_records=mean(len(report.records) for report in reports),
        mean_dataset_size=mean(report.final_dataset_size for report in reports),
        mean_verification_count=mean(report.verified_count for report in reports),
        mean_precision=(sum(defined_p) / len(defined_p)) if defined_p else None,
        mean_recall=(sum(defined_r) / len(defined_r)) if defined_r else None,
        precision_undefined_runs=n - len(defined_p),
        recall_undefined_runs=n - len(defined_r),
        mean_tp=mean_tp,
        mean_fp=mean_fp,
        mean_tn=mean(c.tn for c in counts),
        mean_fn=mean_fn,
        mean_uncertain=mean(c.uncertain for c in counts),
        pooled_precision=_ratio(mean_tp, mean_tp + mean_fp),
        pooled_recall=_ratio(mean_tp, mean_tp + mean_fn),
    )
