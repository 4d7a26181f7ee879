"""Grid sweeps over k, metric, minimum-agreement value and training size.

Static mode works on fixed splits: hold out a test share at the 604:100
ratio, subsample the remaining pool down to each training fraction,
classify the test split and average per-cell statistics over shuffle seeds.
Online mode replays the growing-dataset loop per (k, metric, l) cell.

Cells that cannot run (training set smaller than k, or a loop config whose
seed phase cannot cover k) are emitted as explicit ``infeasible`` rows.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classifier import (
    COSINE,
    EUCLIDEAN,
    MANHATTAN,
    Label,
    Metric,
    _batch_distances,
    min_agreeing_count,
    minkowski,
)
from .metrics import summarize_runs
from .online import LabeledTrial, LoopConfig, run_replicated
from .signal import FeatureVector, PreprocessConfig, preprocess

__all__ = ["GridSpec", "GridRow", "static_grid", "online_grid"]

# Held-out test share of the whole dataset: 100 of 704 trials; the rest is
# the training pool.
_TEST_SHARE = 100 / 704


@dataclass(frozen=True)
class GridSpec:
    """Axes of the sweep.

    Defaults cover a spread of neighbourhood sizes, all four metrics,
    agreement thresholds from plain majority to unanimity, and training
    fractions down to 15%.
    """

    k_values: tuple[int, ...] = (5, 11, 15, 21, 25)
    metrics: tuple[Metric, ...] = (COSINE, EUCLIDEAN, MANHATTAN, minkowski(3.0))
    l_values: tuple[float, ...] = (50.0, 60.0, 70.0, 80.0, 90.0, 100.0)
    train_fractions: tuple[float, ...] = (0.15, 0.30, 0.45, 0.60, 0.75, 0.90, 1.0)

    def __post_init__(self) -> None:
        if not (self.k_values and self.metrics and self.l_values and self.train_fractions):
            raise ValueError("every grid axis must be non-empty")
        if any(k < 1 for k in self.k_values):
            raise ValueError("k values must be positive")
        if any(not 50.0 <= l <= 100.0 for l in self.l_values):
            raise ValueError("l values must lie in [50, 100]")
        if any(not 0.0 < f <= 1.0 for f in self.train_fractions):
            raise ValueError("train fractions must lie in (0, 1]")


@dataclass(frozen=True)
class GridRow:
    """One cell of the sweep; statistics are means over seeds or runs."""

    k: int
    metric: str
    l_value: float
    train_fraction: float
    status: str
    precision: float | None = None
    recall: float | None = None
    uncertain_pct: float | None = None
    tp: float | None = None
    fp: float | None = None
    tn: float | None = None
    fn: float | None = None


def _sort_key(row: GridRow):
    return (row.k, row.metric, row.l_value, row.train_fraction)


@dataclass
class _CellStats:
    precisions: list[float] = dataclasses.field(default_factory=list)
    recalls: list[float] = dataclasses.field(default_factory=list)
    uncertain_pcts: list[float] = dataclasses.field(default_factory=list)
    cells: list[tuple[int, int, int, int]] = dataclasses.field(default_factory=list)

    def add(self, tp: int, fp: int, tn: int, fn: int, uncertain: int, n_eval: int) -> None:
        if tp + fp > 0:
            self.precisions.append(tp / (tp + fp))
        if tp + fn > 0:
            self.recalls.append(tp / (tp + fn))
        self.uncertain_pcts.append(100.0 * uncertain / n_eval)
        self.cells.append((tp, fp, tn, fn))

    def to_row(self, k: int, metric: Metric, l_value: float, fraction: float) -> GridRow:
        n = len(self.cells)
        mean_cells = [sum(cell[i] for cell in self.cells) / n for i in range(4)]
        return GridRow(
            k=k,
            metric=str(metric),
            l_value=l_value,
            train_fraction=fraction,
            status="ok",
            precision=(sum(self.precisions) / len(self.precisions)) if self.precisions else None,
            recall=(sum(self.recalls) / len(self.recalls)) if self.recalls else None,
            uncertain_pct=sum(self.uncertain_pcts) / n,
            tp=mean_cells[0],
            fp=mean_cells[1],
            tn=mean_cells[2],
            fn=mean_cells[3],
        )


def static_grid(
    trials: Sequence[LabeledTrial],
    grid: GridSpec = GridSpec(),
    preprocess_cfg: PreprocessConfig = PreprocessConfig(),
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
) -> list[GridRow]:
    """Sweep fixed train/test splits, averaging each cell over shuffle seeds.

    Per seed the trials are permuted once; the test split is the trailing
    100/704 share (at least one trial) and each training fraction takes a
    prefix of the remaining pool, so larger fractions extend smaller ones.
    """
    trials = list(trials)
    if not seeds:
        raise ValueError("at least one seed is required")
    if len(trials) < 2:
        raise ValueError("dataset too small to split")
    features = np.stack([preprocess(t.trace, preprocess_cfg).values for t in trials])
    norms = np.linalg.norm(features, axis=1)
    is_pos = np.array([t.truth is Label.POSITIVE for t in trials])
    n = len(trials)
    test_size = max(1, round(n * _TEST_SHARE))
    pool_size = n - test_size

    stats: dict[tuple[int, int, float, float], _CellStats] = {}
    infeasible: set[tuple[int, int, float, float]] = set()
    for seed in seeds:
        order = np.random.default_rng(seed).permutation(n)
        pool_idx, test_idx = order[:pool_size], order[pool_size:]
        truth_pos = is_pos[test_idx]
        for metric_i, metric in enumerate(grid.metrics):
            dists = np.stack(
                [
                    _batch_distances(features[pool_idx], norms[pool_idx], features[t], metric)
                    for t in test_idx
                ]
            )
            for fraction in grid.train_fractions:
                train_size = round(fraction * pool_size)
                ranked = np.argsort(dists[:, :train_size], axis=1, kind="stable")
                for k in grid.k_values:
                    if train_size < k:
                        for l_value in grid.l_values:
                            infeasible.add((k, metric_i, l_value, fraction))
                        continue
                    neighbor_pos = is_pos[pool_idx[:train_size]][ranked[:, :k]]
                    n_pos = neighbor_pos.sum(axis=1)
                    n_neg = k - n_pos
                    for l_value in grid.l_values:
                        threshold = min_agreeing_count(k, l_value)
                        commit = np.maximum(n_pos, n_neg) >= threshold
                        decided_pos = (n_pos > n_neg) & commit
                        decided_neg = (n_neg > n_pos) & commit
                        uncertain = int((~(decided_pos | decided_neg)).sum())
                        tp = int((decided_pos & truth_pos).sum())
                        fp = int((decided_pos & ~truth_pos).sum())
                        tn = int((decided_neg & ~truth_pos).sum())
                        fn = int((decided_neg & truth_pos).sum())
                        key = (k, metric_i, l_value, fraction)
                        stats.setdefault(key, _CellStats()).add(
                            tp, fp, tn, fn, uncertain, len(test_idx)
                        )

    rows = [
        cell.to_row(k, grid.metrics[metric_i], l_value, fraction)
        for (k, metric_i, l_value, fraction), cell in stats.items()
    ]
    rows.extend(
        GridRow(
            k=k,
            metric=str(grid.metrics[metric_i]),
            l_value=l_value,
            train_fraction=fraction,
            status="infeasible",
        )
        for (k, metric_i, l_value, fraction) in infeasible
    )
    return sorted(rows, key=_sort_key)


def online_grid(
    trials: Sequence[LabeledTrial],
    grid: GridSpec = GridSpec(),
    base_cfg: LoopConfig = LoopConfig(),
    base_seed: int | None = None,
) -> list[GridRow]:
    """Replay the online loop for every (k, metric, l) cell.

    Each cell averages ``base_cfg.n_runs`` shuffled runs; the training
    fraction axis does not apply (the whole stream is consumed) and is
    reported as 1.0. Cells whose config is unsatisfiable (seed phase smaller
    than k) become infeasible rows.
    """
    trials = list(trials)
    rows = []
    features: dict[str, FeatureVector] = {}
    for k in grid.k_values:
        for metric in grid.metrics:
            for l_value in grid.l_values:
                try:
                    cfg = dataclasses.replace(base_cfg, k=k, metric=metric, l_value=l_value)
                except ValueError:
                    rows.append(
                        GridRow(k=k, metric=str(metric), l_value=l_value,
                                train_fraction=1.0, status="infeasible")
                    )
                    continue
                reports = run_replicated(trials, cfg, base_seed, feature_cache=features)
                summary = summarize_runs(reports)
                rows.append(
                    GridRow(
                        k=k,
                        metric=str(metric),
                        l_value=l_value,
                        train_fraction=1.0,
                        status="ok",
                        precision=summary.mean_precision,
                        recall=summary.mean_recall,
                        uncertain_pct=100.0 * summary.mean_uncertain / summary.n_records,
                        tp=summary.mean_tp,
                        fp=summary.mean_fp,
                        tn=summary.mean_tn,
                        fn=summary.mean_fn,
                    )
                )
    return sorted(rows, key=_sort_key)
