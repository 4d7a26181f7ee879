"""Abstaining k-nearest-neighbour classification of force features.

A query is answered with the majority label of its k nearest reference
samples only when the share of agreeing neighbours reaches a configurable
minimum-agreement percentage; below that the classifier abstains and the
caller is expected to fall back to an authoritative check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .signal import FeatureVector

__all__ = [
    "Label",
    "Decision",
    "Metric",
    "COSINE",
    "EUCLIDEAN",
    "MANHATTAN",
    "minkowski",
    "KnnModel",
    "distance",
    "nearest_labels",
    "decide",
    "classify",
    "min_agreeing_count",
]


class Label(Enum):
    """Ground-truth outcome of an insertion trial."""

    POSITIVE = "positive"
    NEGATIVE = "negative"


class Decision(Enum):
    """Three-way classifier verdict; UNCERTAIN means the vote abstained."""

    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNCERTAIN = "uncertain"

    @classmethod
    def from_label(cls, label: Label) -> "Decision":
        return cls(label.value)

    def to_label(self) -> Label:
        if self is Decision.UNCERTAIN:
            raise ValueError("an uncertain decision carries no label")
        return Label(self.value)


@dataclass(frozen=True)
class Metric:
    """Distance metric; Minkowski carries an explicit exponent p > 0."""

    kind: str
    p: float | None = None

    _KINDS = ("cosine", "euclidean", "manhattan", "minkowski")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "minkowski":
            if self.p is None or not self.p > 0:
                raise ValueError("minkowski requires an explicit exponent p > 0")
        elif self.p is not None:
            raise ValueError(f"{self.kind} does not take an exponent")

    def __str__(self) -> str:
        if self.kind == "minkowski":
            return f"minkowski:{self.p:g}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Metric":
        """Parse ``cosine`` / ``euclidean`` / ``manhattan`` / ``minkowski[:p]``.

        A bare ``minkowski`` defaults to p = 3 so it stays distinct from the
        euclidean metric.
        """
        token = text.strip().lower()
        if token in ("cosine", "euclidean", "manhattan"):
            return cls(token)
        if token == "minkowski":
            return cls("minkowski", 3.0)
        if token.startswith("minkowski:"):
            return cls("minkowski", float(token.split(":", 1)[1]))
        raise ValueError(f"unknown metric {text!r}")


COSINE = Metric("cosine")
EUCLIDEAN = Metric("euclidean")
MANHATTAN = Metric("manhattan")


def minkowski(p: float = 3.0) -> Metric:
    return Metric("minkowski", p)


def _check_l_value(l_value: float) -> None:
    if not 50.0 <= l_value <= 100.0:
        raise ValueError(f"l_value must lie in [50, 100], got {l_value!r}")


def min_agreeing_count(k: int, l_value: float) -> int:
    """Smallest neighbour count N_c satisfying N_c * 100 >= l_value * k.

    Evaluated in exact rational arithmetic so threshold cases sitting on the
    boundary (e.g. k=11, l=90, where N_c >= 9.9 means at least 10 agreeing
    neighbours) can never be lost to floating-point rounding.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    _check_l_value(l_value)
    return math.ceil(Fraction(l_value) * k / 100)


def _batch_distances(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray, metric: Metric) -> np.ndarray:
    """Distances from every row of ``matrix`` to ``query``."""
    if metric.kind == "cosine":
        query_norm = float(np.linalg.norm(query))
        if query_norm == 0.0 or np.any(norms == 0.0):
            raise ValueError("cosine distance is undefined for a zero-norm vector")
        sims = (matrix @ query) / (norms * query_norm)
        return 1.0 - np.clip(sims, -1.0, 1.0)
    diff = matrix - query
    if metric.kind == "euclidean":
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if metric.kind == "manhattan":
        return np.abs(diff).sum(axis=1)
    return (np.abs(diff) ** metric.p).sum(axis=1) ** (1.0 / metric.p)


def distance(a: FeatureVector, b: FeatureVector, metric: Metric = COSINE) -> float:
    """Distance between two feature vectors under the given metric.

    Cosine distance is 1 - cos(a, b) with the similarity clipped to [-1, 1],
    so it is exactly 0 for positive scalar multiples and never negative.
    """
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    matrix = va[np.newaxis, :]
    norms = np.linalg.norm(matrix, axis=1)
    return float(_batch_distances(matrix, norms, vb, metric)[0])


class KnnModel:
    """Immutable k-NN snapshot over a labelled feature dataset.

    Dataset order is significant: exact distance ties are broken by insertion
    index, which makes classification fully deterministic. Growing the
    reference set means building a new snapshot, never mutating this one.
    """

    def __init__(
        self,
        dataset: Iterable[tuple[FeatureVector, Label]],
        k: int = 11,
        metric: Metric = COSINE,
        l_value: float = 100.0,
    ) -> None:
        entries = tuple(dataset)
        if k < 1:
            raise ValueError("k must be a positive integer")
        _check_l_value(l_value)
        dims = {len(feature) for feature, _ in entries}
        if len(dims) > 1:
            raise ValueError(f"feature vectors of mixed dimension: {sorted(dims)}")
        self.k = int(k)
        self.metric = metric
        self.l_value = float(l_value)
        self._entries = entries
        if entries:
            self._matrix = np.stack([feature.values for feature, _ in entries])
            self._norms = np.linalg.norm(self._matrix, axis=1)
            self._labels = tuple(label for _, label in entries)
            self._dim = int(self._matrix.shape[1])
        else:
            self._matrix = np.empty((0, 0))
            self._norms = np.empty(0)
            self._labels = ()
            self._dim = None

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def dataset(self) -> tuple[tuple[FeatureVector, Label], ...]:
        return self._entries

    def __repr__(self) -> str:
        return (
            f"KnnModel(n={len(self)}, k={self.k}, metric={self.metric}, "
            f"l_value={self.l_value:g})"
        )


def nearest_labels(model: KnnModel, query: FeatureVector) -> list[Label]:
    """Labels of the k dataset entries closest to ``query``.

    Ordered by (distance, insertion index) ascending; the stable sort makes
    exact-distance ties deterministic.
    """
    if len(model) < model.k:
        raise ValueError(f"dataset holds {len(model)} entries but k={model.k}")
    q = query.values
    if q.size != model._dim:
        raise ValueError(f"dimension mismatch: query {q.size}, dataset {model._dim}")
    dists = _batch_distances(model._matrix, model._norms, q, model.metric)
    order = np.argsort(dists, kind="stable")[: model.k]
    return [model._labels[i] for i in order]


def decide(neighbor_labels: Sequence[Label], k: int, l_value: float) -> Decision:
    """Apply the minimum-agreement voting rule to k neighbour labels.

    The majority label is returned only when its vote count N_c satisfies
    N_c * 100 >= l_value * k; otherwise the classifier abstains. At
    l_value = 50 with odd k this reduces to classic majority voting. An
    exact 50/50 split has no majority label and always abstains.
    """
    labels = list(neighbor_labels)
    if not labels:
        raise ValueError("neighbor label list is empty")
    if len(labels) != k:
        raise ValueError(f"expected exactly k={k} neighbor labels, got {len(labels)}")
    n_pos = sum(1 for label in labels if label is Label.POSITIVE)
    n_neg = len(labels) - n_pos
    threshold = min_agreeing_count(k, l_value)
    if n_pos == n_neg:
        return Decision.UNCERTAIN
    majority = Label.POSITIVE if n_pos > n_neg else Label.NEGATIVE
    if max(n_pos, n_neg) >= threshold:
        return Decision.from_label(majority)
    return Decision.UNCERTAIN


def classify(model: KnnModel, query: FeatureVector) -> Decision:
    """Nearest-neighbour vote with abstention: the full query pipeline."""
    return decide(nearest_labels(model, query), model.k, model.l_value)
