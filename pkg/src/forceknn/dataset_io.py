"""Plain-text dataset files holding labelled force traces.

Layout: one metadata header row ``id,label,<n_samples>,<sample_rate>``
followed by one row per trial: id, ``pos``/``neg``, then exactly
``n_samples`` force values in newtons. UTF-8, LF line endings, ``.``
decimal separator. Values are written with shortest round-trip ``repr``,
so write-then-read reproduces traces bit for bit.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classifier import Label
from .online import LabeledTrial
from .signal import ForceTrace

__all__ = ["DatasetFormatError", "write_dataset", "read_dataset"]

_LABEL_TO_TEXT = {Label.POSITIVE: "pos", Label.NEGATIVE: "neg"}
_TEXT_TO_LABEL = {text: label for label, text in _LABEL_TO_TEXT.items()}


class DatasetFormatError(ValueError):
    """Malformed dataset file; the message carries the offending line number."""


def write_dataset(
    path: str | Path,
    trials: Sequence[LabeledTrial],
    *,
    overwrite: bool = False,
    n_samples: int | None = None,
    sample_rate: float | None = None,
) -> None:
    """Write trials to ``path``; refuses to replace an existing file unless asked.

    All trials must share one trace length and sample rate. For an empty
    dataset the header metadata comes from ``n_samples``/``sample_rate``.
    """
    path = Path(path)
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} already exists; pass overwrite/--force to replace it")
    trials = list(trials)
    if trials:
        n_samples = len(trials[0].trace)
        sample_rate = trials[0].trace.sample_rate
        for trial in trials:
            if len(trial.trace) != n_samples or trial.trace.sample_rate != sample_rate:
                raise ValueError("all trials in a dataset file must share n_samples and sample_rate")
    else:
        n_samples = 0 if n_samples is None else int(n_samples)
        sample_rate = 500.0 if sample_rate is None else float(sample_rate)
    lines = [f"id,label,{n_samples},{float(sample_rate)!r}"]
    for trial in trials:
        values = ",".join(repr(float(v)) for v in trial.trace.samples)
        lines.append(f"{trial.id},{_LABEL_TO_TEXT[trial.truth]},{values}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _fail(line_no: int, message: str) -> DatasetFormatError:
    return DatasetFormatError(f"line {line_no}: {message}")


def read_dataset(path: str | Path) -> list[LabeledTrial]:
    """Parse a dataset file; aborts with a line-numbered error on the first defect."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise _fail(1, "missing header")
    header = lines[0].split(",")
    if len(header) != 4 or header[0] != "id" or header[1] != "label":
        raise _fail(1, f"expected header 'id,label,<n_samples>,<sample_rate>', got {lines[0]!r}")
    try:
        n_samples = int(header[2])
        sample_rate = float(header[3])
    except ValueError:
        raise _fail(1, f"bad n_samples/sample_rate in header {lines[0]!r}") from None

    trials: list[LabeledTrial] = []
    seen_ids: set[str] = set()
    for offset, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 2 + n_samples:
            raise _fail(offset, f"expected {2 + n_samples} fields, got {len(fields)}")
        trial_id = fields[0]
        if trial_id in seen_ids:
            raise _fail(offset, f"duplicate trial id {trial_id!r}")
        seen_ids.add(trial_id)
        label = _TEXT_TO_LABEL.get(fields[1])
        if label is None:
            raise _fail(offset, f"label must be 'pos' or 'neg', got {fields[1]!r}")
        try:
            samples = np.array([float(v) for v in fields[2:]])
            trace = ForceTrace(samples, sample_rate)
        except ValueError as exc:
            raise _fail(offset, str(exc)) from None
        trials.append(LabeledTrial(trial_id, trace, label))
    return trials
