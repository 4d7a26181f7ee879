"""Force-trace preprocessing: Savitzky-Golay smoothing and mean down-sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import savgol_filter

__all__ = [
    "ForceTrace",
    "FeatureVector",
    "PreprocessConfig",
    "savgol_smooth",
    "downsample_mean",
    "preprocess",
]


def _as_finite_1d(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{what} must be a non-empty 1-D sequence of numbers")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ForceTrace:
    """Fixed-rate z-axis force recording of one insertion trial.

    The canonical recording is 1000 samples at 500 Hz (2 s), but any
    non-empty finite trace is accepted.
    """

    samples: np.ndarray
    sample_rate: float = 500.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _as_finite_1d(self.samples, "trace"))
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Trace length in seconds."""
        return len(self) / self.sample_rate


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Smoothed, down-sampled force profile as consumed by the classifier."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_finite_1d(self.values, "feature vector"))

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class PreprocessConfig:
    """Smoothing and down-sampling parameters.

    Defaults: 15-sample quadratic smoothing, then non-overlapping 10-sample
    mean windows, which reduce a 1000-sample trace to a 100-dimensional
    feature vector.
    """

    sg_window: int = 15
    sg_order: int = 2
    ds_window: int = 10
    ds_stride: int = 10

    def __post_init__(self) -> None:
        if self.sg_window < 1 or self.sg_window % 2 == 0:
            raise ValueError("sg_window must be an odd positive integer")
        if self.sg_order < 0 or self.sg_order >= self.sg_window:
            raise ValueError("sg_order must satisfy 0 <= sg_order < sg_window")
        if self.ds_window < 1:
            raise ValueError("ds_window must be >= 1")
        if self.ds_stride < 1:
            raise ValueError("ds_stride must be >= 1")


def savgol_smooth(trace: ForceTrace, window: int = 15, order: int = 2) -> ForceTrace:
    """Smooth a trace with a least-squares polynomial (Savitzky-Golay) filter.

    Each interior sample takes the value of the degree-``order`` polynomial
    fitted to the ``window`` samples centred on it. Near the edges the
    first/last full window is fitted once and the polynomial evaluated at the
    boundary offsets, so any polynomial of degree <= ``order`` passes through
    the filter unchanged at every index. Output length equals input length.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd positive integer")
    if order < 0 or order >= window:
        raise ValueError("order must satisfy 0 <= order < window")
    if len(trace) < window:
        raise ValueError(f"trace of length {len(trace)} is shorter than window {window}")
    smoothed = savgol_filter(trace.samples, window, order, mode="interp")
    return ForceTrace(smoothed, trace.sample_rate)


def downsample_mean(trace: ForceTrace, window: int = 10, stride: int = 10) -> FeatureVector:
    """Reduce a trace to the means of sliding windows.

    Output j is the arithmetic mean of samples ``[j*stride, j*stride+window)``;
    trailing samples that do not fill a window are dropped, giving
    ``floor((n - window) / stride) + 1`` values.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if len(trace) < window:
        raise ValueError(f"trace of length {len(trace)} is shorter than window {window}")
    windows = sliding_window_view(trace.samples, window)[::stride]
    return FeatureVector(windows.mean(axis=1))


def preprocess(trace: ForceTrace, cfg: PreprocessConfig = PreprocessConfig()) -> FeatureVector:
    """Smooth then down-sample: the full trace-to-feature pipeline."""
    smoothed = savgol_smooth(trace, cfg.sg_window, cfg.sg_order)
    return downsample_mean(smoothed, cfg.ds_window, cfg.ds_stride)
