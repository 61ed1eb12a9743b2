#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: timeseries.py

Main purpose:
- Hold the raw series value type and the PAA output type.
- z-normalize series (population standard deviation).
- Piecewise Aggregate Approximation with fractional point weights, so any
  (n, w) pair with 1 <= w <= n is accepted, and its mirror `inverse_paa`
  used by reconstruction.

All functions are pure; values are read-only numpy arrays.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from edwsax_common import InvalidLength, InvalidWordLength

CONSTANT_STD_EPS = 1e-12


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    values: np.ndarray
    constant: bool = False

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.size < 1:
            raise InvalidLength("time series must contain at least one value")
        if not np.all(np.isfinite(arr)):
            raise InvalidLength("time series contains NaN or infinite values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class PaaSeries:
    segments: np.ndarray
    source_length: int

    def __post_init__(self):
        object.__setattr__(self, "segments", _frozen_array(self.segments))

    @property
    def word_length(self) -> int:
        return int(self.segments.size)


SeriesLike = Union[TimeSeries, Sequence[float], np.ndarray]


def as_series(series: SeriesLike) -> TimeSeries:
    if isinstance(series, TimeSeries):
        return series
    return TimeSeries(series)


def znormalize(series: SeriesLike) -> TimeSeries:
    """
    Zero mean, unit population standard deviation.

    A series whose std is below 1e-12 maps to all zeros with `constant=True`.
    """
    s = as_series(series)
    x = s.values
    std = float(np.std(x))
    if std < CONSTANT_STD_EPS:
        return TimeSeries(np.zeros_like(x), constant=True)
    return TimeSeries((x - float(np.mean(x))) / std)


def _overlap_weights(n: int, w: int) -> np.ndarray:
    # Row i: how much of each unit-width point j falls into segment i.
    edges = np.arange(w + 1, dtype=np.float64) * (n / w)
    edges[-1] = float(n)
    left = np.arange(n, dtype=np.float64)
    right = left + 1.0
    lo = np.maximum(edges[:-1, None], left[None, :])
    hi = np.minimum(edges[1:, None], right[None, :])
    return np.clip(hi - lo, 0.0, None)


def paa(series: SeriesLike, w: int) -> PaaSeries:
    s = as_series(series)
    n = len(s)
    if not isinstance(w, (int, np.integer)) or w < 1 or w > n:
        raise InvalidWordLength(f"word length must satisfy 1 <= w <= {n}, got {w}")
    w = int(w)
    x = s.values
    if w == n:
        return PaaSeries(x.copy(), n)
    if n % w == 0:
        return PaaSeries(x.reshape(w, n // w).mean(axis=1), n)
    segments = _overlap_weights(n, w) @ x / (n / w)
    # Rounding in the weights must not push a mean outside the data range.
    segments = np.clip(segments, float(np.min(x)), float(np.max(x)))
    return PaaSeries(segments, n)


def inverse_paa(values: Sequence[float], n: int) -> np.ndarray:
    """
    Expand w segment values back to n points so that `paa(inverse_paa(v, n), w)`
    returns v.

    Divisible lengths repeat each value n/w times. Otherwise the minimum-norm
    solution of the PAA weight system is returned: segment means are exact, but
    single points near a shared boundary may leave the range of v.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    w = int(v.size)
    if w < 1:
        raise InvalidWordLength("cannot expand an empty word")
    if n < w:
        raise InvalidLength(f"target length {n} is shorter than word length {w}")
    if n % w == 0:
        return np.repeat(v, n // w)
    weights = _overlap_weights(n, w)
    # Rows are in echelon form (each segment starts at a later point), so W W^T is invertible.
    coef = np.linalg.solve(weights @ weights.T, v * (n / w))
    return weights.T @ coef
