#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: distance.py

Main purpose:
- Build the symbol-to-symbol lookup table from interior breakpoints.
- MINDIST between two symbol words, which lower-bounds the Euclidean
  distance of the underlying z-normalized series.
- Euclidean distance and the tightness-of-lower-bound ratio.

Indexing used throughout: symbols are 0-based (0 .. a-1), interior
breakpoints b[0] .. b[a-2] are 0-based as well. Symbol j covers
[b[j-1], b[j]) with b[-1] = -inf and b[a-1] = +inf. For |q - c| > 1:

    cell(q, c) = b[max(q, c) - 1] - b[min(q, c)]

i.e. the lower edge of the greater symbol minus the upper edge of the
smaller one.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from edwsax_common import InvalidAlphabet, InvalidLength, LengthMismatch, WordMismatch
from timeseries import SeriesLike, as_series, paa


@dataclass(frozen=True, eq=False)
class DistanceTable:
    cells: np.ndarray

    def __post_init__(self):
        arr = np.array(self.cells, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidAlphabet(f"lookup table must be square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @property
    def alphabet_size(self) -> int:
        return int(self.cells.shape[0])

    def same_as(self, other: "DistanceTable") -> bool:
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells))


def build_lookup(interior: Sequence[float]) -> DistanceTable:
    b = np.asarray(getattr(interior, "interior", interior), dtype=np.float64).reshape(-1)
    a = b.size + 1
    if a < 2:
        raise InvalidAlphabet("at least one interior breakpoint is required")
    q = np.arange(a)[:, None]
    c = np.arange(a)[None, :]
    hi = np.maximum(q, c)
    lo = np.minimum(q, c)
    far = (hi - lo) > 1
    cells = np.zeros((a, a), dtype=np.float64)
    cells[far] = b[(hi - 1)[far]] - b[lo[far]]
    return DistanceTable(cells)


def _symbols_of(word) -> np.ndarray:
    return np.asarray(getattr(word, "symbols", word), dtype=np.int64).reshape(-1)


def mindist(q, c, table: DistanceTable, n: int) -> float:
    qs = _symbols_of(q)
    cs = _symbols_of(c)
    if qs.size != cs.size:
        raise WordMismatch(f"word lengths differ: {qs.size} vs {cs.size}")
    for word in (q, c):
        a = getattr(word, "alphabet_size", None)
        if a is not None and a != table.alphabet_size:
            raise WordMismatch(f"word alphabet {a} does not match table alphabet {table.alphabet_size}")
    w = qs.size
    if w < 1:
        raise WordMismatch("words are empty")
    if n < w:
        raise InvalidLength(f"series length {n} is shorter than word length {w}")
    a = table.alphabet_size
    if qs.min() < 0 or cs.min() < 0 or qs.max() >= a or cs.max() >= a:
        raise WordMismatch(f"symbol index outside alphabet of size {a}")
    d = table.cells[qs, cs]
    return math.sqrt(n / w) * math.sqrt(float(np.sum(d * d)))


def mindist_many(q_words: np.ndarray, c_words: np.ndarray, table: DistanceTable, n: int) -> np.ndarray:
    """Row-wise MINDIST for two (pairs x w) symbol matrices."""
    d = table.cells[q_words, c_words]
    w = q_words.shape[1]
    return np.sqrt(n / w) * np.sqrt(np.sum(d * d, axis=1))


def euclidean(a: SeriesLike, b: SeriesLike) -> float:
    x = as_series(a).values
    y = as_series(b).values
    if x.size != y.size:
        raise LengthMismatch(f"series lengths differ: {x.size} vs {y.size}")
    diff = x - y
    return math.sqrt(float(np.dot(diff, diff)))


def tlb(raw_q: SeriesLike, raw_c: SeriesLike, model, w: int) -> Optional[float]:
    """
    MINDIST / Euclidean for one pair; None when the series are identical.
    Inputs are expected to be normalized already.
    """
    q = as_series(raw_q)
    c = as_series(raw_c)
    if len(q) != len(c):
        raise LengthMismatch(f"series lengths differ: {len(q)} vs {len(c)}")
    ed = euclidean(q, c)
    if ed == 0.0:
        return None
    q_word = model.symbolize(paa(q, w))
    c_word = model.symbolize(paa(c, w))
    return mindist(q_word, c_word, model.lookup, len(q)) / ed
