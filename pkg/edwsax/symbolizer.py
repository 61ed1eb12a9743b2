#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: symbolizer.py

Main purpose:
- Train edwSAX models: pool z-normalized training points, fit a KDE, then
  place a-1 equiprobable breakpoints and one centroid (conditional median)
  per symbol by inverting the KDE cdf.
- Build the classic SAX model from Gaussian quantiles in the same shape.
- Map PAA segments to symbol words, reconstruct series from words.
- Serialize models to a versioned, self-describing JSON document.

Conventions:
- Symbols are 0-based; symbol j covers [b[j-1], b[j]) so a segment equal
  to a breakpoint goes to the upper symbol.
- Alphabet size is limited to [2, 256].
- Words render as letters a, b, c, ... when a <= 26, else as integers.

Model file layout (UTF-8 JSON, keys sorted):
  magic="EDWSAX", format_version=1, method, alphabet_size, breakpoints,
  centroids, lookup, kernel, bandwidth, bandwidth_rule, sample_count,
  sample_min, sample_max, support_lo, support_hi, estimate_on, word_policy
"""

import json
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.stats import norm

from density import DensityModel, fit_density, kde_cdf, kde_pdf
from distance import DistanceTable, build_lookup
from edwsax_common import (
    CorruptModel,
    DegenerateDensityWarning,
    DegenerateSample,
    FormatVersionMismatch,
    InvalidAlphabet,
    InvalidLength,
    InvalidParameter,
    InvalidWordLength,
    ParseError,
    WordMismatch,
    log_info,
    log_warning,
    write_bytes,
)
from timeseries import PaaSeries, SeriesLike, TimeSeries, as_series, inverse_paa, paa, znormalize

MIN_ALPHABET = 2
MAX_ALPHABET = 256
FORMAT_MAGIC = "EDWSAX"
FORMAT_VERSION = 1
CDF_TOL = 1e-8
MAX_BISECT = 200
PLATEAU_PDF_EPS = 1e-12
ESTIMATE_ON = ("raw", "paa")


def _check_alphabet(a) -> int:
    if isinstance(a, bool) or not isinstance(a, (int, np.integer)) or not (MIN_ALPHABET <= a <= MAX_ALPHABET):
        raise InvalidAlphabet(f"alphabet size must be an integer in [{MIN_ALPHABET}, {MAX_ALPHABET}], got {a}")
    return int(a)


@dataclass(frozen=True, eq=False)
class Breakpoints:
    interior: np.ndarray

    def __post_init__(self):
        b = np.array(self.interior, dtype=np.float64).reshape(-1)
        _check_alphabet(b.size + 1)
        if not np.all(np.isfinite(b)):
            raise InvalidAlphabet("interior breakpoints must be finite")
        if b.size > 1 and not np.all(np.diff(b) > 0):
            raise InvalidAlphabet("breakpoints must be strictly increasing")
        b.setflags(write=False)
        object.__setattr__(self, "interior", b)

    @property
    def alphabet_size(self) -> int:
        return int(self.interior.size + 1)

    @property
    def betas(self) -> np.ndarray:
        return np.concatenate(([-np.inf], self.interior, [np.inf]))


@dataclass(frozen=True, eq=False)
class Centroids:
    gammas: np.ndarray

    def __post_init__(self):
        g = np.array(self.gammas, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(g)):
            raise InvalidAlphabet("centroids must be finite")
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)


@dataclass(frozen=True)
class WordLengthPolicy:
    """Either a fixed word length w or a PAA segment size s (w = max(1, n // s))."""

    word_length: Optional[int] = None
    segment_size: Optional[int] = None

    def __post_init__(self):
        if (self.word_length is None) == (self.segment_size is None):
            raise InvalidParameter("set exactly one of word length or segment size")
        v = self.word_length if self.word_length is not None else self.segment_size
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise InvalidParameter(f"word length / segment size must be a positive integer, got {v}")

    def resolve(self, n: int) -> int:
        if self.word_length is not None:
            if self.word_length > n:
                raise InvalidWordLength(f"word length {self.word_length} exceeds series length {n}")
            return int(self.word_length)
        return max(1, int(n) // int(self.segment_size))

    @property
    def name(self) -> str:
        if self.word_length is not None:
            return f"w={self.word_length}"
        return f"segment={self.segment_size}"

    @staticmethod
    def parse(text: str) -> "WordLengthPolicy":
        m = re.fullmatch(r"(w|segment)=(\d+)", str(text).strip())
        if not m:
            raise InvalidParameter(f"cannot parse word policy '{text}'")
        v = int(m.group(2))
        return WordLengthPolicy(word_length=v) if m.group(1) == "w" else WordLengthPolicy(segment_size=v)


@dataclass(frozen=True, eq=False)
class SymbolWord:
    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        s = np.array(self.symbols, dtype=np.int64).reshape(-1)
        a = _check_alphabet(self.alphabet_size)
        if s.size < 1:
            raise InvalidWordLength("a word needs at least one symbol")
        if s.min() < 0 or s.max() >= a:
            raise WordMismatch(f"symbol index outside alphabet of size {a}")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)
        object.__setattr__(self, "alphabet_size", a)

    @property
    def word_length(self) -> int:
        return int(self.symbols.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolWord):
            return NotImplemented
        return self.alphabet_size == other.alphabet_size and bool(np.array_equal(self.symbols, other.symbols))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SymbolizerModel:
    breakpoints: Breakpoints
    centroids: Centroids
    lookup: DistanceTable
    method: str = "edwsax"
    kernel: str = ""
    bandwidth: float = 0.0
    bandwidth_rule: str = ""
    sample_count: int = 0
    sample_min: Optional[float] = None
    sample_max: Optional[float] = None
    support_lo: Optional[float] = None
    support_hi: Optional[float] = None
    estimate_on: str = "raw"
    word_policy: str = ""
    density: Optional[DensityModel] = field(default=None, repr=False)

    def __post_init__(self):
        a = self.breakpoints.alphabet_size
        if self.centroids.gammas.size != a:
            raise InvalidAlphabet(f"{self.centroids.gammas.size} centroids for alphabet size {a}")
        if self.lookup.alphabet_size != a:
            raise InvalidAlphabet(f"lookup table of size {self.lookup.alphabet_size} for alphabet size {a}")

    @property
    def alphabet_size(self) -> int:
        return self.breakpoints.alphabet_size

    def symbolize(self, segments) -> SymbolWord:
        return symbolize(self, segments)

    def to_dict(self) -> dict:
        return {
            "magic": FORMAT_MAGIC,
            "format_version": FORMAT_VERSION,
            "method": self.method,
            "alphabet_size": self.alphabet_size,
            "breakpoints": [float(v) for v in self.breakpoints.interior],
            "centroids": [float(v) for v in self.centroids.gammas],
            "lookup": [[float(v) for v in row] for row in self.lookup.cells],
            "kernel": self.kernel,
            "bandwidth": float(self.bandwidth),
            "bandwidth_rule": self.bandwidth_rule,
            "sample_count": int(self.sample_count),
            "sample_min": self.sample_min,
            "sample_max": self.sample_max,
            "support_lo": self.support_lo,
            "support_hi": self.support_hi,
            "estimate_on": self.estimate_on,
            "word_policy": self.word_policy,
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolizerModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


def gaussian_breakpoints(a: int) -> Breakpoints:
    a = _check_alphabet(a)
    return Breakpoints(norm.ppf(np.arange(1, a) / a))


def _gaussian_centroids(a: int) -> Centroids:
    return Centroids(norm.ppf((np.arange(1, a + 1) - 0.5) / a))


def gaussian_model(a: int, word_policy: str = "") -> SymbolizerModel:
    bp = gaussian_breakpoints(a)
    return SymbolizerModel(
        breakpoints=bp,
        centroids=_gaussian_centroids(bp.alphabet_size),
        lookup=build_lookup(bp.interior),
        method="sax",
        word_policy=word_policy,
    )


def _bisect(density: DensityModel, lo: np.ndarray, hi: np.ndarray, targets: np.ndarray) -> np.ndarray:
    # Vectorised bisection; each target keeps its own bracket and stops on its own.
    lo = lo.copy()
    hi = hi.copy()
    x = 0.5 * (lo + hi)
    done = np.zeros(targets.size, dtype=bool)
    for _ in range(MAX_BISECT):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        val = np.atleast_1d(kde_cdf(density, mid))
        x[idx] = mid
        close = np.abs(val - targets[idx]) <= CDF_TOL
        below = val < targets[idx]
        done[idx[close]] = True
        up = idx[~close & below]
        down = idx[~close & ~below]
        lo[up] = mid[~close & below]
        hi[down] = mid[~close & ~below]
        collapsed = idx[(hi[idx] - lo[idx]) <= 4.0 * np.spacing(np.abs(mid) + 1.0)]
        done[collapsed] = True
    return x


def _plateau_edge(density: DensityModel, lo: float, hi: float, inside) -> float:
    # Smallest point where `inside` holds, for a predicate monotone on [lo, hi].
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if inside(float(kde_cdf(density, mid))):
            hi = mid
        else:
            lo = mid
    return hi


def _invert_cdf(density: DensityModel, targets: Sequence[float]) -> np.ndarray:
    t = np.asarray(targets, dtype=np.float64)
    s_lo, s_hi = density.support
    x = _bisect(density, np.full(t.size, s_lo), np.full(t.size, s_hi), t)
    flat = np.flatnonzero(np.atleast_1d(kde_pdf(density, x)) <= PLATEAU_PDF_EPS)
    for i in flat:
        target = float(t[i])
        left = _plateau_edge(density, s_lo, float(x[i]), lambda p: p >= target - CDF_TOL)
        right = _plateau_edge(density, float(x[i]), s_hi, lambda p: p > target + CDF_TOL)
        x[i] = 0.5 * (left + right)
        msg = f"[density] cdf is flat at quantile {target:.6g}; using midpoint {x[i]:.6g} of [{left:.6g}, {right:.6g}]"
        warnings.warn(msg, DegenerateDensityWarning)
        log_warning(msg)
    for i in range(1, x.size):
        if x[i] <= x[i - 1]:
            x[i] = np.nextafter(x[i - 1], np.inf)
    return x


def compute_breakpoints(density: DensityModel, a: int) -> Breakpoints:
    a = _check_alphabet(a)
    return Breakpoints(_invert_cdf(density, np.arange(1, a) / a))


def compute_centroids(density: DensityModel, breakpoints: Breakpoints) -> Centroids:
    a = breakpoints.alphabet_size
    return Centroids(_invert_cdf(density, (np.arange(1, a + 1) - 0.5) / a))


def build_model(
    density: DensityModel,
    a: int,
    estimate_on: str = "raw",
    word_policy: str = "",
) -> SymbolizerModel:
    bp = compute_breakpoints(density, a)
    return SymbolizerModel(
        breakpoints=bp,
        centroids=compute_centroids(density, bp),
        lookup=build_lookup(bp.interior),
        method="edwsax",
        kernel=density.kernel.kind,
        bandwidth=density.bandwidth,
        bandwidth_rule=density.rule_name,
        sample_count=density.sample_count,
        sample_min=float(density.samples[0]),
        sample_max=float(density.samples[-1]),
        support_lo=float(density.support[0]),
        support_hi=float(density.support[1]),
        estimate_on=estimate_on,
        word_policy=word_policy,
        density=density,
    )


def pool_training_values(
    training_series: Iterable[SeriesLike],
    word_policy: Optional[WordLengthPolicy] = None,
    estimate_on: str = "raw",
    normalize: bool = True,
) -> np.ndarray:
    """Pool training points; `normalize=False` takes series as already normalized."""
    if estimate_on not in ESTIMATE_ON:
        raise InvalidParameter(f"estimate-on must be one of {ESTIMATE_ON}, got '{estimate_on}'")
    chunks: List[np.ndarray] = []
    for s in training_series:
        z = znormalize(s) if normalize else as_series(s)
        if estimate_on == "paa":
            policy = word_policy or WordLengthPolicy(segment_size=2)
            chunks.append(paa(z, policy.resolve(len(z))).segments)
        else:
            chunks.append(z.values)
    if not chunks:
        raise DegenerateSample("training collection is empty")
    return np.concatenate(chunks)


def fit_training_density(
    training_series: Iterable[SeriesLike],
    word_policy: Optional[WordLengthPolicy] = None,
    kernel="epanechnikov",
    rule="isj",
    estimate_on: str = "raw",
    normalize: bool = True,
) -> DensityModel:
    pooled = pool_training_values(training_series, word_policy, estimate_on, normalize)
    density = fit_density(pooled, kernel, rule)
    log_info(
        f"[train] samples={density.sample_count} kernel={density.kernel.kind} "
        f"rule={density.rule_name} h={density.bandwidth:.6g} estimate_on={estimate_on}"
    )
    return density


def train(
    training_series: Iterable[SeriesLike],
    a: int,
    word_policy: Optional[WordLengthPolicy] = None,
    kernel="epanechnikov",
    rule="isj",
    estimate_on: str = "raw",
    normalize: bool = True,
) -> SymbolizerModel:
    """Fit the KDE on pooled z-normalized points and derive breakpoints, centroids and lookup."""
    a = _check_alphabet(a)
    policy = word_policy or WordLengthPolicy(segment_size=2)
    density = fit_training_density(training_series, policy, kernel, rule, estimate_on, normalize)
    return build_model(density, a, estimate_on=estimate_on, word_policy=policy.name)


def symbolize(model: SymbolizerModel, segments) -> SymbolWord:
    seg = segments.segments if isinstance(segments, PaaSeries) else np.asarray(segments, dtype=np.float64)
    seg = np.asarray(seg, dtype=np.float64).reshape(-1)
    idx = np.searchsorted(model.breakpoints.interior, seg, side="right")
    return SymbolWord(idx, model.alphabet_size)


def reconstruct(model: SymbolizerModel, word: SymbolWord, n: int) -> TimeSeries:
    if word.alphabet_size != model.alphabet_size:
        raise WordMismatch(f"word alphabet {word.alphabet_size} does not match model alphabet {model.alphabet_size}")
    if n < word.word_length:
        raise InvalidLength(f"target length {n} is shorter than word length {word.word_length}")
    values = model.centroids.gammas[word.symbols]
    return TimeSeries(inverse_paa(values, n))


def encode(model: SymbolizerModel, series: SeriesLike, word_policy: WordLengthPolicy, normalize: bool = True) -> SymbolWord:
    s = znormalize(series) if normalize else as_series(series)
    return symbolize(model, paa(s, word_policy.resolve(len(s))))


def render_word(word: SymbolWord) -> str:
    if word.alphabet_size <= 26:
        return "".join(chr(ord("a") + int(s)) for s in word.symbols)
    return " ".join(str(int(s)) for s in word.symbols)


def parse_word(text: str, alphabet_size: int, line: int = 0, path: str = "") -> SymbolWord:
    a = _check_alphabet(alphabet_size)
    raw = text.strip()
    symbols: List[int] = []
    if a <= 26:
        for col, ch in enumerate(raw, start=1):
            idx = ord(ch) - ord("a")
            if not (0 <= idx < a):
                raise ParseError(f"symbol '{ch}' is not in the alphabet a..{chr(ord('a') + a - 1)}", path, line, col)
            symbols.append(idx)
    else:
        for col, tok in enumerate(t for t in re.split(r"[\s,]+", raw) if t):
            if not tok.isdigit() or int(tok) >= a:
                raise ParseError(f"symbol '{tok}' is not an index below {a}", path, line, col + 1)
            symbols.append(int(tok))
    if not symbols:
        raise ParseError("empty word", path, line, 1)
    return SymbolWord(np.array(symbols), a)


def serialize_model(model: SymbolizerModel) -> bytes:
    return (json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")


def _opt_float(v) -> Optional[float]:
    return None if v is None else float(v)


def deserialize_model(data: bytes) -> SymbolizerModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise CorruptModel(f"model stream is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("magic") != FORMAT_MAGIC:
        raise CorruptModel(f"missing '{FORMAT_MAGIC}' magic header")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"model format version {version} is not supported (expected {FORMAT_VERSION})")
    try:
        a = _check_alphabet(doc["alphabet_size"])
        bp = Breakpoints(doc["breakpoints"])
        cent = Centroids(doc["centroids"])
        stored = DistanceTable(doc["lookup"])
        if bp.alphabet_size != a or cent.gammas.size != a:
            raise CorruptModel("breakpoint/centroid counts do not match alphabet size")
        lookup = build_lookup(bp.interior)
        if not lookup.same_as(stored):
            raise CorruptModel("stored lookup table does not match its breakpoints")
        return SymbolizerModel(
            breakpoints=bp,
            centroids=cent,
            lookup=lookup,
            method=str(doc["method"]),
            kernel=str(doc["kernel"]),
            bandwidth=float(doc["bandwidth"]),
            bandwidth_rule=str(doc["bandwidth_rule"]),
            sample_count=int(doc["sample_count"]),
            sample_min=_opt_float(doc["sample_min"]),
            sample_max=_opt_float(doc["sample_max"]),
            support_lo=_opt_float(doc["support_lo"]),
            support_hi=_opt_float(doc["support_hi"]),
            estimate_on=str(doc["estimate_on"]),
            word_policy=str(doc["word_policy"]),
        )
    except CorruptModel:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model field: {exc}") from None


def save_model(path: str, model: SymbolizerModel) -> None:
    write_bytes(path, serialize_model(model))


def load_model(path: str) -> SymbolizerModel:
    with open(path, "rb") as f:
        return deserialize_model(f.read())
