#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: bench.py

Main purpose:
- Load UCR-format datasets (one series per line: integer class label, then
  values) and check them against the built-in evaluation manifest.
- Run the two evaluation experiments:
  - tightness of lower bound (MINDIST / ED) versus alphabet size,
  - reconstruction RMSE of SAX versus edwSAX versus alphabet size.
- Wilcoxon signed-rank test for the paired SAX/edwSAX error comparison.
- Emit reports as CSV or as plot-data blocks.

Notes:
- Series are normalized per series by default; `normalize="dataset"` uses
  the pooled train mean/std instead.
- TLB pairs: every distinct test pair when there are at most `max_pairs`,
  else a seeded uniform sample of `max_pairs` pairs. The seed is mixed with
  the dataset name so results do not depend on dataset order or workers.
- A failing dataset is logged and reported as skipped; the run continues.
"""

import csv
import io
import math
import os
import re
import sys
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm, rankdata
from tqdm import tqdm

from distance import mindist_many
from edwsax_common import (
    DEFAULT_BANDWIDTH,
    DEFAULT_ESTIMATE_ON,
    DEFAULT_KERNEL,
    DEFAULT_MAX_PAIRS,
    DEFAULT_NORMALIZE,
    DEFAULT_SEED,
    DEFAULT_SEGMENT_SIZE,
    EdwsaxError,
    EmptyFile,
    InvalidAlphabet,
    InvalidParameter,
    LengthMismatch,
    ManifestMismatchWarning,
    ParseError,
    TooFewPairs,
    log_info,
    log_warning,
)
from symbolizer import (
    MAX_ALPHABET,
    MIN_ALPHABET,
    SymbolizerModel,
    WordLengthPolicy,
    build_model,
    fit_training_density,
    gaussian_model,
    reconstruct,
    symbolize,
)
from timeseries import CONSTANT_STD_EPS, SeriesLike, TimeSeries, as_series, paa, znormalize

REPORT_HEADER = ["dataset", "method", "alphabet_size", "metric", "mean", "std", "n_pairs", "skipped"]
METHODS = ("sax", "edwsax")
EXACT_WILCOXON_MAX_N = 25
MIN_WILCOXON_N = 6

Labeled = Tuple[int, TimeSeries]


@dataclass(frozen=True)
class DatasetMeta:
    n_train: int
    n_test: int
    length: int
    n_classes: int


# Train size, test size, series length, number of classes.
EVALUATION_MANIFEST: Dict[str, DatasetMeta] = {
    "Adiac": DatasetMeta(390, 391, 176, 37),
    "Beef": DatasetMeta(30, 30, 470, 5),
    "BeetleFly": DatasetMeta(20, 20, 512, 2),
    "CBF": DatasetMeta(30, 900, 128, 3),
    "Coffee": DatasetMeta(28, 28, 286, 2),
    "FaceAll": DatasetMeta(560, 1690, 131, 14),
    "FaceFour": DatasetMeta(24, 88, 350, 4),
    "Fish": DatasetMeta(175, 175, 463, 7),
    "GunPoint": DatasetMeta(50, 150, 150, 2),
    "Lightning2": DatasetMeta(60, 61, 637, 2),
    "Lightning7": DatasetMeta(70, 73, 319, 7),
    "OSULeaf": DatasetMeta(200, 242, 427, 6),
    "OliveOil": DatasetMeta(30, 30, 570, 4),
    "SwedishLeaf": DatasetMeta(500, 625, 128, 15),
    "SyntheticControl": DatasetMeta(300, 300, 60, 6),
    "Trace": DatasetMeta(100, 100, 275, 4),
    "TwoPatterns": DatasetMeta(1000, 4000, 128, 4),
    "Wafer": DatasetMeta(1000, 6164, 152, 2),
    "Worms": DatasetMeta(181, 77, 900, 5),
    "Yoga": DatasetMeta(300, 3000, 326, 2),
}


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    train: Tuple[Labeled, ...]
    test: Tuple[Labeled, ...] = ()
    meta: Optional[DatasetMeta] = None

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "test", tuple(self.test))
        if not self.train:
            raise EmptyFile(f"dataset '{self.name}' has an empty train split")

    @property
    def train_series(self) -> List[TimeSeries]:
        return [s for _, s in self.train]

    @property
    def test_series(self) -> List[TimeSeries]:
        return [s for _, s in self.test]

    @property
    def average_length(self) -> float:
        lengths = [len(s) for _, s in self.train + self.test]
        return float(np.mean(lengths))


# ---------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------

def _split_fields(line: str, delimiter: str) -> List[str]:
    if delimiter == "tab":
        return line.split("\t")
    if delimiter == "comma":
        return line.split(",")
    if delimiter == "whitespace":
        return line.split()
    if "\t" in line:
        return line.split("\t")
    if "," in line:
        return line.split(",")
    return line.split()


def _parse_float(token: str, path: str, line: int, column: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"'{token}' is not a number", path, line, column) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value '{token}'", path, line, column)
    return v


def parse_ucr_text(text: str, path: str = "", delimiter: str = "auto") -> List[Labeled]:
    if delimiter not in ("auto", "tab", "comma", "whitespace"):
        raise InvalidParameter(f"unknown delimiter '{delimiter}'")
    records: List[Labeled] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in _split_fields(line, delimiter)]
        label_val = _parse_float(fields[0], path, lineno, 1)
        if label_val != int(label_val):
            raise ParseError(f"class label '{fields[0]}' is not an integer", path, lineno, 1)
        if len(fields) < 2:
            raise ParseError("line has a label but no values", path, lineno, 2)
        values = [_parse_float(tok, path, lineno, col) for col, tok in enumerate(fields[1:], start=2)]
        records.append((int(label_val), TimeSeries(values)))
    if not records:
        raise EmptyFile(f"{path or '<input>'}: no series found")
    return records


def read_ucr_split(path: str, delimiter: str = "auto") -> List[Labeled]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_ucr_text(f.read(), path=path, delimiter=delimiter)


_SPLIT_SUFFIXES = ("", ".tsv", ".txt", ".csv")


def _find_split(directory: str, name: str, split: str) -> Optional[str]:
    for suffix in _SPLIT_SUFFIXES:
        candidate = os.path.join(directory, f"{name}_{split}{suffix}")
        if os.path.isfile(candidate):
            return candidate
    return None


def load_ucr(path: str, delimiter: str = "auto") -> Dataset:
    """
    Load a dataset from a directory `<Name>/` holding `<Name>_TRAIN[.tsv]` and
    `<Name>_TEST[.tsv]`, or from a single split file (its sibling TEST split is
    picked up when present).
    """
    if os.path.isdir(path):
        name = os.path.basename(os.path.normpath(path))
        train_path = _find_split(path, name, "TRAIN")
        if not train_path:
            raise FileNotFoundError(f"no {name}_TRAIN file in {path}")
        test_path = _find_split(path, name, "TEST")
    else:
        if not os.path.isfile(path):
            raise FileNotFoundError(f"dataset file not found: {path}")
        base = os.path.basename(path)
        m = re.match(r"(.+)_(TRAIN|TEST)(\.\w+)?$", base)
        name = m.group(1) if m else os.path.splitext(base)[0]
        train_path = path
        test_path = None
        if m and m.group(2) == "TRAIN":
            test_path = _find_split(os.path.dirname(path) or ".", name, "TEST")
    train = read_ucr_split(train_path, delimiter)
    test = read_ucr_split(test_path, delimiter) if test_path else []
    ds = Dataset(name=name, train=tuple(train), test=tuple(test), meta=EVALUATION_MANIFEST.get(name))
    log_info(f"[loader] {name}: train={len(ds.train)} test={len(ds.test)} avg_len={ds.average_length:.1f}")
    return ds


def validate_against_manifest(dataset: Dataset) -> List[str]:
    meta = dataset.meta or EVALUATION_MANIFEST.get(dataset.name)
    if meta is None:
        return []
    problems = []
    if len(dataset.train) != meta.n_train:
        problems.append(f"train count {len(dataset.train)} != {meta.n_train}")
    if dataset.test and len(dataset.test) != meta.n_test:
        problems.append(f"test count {len(dataset.test)} != {meta.n_test}")
    if round(dataset.average_length) != meta.length:
        problems.append(f"average length {dataset.average_length:.1f} != {meta.length}")
    for p in problems:
        msg = f"[loader] {dataset.name}: {p}"
        warnings.warn(msg, ManifestMismatchWarning)
        log_warning(msg)
    return problems


def discover_datasets(root: str) -> List[str]:
    """Dataset directories under `root` (or `root` itself) that hold a TRAIN split."""
    if not os.path.isdir(root):
        raise FileNotFoundError(f"dataset directory not found: {root}")
    if _find_split(root, os.path.basename(os.path.normpath(root)), "TRAIN"):
        return [root]
    found = []
    for entry in sorted(os.listdir(root)):
        sub = os.path.join(root, entry)
        if os.path.isdir(sub) and _find_split(sub, entry, "TRAIN"):
            found.append(sub)
    return found


def parse_series_text(text: str, path: str = "") -> List[TimeSeries]:
    """Plain series input: one series per line, whitespace- or comma-separated reals."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = [t for t in re.split(r"[\s,]+", line) if t]
        out.append(TimeSeries([_parse_float(t, path, lineno, col) for col, t in enumerate(tokens, start=1)]))
    return out


def read_series_lines(path: str) -> List[TimeSeries]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_series_text(f.read(), path=path)


# ---------------------------------------------------------------------
# Metrics and statistics
# ---------------------------------------------------------------------

def rmse(a: SeriesLike, b: SeriesLike) -> float:
    x = as_series(a).values
    y = as_series(b).values
    if x.size != y.size:
        raise LengthMismatch(f"series lengths differ: {x.size} vs {y.size}")
    return math.sqrt(float(np.mean((x - y) ** 2)))


def _exact_upper_lower(doubled_ranks: np.ndarray, w2: int) -> Tuple[float, float]:
    # Counts of every attainable doubled W+ over all 2^n sign assignments.
    total = int(doubled_ranks.sum())
    # Exact integer counts while 2^n fits in int64.
    counts = np.zeros(total + 1, dtype=np.int64 if doubled_ranks.size <= 62 else np.float64)
    counts[0] = 1
    for v in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[v:] = counts[: total + 1 - v]
        counts = counts + shifted
    denom = 2.0 ** doubled_ranks.size
    return float(counts[: w2 + 1].sum()) / denom, float(counts[w2:].sum()) / denom


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float], method: str = "auto") -> float:
    """
    Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped. Ties get midranks. `method`:
      - "exact": enumerate the null distribution of W+ (midranks doubled to integers)
      - "approx": normal approximation with tie and 0.5 continuity correction
      - "auto": exact for n <= 25, approx above
    """
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise LengthMismatch(f"paired samples differ in length: {a.size} vs {b.size}")
    if method not in ("auto", "exact", "approx"):
        raise InvalidParameter(f"unknown Wilcoxon method '{method}'")
    d = a - b
    d = d[d != 0]
    n = int(d.size)
    if n < MIN_WILCOXON_N:
        raise TooFewPairs(f"{n} non-zero paired differences, need at least {MIN_WILCOXON_N}")
    r = rankdata(np.abs(d))
    w_plus = float(r[d > 0].sum())

    if method == "exact" or (method == "auto" and n <= EXACT_WILCOXON_MAX_N):
        doubled = np.rint(2.0 * r).astype(np.int64)
        lower, upper = _exact_upper_lower(doubled, int(round(2.0 * w_plus)))
        return min(1.0, 2.0 * min(lower, upper))

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(r, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    if var <= 0:
        return 1.0
    z = max(0.0, abs(w_plus - mean) - 0.5) / math.sqrt(var)
    return min(1.0, 2.0 * float(norm.sf(z)))


# ---------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    kernel: str = DEFAULT_KERNEL
    bandwidth: str = DEFAULT_BANDWIDTH
    segment_size: int = DEFAULT_SEGMENT_SIZE
    estimate_on: str = DEFAULT_ESTIMATE_ON
    normalize: str = DEFAULT_NORMALIZE
    seed: int = DEFAULT_SEED
    max_pairs: int = DEFAULT_MAX_PAIRS
    workers: int = 1
    methods: Optional[Tuple[str, ...]] = None
    progress: bool = False

    def __post_init__(self):
        if self.normalize not in ("series", "dataset"):
            raise InvalidParameter(f"normalize must be 'series' or 'dataset', got '{self.normalize}'")
        if self.methods is not None:
            bad = [m for m in self.methods if m not in METHODS]
            if bad or not self.methods:
                raise InvalidParameter(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        for flag, value, low in (
            ("--seed", self.seed, 0),
            ("--max-pairs", self.max_pairs, 1),
            ("--workers", self.workers, 1),
            ("--segment-size", self.segment_size, 1),
        ):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < low:
                raise InvalidParameter(f"{flag}: expected an integer >= {low}, got {value}")

    @property
    def word_policy(self) -> WordLengthPolicy:
        return WordLengthPolicy(segment_size=self.segment_size)

    def echo(self) -> dict:
        return {
            "kernel": self.kernel,
            "bandwidth": self.bandwidth,
            "segment_size": self.segment_size,
            "estimate_on": self.estimate_on,
            "normalize": self.normalize,
            "seed": self.seed,
            "max_pairs": self.max_pairs,
            "methods": list(self.methods) if self.methods else None,
        }


@dataclass(frozen=True)
class ReportRow:
    dataset: str
    method: str
    alphabet_size: int
    metric: str
    mean: float
    std: float
    n_pairs: int
    skipped: int


@dataclass
class ExperimentReport:
    experiment: str
    rows: List[ReportRow] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    skipped_datasets: List[dict] = field(default_factory=list)
    significance: List[dict] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.skipped_datasets)

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "rows": len(self.rows),
            "skipped_datasets": self.skipped_datasets,
            "significance": self.significance,
        }


def _check_alphabets(alphabet_sizes: Sequence[int]) -> List[int]:
    sizes = sorted(set(int(a) for a in alphabet_sizes))
    if not sizes:
        raise InvalidAlphabet("no alphabet sizes given")
    for a in sizes:
        if not (MIN_ALPHABET <= a <= MAX_ALPHABET):
            raise InvalidAlphabet(f"alphabet size must be in [{MIN_ALPHABET}, {MAX_ALPHABET}], got {a}")
    return sizes


def normalize_splits(dataset: Dataset, mode: str = "series") -> Tuple[List[TimeSeries], List[TimeSeries]]:
    train = dataset.train_series
    test = dataset.test_series
    if mode == "series":
        return [znormalize(s) for s in train], [znormalize(s) for s in test]
    if mode != "dataset":
        raise InvalidParameter(f"normalize must be 'series' or 'dataset', got '{mode}'")
    pooled = np.concatenate([s.values for s in train])
    mu = float(np.mean(pooled))
    sd = float(np.std(pooled))
    if sd < CONSTANT_STD_EPS:
        zeros = lambda s: TimeSeries(np.zeros(len(s)), constant=True)  # noqa: E731
        return [zeros(s) for s in train], [zeros(s) for s in test]
    scale = lambda s: TimeSeries((s.values - mu) / sd)  # noqa: E731
    return [scale(s) for s in train], [scale(s) for s in test]


def _dataset_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8"))]))


def sample_pairs(m: int, max_pairs: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """All i < j pairs of m items, or a uniform sample of `max_pairs` of them."""
    total = m * (m - 1) // 2
    if total == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if total <= max_pairs:
        i, j = np.triu_indices(m, k=1)
        return i.astype(np.int64), j.astype(np.int64)
    k = np.sort(rng.choice(total, size=max_pairs, replace=False))
    # Row i of the upper triangle starts at offsets[i].
    offsets = np.concatenate(([0], np.cumsum(np.arange(m - 1, 0, -1, dtype=np.int64))))
    i = np.searchsorted(offsets, k, side="right") - 1
    j = k - offsets[i] + i + 1
    return i.astype(np.int64), j.astype(np.int64)


def _stack_equal_length(series: Sequence[TimeSeries], name: str) -> np.ndarray:
    lengths = {len(s) for s in series}
    if len(lengths) > 1:
        raise LengthMismatch(f"dataset '{name}' mixes series lengths {sorted(lengths)}")
    return np.vstack([s.values for s in series])


class _ModelSource:
    """Lazily fitted density shared by every alphabet size of one dataset."""

    def __init__(self, train: Sequence[TimeSeries], cfg: ExperimentConfig):
        self._train = train
        self._cfg = cfg
        self._density = None

    def model(self, method: str, a: int) -> SymbolizerModel:
        if method == "sax":
            return gaussian_model(a, word_policy=self._cfg.word_policy.name)
        if self._density is None:
            self._density = fit_training_density(
                self._train,
                self._cfg.word_policy,
                self._cfg.kernel,
                self._cfg.bandwidth,
                self._cfg.estimate_on,
                normalize=False,
            )
        return build_model(self._density, a, estimate_on=self._cfg.estimate_on, word_policy=self._cfg.word_policy.name)


def _tlb_rows(dataset: Dataset, alphabets: List[int], cfg: ExperimentConfig) -> Tuple[List[ReportRow], List[dict]]:
    train, test = normalize_splits(dataset, cfg.normalize)
    methods = cfg.methods or ("edwsax",)
    rows: List[ReportRow] = []
    if len(test) < 2:
        for method in methods:
            for a in alphabets:
                rows.append(ReportRow(dataset.name, method, a, "tlb", 0.0, 0.0, 0, 0))
        log_warning(f"[bench] {dataset.name}: fewer than two test series, TLB rows are empty")
        return rows, []

    X = _stack_equal_length(test, dataset.name)
    n = X.shape[1]
    w = cfg.word_policy.resolve(n)
    P = np.vstack([paa(s, w).segments for s in test])
    qi, ci = sample_pairs(X.shape[0], cfg.max_pairs, _dataset_rng(cfg.seed, dataset.name))
    ed = np.sqrt(np.sum((X[qi] - X[ci]) ** 2, axis=1))
    valid = ed > 0.0
    n_valid = int(valid.sum())
    n_skipped = int(valid.size - n_valid)
    source = _ModelSource(train, cfg)

    for method in methods:
        for a in alphabets:
            if n_valid == 0:
                rows.append(ReportRow(dataset.name, method, a, "tlb", 0.0, 0.0, 0, n_skipped))
                continue
            model = source.model(method, a)
            S = np.searchsorted(model.breakpoints.interior, P, side="right")
            md = mindist_many(S[qi[valid]], S[ci[valid]], model.lookup, n)
            ratio = md / ed[valid]
            rows.append(
                ReportRow(dataset.name, method, a, "tlb", float(np.mean(ratio)), float(np.std(ratio)), n_valid, n_skipped)
            )
    return rows, []


def reconstruction_errors(series: Sequence[SeriesLike], model: Optional[SymbolizerModel], policy: WordLengthPolicy) -> np.ndarray:
    """
    Per-series RMSE between each (already normalized) series and its
    reconstruction from the model's word. Constant series reconstruct to zeros.
    """
    errs = np.zeros(len(series), dtype=np.float64)
    for k, raw in enumerate(series):
        s = as_series(raw)
        if s.constant:
            continue
        word = symbolize(model, paa(s, policy.resolve(len(s))))
        errs[k] = rmse(s, reconstruct(model, word, len(s)))
    return errs


def _reconstruction_rows(dataset: Dataset, alphabets: List[int], cfg: ExperimentConfig) -> Tuple[List[ReportRow], List[dict]]:
    train, test = normalize_splits(dataset, cfg.normalize)
    methods = cfg.methods or METHODS
    rows: List[ReportRow] = []
    significance: List[dict] = []
    needs_model = any(not s.constant for s in test)
    source = _ModelSource(train, cfg)
    policy = cfg.word_policy

    for a in alphabets:
        errors: Dict[str, np.ndarray] = {}
        for method in methods:
            model = source.model(method, a) if needs_model else None
            errs = reconstruction_errors(test, model, policy)
            errors[method] = errs
            mean = float(np.mean(errs)) if errs.size else 0.0
            std = float(np.std(errs)) if errs.size else 0.0
            rows.append(ReportRow(dataset.name, method, a, "rmse", mean, std, int(errs.size), 0))
        if "sax" in errors and "edwsax" in errors:
            entry = {
                "dataset": dataset.name,
                "alphabet_size": a,
                "n": int(errors["sax"].size),
                "mean_sax": float(np.mean(errors["sax"])) if errors["sax"].size else 0.0,
                "mean_edwsax": float(np.mean(errors["edwsax"])) if errors["edwsax"].size else 0.0,
            }
            try:
                entry["p_value"] = wilcoxon_signed_rank(errors["sax"], errors["edwsax"])
            except TooFewPairs as exc:
                entry["p_value"] = None
                entry["note"] = str(exc)
            significance.append(entry)
    return rows, significance


def _run(
    experiment: str,
    datasets: Sequence[Dataset],
    alphabet_sizes: Sequence[int],
    cfg: ExperimentConfig,
    job: Callable[[Dataset, List[int], ExperimentConfig], Tuple[List[ReportRow], List[dict]]],
) -> ExperimentReport:
    if not datasets:
        raise InvalidParameter("at least one dataset is required")
    alphabets = _check_alphabets(alphabet_sizes)
    report = ExperimentReport(experiment=experiment, config=dict(cfg.echo(), alphabet_sizes=alphabets))

    def one(ds: Dataset):
        try:
            return ds, job(ds, alphabets, cfg), None
        except EdwsaxError as exc:
            return ds, None, exc

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = pool.map(one, datasets)
            outcomes = list(tqdm(results, total=len(datasets), desc=experiment, disable=not cfg.progress, file=sys.stderr))
    else:
        outcomes = [one(ds) for ds in tqdm(datasets, desc=experiment, disable=not cfg.progress, file=sys.stderr)]

    for ds, result, exc in outcomes:
        if exc is not None:
            log_warning(f"[bench] {ds.name}: skipped ({type(exc).__name__}: {exc})")
            report.skipped_datasets.append({"dataset": ds.name, "error": f"{type(exc).__name__}: {exc}"})
            continue
        rows, significance = result
        report.rows.extend(rows)
        report.significance.extend(significance)
        log_info(f"[bench] {experiment} {ds.name}: {len(rows)} rows")
    return report


def run_tlb_experiment(datasets: Sequence[Dataset], alphabet_sizes: Sequence[int], cfg: Optional[ExperimentConfig] = None) -> ExperimentReport:
    return _run("tlb", datasets, alphabet_sizes, cfg or ExperimentConfig(), _tlb_rows)


def run_reconstruction_experiment(
    datasets: Sequence[Dataset],
    alphabet_sizes: Sequence[int],
    cfg: Optional[ExperimentConfig] = None,
) -> ExperimentReport:
    return _run("reconstruction", datasets, alphabet_sizes, cfg or ExperimentConfig(), _reconstruction_rows)


def tlb_gain_per_symbol(report: ExperimentReport, dataset: str, method: str = "edwsax") -> List[Tuple[int, int, float]]:
    """(a_from, a_to, mean TLB gained per extra symbol) between consecutive alphabet sizes."""
    rows = sorted(
        (r for r in report.rows if r.dataset == dataset and r.method == method and r.metric == "tlb" and r.n_pairs > 0),
        key=lambda r: r.alphabet_size,
    )
    return [
        (lo.alphabet_size, hi.alphabet_size, (hi.mean - lo.mean) / (hi.alphabet_size - lo.alphabet_size))
        for lo, hi in zip(rows, rows[1:])
    ]


# ---------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def emit_report(report: ExperimentReport, fmt: str = "csv") -> bytes:
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in report.rows:
            writer.writerow([r.dataset, r.method, r.alphabet_size, r.metric, _fmt(r.mean), _fmt(r.std), r.n_pairs, r.skipped])
        return buf.getvalue().encode("utf-8")
    if fmt != "plot":
        raise InvalidParameter(f"unknown report format '{fmt}'")

    order: List[str] = []
    for r in report.rows:
        if r.dataset not in order:
            order.append(r.dataset)
    blocks = []
    for name in order:
        lines = [f"# dataset {name}", "# method metric alphabet_size mean std n_pairs skipped"]
        for r in report.rows:
            if r.dataset == name:
                lines.append(f"{r.method} {r.metric} {r.alphabet_size} {_fmt(r.mean)} {_fmt(r.std)} {r.n_pairs} {r.skipped}")
        blocks.append("\n".join(lines) + "\n")
    # Two blank lines separate indexable blocks for gnuplot-style tools.
    return "\n\n".join(blocks).encode("utf-8")


def parse_report_csv(data: bytes) -> List[ReportRow]:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    rows = list(reader)
    if not rows or rows[0] != REPORT_HEADER:
        raise ParseError("missing report header", "", 1, 1)
    out = []
    for lineno, rec in enumerate(rows[1:], start=2):
        if len(rec) != len(REPORT_HEADER):
            raise ParseError(f"expected {len(REPORT_HEADER)} columns, got {len(rec)}", "", lineno, 1)
        out.append(
            ReportRow(
                dataset=rec[0],
                method=rec[1],
                alphabet_size=int(rec[2]),
                metric=rec[3],
                mean=float(rec[4]),
                std=float(rec[5]),
                n_pairs=int(rec[6]),
                skipped=int(rec[7]),
            )
        )
    return out
