#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: density.py

Main purpose:
- Unit-variance kernel family (uniform, triangular, epanechnikov, biweight,
  cosine, normal, laplace) with closed-form pdf and cdf.
- Kernel density estimator f(y) = 1/(N h) sum K((y - y_n) / h), evaluated
  on a closed support interval and renormalised to integrate to one there.
- Bandwidth selection: Silverman, Scott, Improved Sheather-Jones, fixed.
- Histogram bin-width rules kept for exploratory use.

Kernel supports are the radii under which each kernel integrates to one:
sqrt(3), sqrt(6), sqrt(5), sqrt(7), pi / sqrt(pi^2 - 8); normal and laplace
are unbounded.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.fft import dct
from scipy.optimize import brentq
from scipy.special import ndtr

from edwsax_common import (
    BandwidthFallbackWarning,
    DegenerateSample,
    ISJConvergenceFailure,
    InvalidParameter,
    log_warning,
)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT5 = math.sqrt(5.0)
SQRT6 = math.sqrt(6.0)
SQRT7 = math.sqrt(7.0)
COSINE_C = math.sqrt(math.pi ** 2 - 8.0)

UNBOUNDED_PAD = 8.0
ISJ_GRID_POINTS = 2 ** 14
ISJ_RTOL = 1e-7
ISJ_MAXITER = 50
# Evaluation chunk: y-points x samples per block.
_BLOCK_ELEMENTS = 2_000_000


def _inside(u: np.ndarray, radius: float) -> np.ndarray:
    return np.abs(u) <= radius


def _uniform_pdf(u):
    return np.where(_inside(u, SQRT3), 1.0 / (2.0 * SQRT3), 0.0)


def _uniform_cdf(u):
    t = np.clip(u / SQRT3, -1.0, 1.0)
    return 0.5 * (t + 1.0)


def _triangular_pdf(u):
    return np.where(_inside(u, SQRT6), (1.0 - np.abs(u) / SQRT6) / SQRT6, 0.0)


def _triangular_cdf(u):
    t = np.clip(u / SQRT6, -1.0, 1.0)
    return np.where(t <= 0.0, 0.5 * (1.0 + t) ** 2, 1.0 - 0.5 * (1.0 - t) ** 2)


def _epanechnikov_pdf(u):
    return np.where(_inside(u, SQRT5), 3.0 * (1.0 - u * u / 5.0) / (4.0 * SQRT5), 0.0)


def _epanechnikov_cdf(u):
    t = np.clip(u / SQRT5, -1.0, 1.0)
    return 0.5 + 0.75 * t - 0.25 * t ** 3


def _biweight_pdf(u):
    return np.where(_inside(u, SQRT7), 15.0 * (1.0 - u * u / 7.0) ** 2 / (16.0 * SQRT7), 0.0)


def _biweight_cdf(u):
    t = np.clip(u / SQRT7, -1.0, 1.0)
    return 0.5 + (15.0 / 16.0) * (t - 2.0 * t ** 3 / 3.0 + t ** 5 / 5.0)


def _cosine_pdf(u):
    return np.where(_inside(u, math.pi / COSINE_C), 0.25 * COSINE_C * np.cos(0.5 * COSINE_C * u), 0.0)


def _cosine_cdf(u):
    t = np.clip(u, -math.pi / COSINE_C, math.pi / COSINE_C)
    return 0.5 + 0.5 * np.sin(0.5 * COSINE_C * t)


def _normal_pdf(u):
    return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def _normal_cdf(u):
    return ndtr(u)


def _laplace_pdf(u):
    return np.exp(-SQRT2 * np.abs(u)) / SQRT2


def _laplace_cdf(u):
    tail = 0.5 * np.exp(-SQRT2 * np.abs(u))
    return np.where(u <= 0.0, tail, 1.0 - tail)


@dataclass(frozen=True)
class Kernel:
    kind: str
    support_radius: float
    pdf: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    cdf: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.support_radius)


KERNELS: Dict[str, Kernel] = {
    "uniform": Kernel("uniform", SQRT3, _uniform_pdf, _uniform_cdf),
    "triangular": Kernel("triangular", SQRT6, _triangular_pdf, _triangular_cdf),
    "epanechnikov": Kernel("epanechnikov", SQRT5, _epanechnikov_pdf, _epanechnikov_cdf),
    "biweight": Kernel("biweight", SQRT7, _biweight_pdf, _biweight_cdf),
    "cosine": Kernel("cosine", math.pi / COSINE_C, _cosine_pdf, _cosine_cdf),
    "normal": Kernel("normal", math.inf, _normal_pdf, _normal_cdf),
    "laplace": Kernel("laplace", math.inf, _laplace_pdf, _laplace_cdf),
}


def select_kernel(name) -> Kernel:
    if isinstance(name, Kernel):
        return name
    key = str(name).strip().lower()
    if key == "gaussian":
        key = "normal"
    if key not in KERNELS:
        raise InvalidParameter(f"unknown kernel '{name}', expected one of {sorted(KERNELS)}")
    return KERNELS[key]


def evaluate_kernel(kernel, u):
    k = select_kernel(kernel)
    out = k.pdf(np.asarray(u, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def kernel_roughness(kind: str) -> float:
    """Integral of K(u)^2 over the support."""
    k = select_kernel(kind)
    r = k.support_radius if k.bounded else 40.0
    val, _ = integrate.quad(lambda u: float(k.pdf(np.asarray(u))) ** 2, -r, r, limit=200)
    return val


@dataclass(frozen=True)
class BandwidthRule:
    kind: str
    h: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("silverman", "scott", "isj", "fixed"):
            raise InvalidParameter(f"unknown bandwidth rule '{self.kind}'")
        if self.kind == "fixed" and not (self.h is not None and math.isfinite(self.h) and self.h > 0):
            raise InvalidParameter(f"fixed bandwidth must be a positive number, got {self.h}")

    @property
    def name(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.h!r}"
        return self.kind


def parse_bandwidth_rule(text) -> BandwidthRule:
    if isinstance(text, BandwidthRule):
        return text
    raw = str(text).strip().lower()
    if raw.startswith("fixed:"):
        try:
            h = float(raw.split(":", 1)[1])
        except ValueError:
            raise InvalidParameter(f"cannot parse fixed bandwidth from '{text}'") from None
        return BandwidthRule("fixed", h)
    return BandwidthRule(raw)


def _check_samples(samples: Sequence[float]) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size < 2:
        raise DegenerateSample(f"bandwidth selection needs at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DegenerateSample("samples contain NaN or infinite values")
    if float(np.ptp(x)) == 0.0:
        raise DegenerateSample("all samples are identical")
    return x


def _bw_silverman(x: np.ndarray) -> float:
    std = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0 else std
    return 0.9 * spread * x.size ** (-0.2)


def _bw_scott(x: np.ndarray) -> float:
    return 1.06 * float(np.std(x, ddof=1)) * x.size ** (-0.2)


def _isj_fixed_point(t: float, n: int, k_sq: np.ndarray, a2: np.ndarray) -> float:
    # t - gamma(t) where gamma chains the 7-stage functional estimates.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ell = 7
        f = 2.0 * math.pi ** (2 * ell) * np.sum(k_sq ** ell * a2 * np.exp(-k_sq * math.pi ** 2 * t))
        for s in range(ell - 1, 1, -1):
            k0 = np.prod(np.arange(1, 2 * s, 2, dtype=np.float64)) / math.sqrt(2.0 * math.pi)
            const = (1.0 + 0.5 ** (s + 0.5)) / 3.0
            time = (2.0 * const * k0 / n / f) ** (2.0 / (3.0 + 2.0 * s))
            f = 2.0 * math.pi ** (2 * s) * np.sum(k_sq ** s * a2 * np.exp(-k_sq * math.pi ** 2 * time))
        out = t - (2.0 * n * math.sqrt(math.pi) * f) ** (-0.4)
    if not np.isfinite(out):
        raise ISJConvergenceFailure("ISJ functional estimate is not finite")
    return float(out)


def _bw_isj(x: np.ndarray) -> float:
    n = x.size
    span = float(np.ptp(x))
    lo = float(np.min(x)) - span / 10.0
    hi = float(np.max(x)) + span / 10.0
    counts, _ = np.histogram(x, bins=ISJ_GRID_POINTS, range=(lo, hi))
    a = dct(counts / n, type=2)
    k_sq = np.arange(1, ISJ_GRID_POINTS, dtype=np.float64) ** 2
    a2 = (a[1:] / 2.0) ** 2

    # Bracket search follows KDEpy: widen the right end until a sign change.
    n_clamped = max(min(1050, n), 50)
    right = 1e-11 + 0.01 * (n_clamped - 50) / 1000.0
    while right < 1.0:
        try:
            t = brentq(_isj_fixed_point, 0.0, right, args=(n, k_sq, a2), rtol=ISJ_RTOL, maxiter=ISJ_MAXITER)
        except (ValueError, RuntimeError, ISJConvergenceFailure):
            right *= 2.0
            continue
        if t > 0:
            return math.sqrt(t) * (hi - lo)
        right *= 2.0
    raise ISJConvergenceFailure("Improved Sheather-Jones fixed point not found")


def select_bandwidth(samples: Sequence[float], rule, kernel=None) -> float:
    r = parse_bandwidth_rule(rule)
    if r.kind == "fixed":
        _check_samples(samples)
        return float(r.h)
    x = _check_samples(samples)
    if r.kind == "silverman":
        return _bw_silverman(x)
    if r.kind == "scott":
        return _bw_scott(x)
    h = _bw_isj(x)
    k = select_kernel(kernel) if kernel is not None else KERNELS["normal"]
    if k.kind != "normal":
        # Equivalent-kernel rescaling from the Gaussian scale (all kernels have unit variance).
        h *= (kernel_roughness(k.kind) / kernel_roughness("normal")) ** 0.2
    return h


@dataclass(frozen=True, eq=False)
class DensityModel:
    kernel: Kernel
    bandwidth: float
    samples: np.ndarray
    rule_name: str = "fixed"
    support: Tuple[float, float] = field(init=False)
    _cdf_lo: float = field(init=False, repr=False)
    _mass: float = field(init=False, repr=False)

    def __post_init__(self):
        k = select_kernel(self.kernel)
        x = np.sort(np.asarray(self.samples, dtype=np.float64).reshape(-1))
        if x.size == 0:
            raise DegenerateSample("density model needs at least one sample")
        if x.size == 1:
            x = np.repeat(x, 2)
        if not np.all(np.isfinite(x)):
            raise DegenerateSample("samples contain NaN or infinite values")
        h = float(self.bandwidth)
        if not (math.isfinite(h) and h > 0):
            raise InvalidParameter(f"bandwidth must be positive, got {self.bandwidth}")
        x.setflags(write=False)
        pad = k.support_radius if k.bounded else UNBOUNDED_PAD
        lo = float(x[0]) - pad * h
        hi = float(x[-1]) + pad * h
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "bandwidth", h)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "support", (lo, hi))
        raw_lo = float(_mixture(self, np.array([lo]), k.cdf)[0])
        raw_hi = float(_mixture(self, np.array([hi]), k.cdf)[0])
        object.__setattr__(self, "_cdf_lo", raw_lo)
        object.__setattr__(self, "_mass", raw_hi - raw_lo)

    @property
    def sample_count(self) -> int:
        return int(self.samples.size)


def _mixture(model: DensityModel, y: np.ndarray, fn) -> np.ndarray:
    x = model.samples
    h = model.bandwidth
    out = np.empty(y.size, dtype=np.float64)
    step = max(1, _BLOCK_ELEMENTS // x.size)
    for start in range(0, y.size, step):
        block = y[start:start + step]
        u = (block[:, None] - x[None, :]) / h
        out[start:start + step] = fn(u).mean(axis=1)
    return out


def _scalar_or_array(values: np.ndarray, like):
    return float(values[0]) if np.ndim(like) == 0 else values.reshape(np.shape(like))


def kde_pdf(model: DensityModel, y):
    yy = np.asarray(y, dtype=np.float64).reshape(-1)
    lo, hi = model.support
    dens = _mixture(model, yy, model.kernel.pdf) / (model.bandwidth * model._mass)
    dens[(yy < lo) | (yy > hi)] = 0.0
    return _scalar_or_array(dens, y)


def kde_cdf(model: DensityModel, y):
    yy = np.asarray(y, dtype=np.float64).reshape(-1)
    lo, hi = model.support
    raw = _mixture(model, yy, model.kernel.cdf)
    prob = np.clip((raw - model._cdf_lo) / model._mass, 0.0, 1.0)
    prob[yy <= lo] = 0.0
    prob[yy >= hi] = 1.0
    return _scalar_or_array(prob, y)


def fit_density(samples: Sequence[float], kernel="epanechnikov", rule="isj") -> DensityModel:
    k = select_kernel(kernel)
    r = parse_bandwidth_rule(rule)
    try:
        h = select_bandwidth(samples, r, kernel=k)
        rule_name = r.name
    except ISJConvergenceFailure as exc:
        msg = f"[density] {exc}; falling back to Silverman's rule"
        warnings.warn(msg, BandwidthFallbackWarning)
        log_warning(msg)
        h = select_bandwidth(samples, "silverman")
        rule_name = "silverman"
    return DensityModel(k, h, np.asarray(samples, dtype=np.float64), rule_name)


def histogram_bin_width(samples: Sequence[float], rule: str, c: Optional[float] = None) -> float:
    """
    Histogram bin width.

    rule:
      - "sturges": range / (1 + log2 n)
      - "mise": c * n^(-1/3), c is the caller's statistic and must be positive
      - "normal_reference": 3.49 * sigma * n^(-1/3)
    """
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size < 2:
        raise DegenerateSample(f"bin width needs at least 2 samples, got {x.size}")
    data_range = float(np.ptp(x))
    if data_range <= 0:
        raise DegenerateSample("samples have zero range")
    key = str(rule).strip().lower()
    n = x.size
    if key == "sturges":
        return data_range / (1.0 + math.log2(n))
    if key == "mise":
        if c is None or not (c > 0):
            raise InvalidParameter(f"MISE rule needs a positive statistic, got {c}")
        return float(c) * n ** (-1.0 / 3.0)
    if key == "normal_reference":
        return 3.49 * float(np.std(x, ddof=1)) * n ** (-1.0 / 3.0)
    raise InvalidParameter(f"unknown bin width rule '{rule}'")
