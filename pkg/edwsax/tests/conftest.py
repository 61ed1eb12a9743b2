import itertools
import os
import sys

import numpy as np
import pytest
from scipy.stats import rankdata

SCRIPT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if SCRIPT_DIR not in sys.path:
    sys.path.insert(0, SCRIPT_DIR)

from edwsax_common import set_active_logger  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


@pytest.fixture(autouse=True)
def _no_active_logger():
    set_active_logger(None)
    yield
    set_active_logger(None)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def six_symbol_breakpoints():
    return [-0.33, -0.01, 0.66, 0.97, 1.54]


def random_walks(rng, count, length):
    return np.cumsum(rng.standard_normal((count, length)), axis=1)


def bimodal_series(rng, count, length, sep=3.0):
    # Each point is drawn from one of two well-separated modes.
    sign = rng.choice([-1.0, 1.0], size=(count, length))
    return sign * sep + rng.standard_normal((count, length)) * 0.5


def paired_bimodal_series(rng, count, length, sep=3.0):
    # Both points of a length-2 PAA segment share a mode, so segment means stay bimodal.
    sign = rng.choice([-1.0, 1.0], size=(count, length // 2)).repeat(2, axis=1)
    return sign * sep + rng.standard_normal((count, length)) * 0.5


def enumerated_wilcoxon_p(x, y):
    """Two-sided signed-rank p-value by listing all 2^n sign patterns."""
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    d = d[d != 0]
    r = rankdata(np.abs(d))
    w = r[d > 0].sum()
    signs = np.array(list(itertools.product([0.0, 1.0], repeat=r.size)))
    totals = signs @ r
    lower = np.mean(totals <= w + 1e-9)
    upper = np.mean(totals >= w - 1e-9)
    return min(1.0, 2.0 * min(lower, upper))
