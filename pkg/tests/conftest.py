import os

# Must be set before config is imported anywhere
os.environ["QCP_LOG_TO_FILE"] = "0"
os.environ["QCP_USE_CACHE"] = "0"

import numpy as np
import pytest

from config import config
from core.detector import ScanSeries, observable_row
from core.teleport import PairCorrelators


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    """Keep every run's output, cache and logs inside the test's tmp dir."""
    monkeypatch.setattr(config, "OUTPUT_DIR", tmp_path / "output")
    monkeypatch.setattr(config, "CACHE_DIR", tmp_path / "cache")
    monkeypatch.setattr(config, "LOGS_DIR", tmp_path / "logs")
    monkeypatch.setattr(config, "USE_SPECTRUM_CACHE", False)
    return tmp_path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _build_series(grid, correlators, kT=0.1, param_name="lambda"):
    """ScanSeries from explicit correlators, one per grid point."""
    rows = [observable_row(c) for c in correlators]
    values = {
        name: np.array([row[name] for row in rows], dtype=float)
        for name in rows[0] if name not in ("argmax_set", "argmin_set")
    }
    labels = {name: [row[name] for row in rows] for name in ("argmax_set", "argmin_set")}
    return ScanSeries(param_name=param_name, grid=np.asarray(grid, dtype=float), kT=kT,
                      values=values, labels=labels)


@pytest.fixture
def linear_zz_series():
    """z fixed at 0.3 while zz rises linearly from -0.3 to 0.1 over [0, 1]."""
    grid = np.round(np.arange(101) * 0.01, 12)
    correlators = [PairCorrelators(0.3, 0.0, 0.0, -0.3 + 0.4 * p) for p in grid]
    return _build_series(grid, correlators)


@pytest.fixture
def make_series():
    return _build_series
