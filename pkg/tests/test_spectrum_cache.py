import numpy as np
import pytest

from config import config
from core.chains import XYModel, thermal_spectrum
from database.spectrum_cache import SpectrumCache, cache_key


@pytest.fixture
def cache(tmp_path):
    return SpectrumCache(tmp_path / "spectra.db")


def sample_arrays():
    energies = np.array([-2.0, -1.0, 0.5, 3.0])
    observables = np.arange(16, dtype=float).reshape(4, 4) / 16.0
    return energies, observables


def test_key_rounds_parameters():
    assert cache_key("xy", {"lambda": 1.0, "gamma": 0.5}, 8, 0) == \
        cache_key("xy", {"gamma": 0.5, "lambda": 1.0 + 1e-14}, 8, 0)
    assert cache_key("xy", {"lambda": 1.0, "gamma": 0.5}, 8, 0) != \
        cache_key("xy", {"lambda": 1.0, "gamma": 0.5}, 10, 0)


def test_negative_zero_shares_key():
    assert cache_key("xy", {"gamma": -0.0}, 8, 0) == cache_key("xy", {"gamma": 0.0}, 8, 0)


def test_miss(cache):
    assert cache.load("xy", {"lambda": 1.0, "gamma": 0.0}, 8, 0) is None


def test_store_and_load(cache):
    energies, observables = sample_arrays()
    assert cache.store("xy", {"lambda": 1.0, "gamma": 0.0}, 8, 0, energies, observables)
    loaded = cache.load("xy", {"lambda": 1.0, "gamma": 0.0}, 8, 0)
    assert np.array_equal(loaded[0], energies)
    assert np.array_equal(loaded[1], observables)
    assert cache.count() == 1


def test_persists_across_instances(tmp_path):
    energies, observables = sample_arrays()
    SpectrumCache(tmp_path / "spectra.db").store("xxz", {"delta": 2.0, "h": 12.0}, 6, 0, energies, observables)
    fresh = SpectrumCache(tmp_path / "spectra.db")
    loaded = fresh.load("xxz", {"delta": 2.0, "h": 12.0}, 6, 0)
    assert np.array_equal(loaded[0], energies)


def test_memory_is_bounded_by_bytes(cache, monkeypatch):
    energies, observables = sample_arrays()
    entry_bytes = energies.nbytes + observables.nbytes
    monkeypatch.setattr(config, "MEMORY_CACHE_BYTES", entry_bytes + entry_bytes // 2)
    cache.store("xy", {"lambda": 1.0}, 6, 0, energies, observables)
    cache.store("xy", {"lambda": 2.0}, 6, 0, energies, observables)
    assert len(cache._memory) == 1
    assert cache.memory_bytes == entry_bytes
    assert cache.load("xy", {"lambda": 1.0}, 6, 0) is not None


def test_storing_a_key_twice_counts_it_once(cache):
    energies, observables = sample_arrays()
    cache.store("xy", {"lambda": 1.0}, 6, 0, energies, observables)
    cache.store("xy", {"lambda": 1.0}, 6, 0, energies, observables)
    assert cache.memory_bytes == energies.nbytes + observables.nbytes


def test_oversized_spectrum_skips_memory(cache, monkeypatch):
    monkeypatch.setattr(config, "MEMORY_CACHE_BYTES", 64)
    energies, observables = sample_arrays()
    assert cache.store("xy", {"lambda": 1.0}, 6, 0, energies, observables)
    assert cache.memory_bytes == 0
    assert cache.load("xy", {"lambda": 1.0}, 6, 0) is not None


def test_clear(cache):
    energies, observables = sample_arrays()
    cache.store("xy", {"lambda": 1.0}, 6, 0, energies, observables)
    cache.clear()
    assert cache.count() == 0
    assert cache.load("xy", {"lambda": 1.0}, 6, 0) is None


def test_unwritable_location_degrades_to_memory(tmp_path):
    blocker = tmp_path / "not_a_dir"
    blocker.write_text("")
    cache = SpectrumCache(blocker / "spectra.db")
    energies, observables = sample_arrays()
    assert cache.store("xy", {"lambda": 1.0}, 6, 0, energies, observables) is False
    assert cache.load("xy", {"lambda": 1.0}, 6, 0) is not None
    assert cache.load("xy", {"lambda": 3.0}, 6, 0) is None


def test_thermal_spectrum_uses_cache(cache, monkeypatch):
    import core.chains as chains
    monkeypatch.setattr(chains, "spectrum_cache", cache)
    model = XYModel(1.2, 0.5)
    first = thermal_spectrum(model, 6, use_cache=True)
    assert cache.count() == 1

    def fail(*args, **kwargs):
        raise AssertionError("spectrum should come from the cache")

    monkeypatch.setattr(chains, "_diagonalize", fail)
    second = thermal_spectrum(model, 6, use_cache=True)
    assert np.array_equal(first.energies, second.energies)
    assert np.array_equal(first.observables, second.observables)
