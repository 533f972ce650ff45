import math

import pytest

from config import config
from core.chains import ThermalPoint, XXZModel, XYModel
from core.exceptions import ConfigError, DimensionError, QuadratureError, UnsupportedStrategyError
from core.provider import Strategy, correlator_provider, parse_strategy


class TestParseStrategy:
    def test_forms(self):
        assert parse_strategy("ed:8") == Strategy("ed", 8)
        assert parse_strategy("ED") == Strategy("ed")
        assert parse_strategy(" ff ") == Strategy("ff")
        assert parse_strategy("auto") == Strategy("auto")

    def test_passthrough(self):
        strategy = Strategy("ed", 6)
        assert parse_strategy(strategy) is strategy

    def test_string_form(self, monkeypatch):
        monkeypatch.setattr(config, "DEFAULT_CHAIN_LENGTH", 10)
        assert str(parse_strategy("ed")) == "ed:10"
        assert str(parse_strategy("ed:6")) == "ed:6"

    @pytest.mark.parametrize("text", ["qmc", "ed:abc", "ed:3", "ed:7"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_strategy(text)

    def test_chain_too_long(self):
        with pytest.raises(DimensionError):
            parse_strategy(f"ed:{config.MAX_QUBITS + 2}")


class TestCorrelatorProvider:
    def test_exact_diagonalization(self):
        c = correlator_provider(ThermalPoint(XXZModel(delta=3.0, h=12.0), 0.3), "ed:12")
        assert c.provenance.strategy == "ed"
        assert c.provenance.chain_length == 12
        assert c.is_physical()

    def test_free_fermions(self):
        c = correlator_provider(ThermalPoint(XYModel(lam=0.0, gamma=1.0), 0.5), "ff")
        assert c.provenance.strategy == "ff"
        assert c.z == pytest.approx(math.tanh(1.0), abs=1e-9)

    def test_free_fermions_reject_xxz(self):
        with pytest.raises(UnsupportedStrategyError):
            correlator_provider(ThermalPoint(XXZModel(delta=1.0, h=12.0), 0.1), "ff")

    def test_auto_order(self, monkeypatch):
        monkeypatch.setattr(config, "DEFAULT_CHAIN_LENGTH", 6)
        assert correlator_provider(ThermalPoint(XYModel(1.0, 0.5), 0.2)).provenance.strategy == "ff"
        xxz = correlator_provider(ThermalPoint(XXZModel(2.0, 12.0), 0.2))
        assert xxz.provenance.strategy == "ed"
        assert xxz.provenance.chain_length == 6

    def test_auto_falls_back_to_ed(self, monkeypatch):
        import core.provider as provider

        def failing(point):
            raise QuadratureError("synthetic non-convergence")

        monkeypatch.setattr(provider, "xy_correlators", failing)
        monkeypatch.setattr(config, "DEFAULT_CHAIN_LENGTH", 6)
        c = correlator_provider(ThermalPoint(XYModel(1.0, 0.5), 0.2), "auto")
        assert c.provenance.strategy == "ed"
        assert c.provenance.chain_length == 6

    def test_auto_reraises_last_failure(self, monkeypatch):
        import core.provider as provider

        def failing(point, L=None, site=0):
            raise DimensionError("synthetic")

        monkeypatch.setattr(provider, "ed_correlators", failing)
        with pytest.raises(DimensionError):
            correlator_provider(ThermalPoint(XXZModel(2.0, 12.0), 0.2), "auto")
