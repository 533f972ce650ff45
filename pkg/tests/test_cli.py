import math

import numpy as np
import pandas as pd
import pytest
import yaml

from config import config
from config.run_config import RunConfig
from core.chains import XYModel
from core.detector import scan
from main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION, main
from services.pipeline import CORRELATOR_COLUMNS, CROSSING_COLUMNS, EXTREMA_COLUMNS
from utils.helpers import load_json

XY_SCAN = ["--model", "xy", "--gamma", "0", "--lambda-range", "0.1:0.3", "--step", "0.1",
           "--kt", "0.5", "--provider", "ff"]


class TestScan:
    def test_writes_csv(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert main(["scan", *XY_SCAN, "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert list(frame.columns) == config.SCAN_COLUMNS
        assert len(frame) == 3

        expected = scan(XYModel(1.0, 0.0), "lambda", 0.1, 0.3, 0.1, 0.5, "ff")
        for column in ("param", "z", "xx", "yy", "zz", "Fmax", "Dmin"):
            reference = expected.grid if column == "param" else expected[column]
            assert np.max(np.abs(frame[column].to_numpy() - reference)) <= 1e-12

    def test_output_is_deterministic(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["scan", *XY_SCAN, "--out", str(first)]) == EXIT_OK
        assert main(["scan", *XY_SCAN, "--workers", "2", "--out", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_several_temperatures(self, tmp_path):
        out = tmp_path / "scan.csv"
        args = ["scan", "--model", "xy", "--gamma", "0.5", "--lambda-range", "0.5:1.0", "--step", "0.25",
                "--kt", "0.1,0.2", "--kt", "0.3", "--provider", "ff", "--out", str(out)]
        assert main(args) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert frame["kT"].tolist() == [0.1] * 3 + [0.2] * 3 + [0.3] * 3

    def test_empty_range(self, tmp_path):
        out = tmp_path / "scan.csv"
        args = ["scan", "--model", "xy", "--gamma", "0", "--lambda-range", "0.5:0.5", "--kt", "0.1",
                "--out", str(out)]
        assert main(args) == EXIT_USAGE
        assert not out.exists()

    def test_free_fermions_reject_xxz(self, tmp_path):
        args = ["scan", "--model", "xxz", "--h", "12", "--delta-range", "1:3", "--kt", "0.1",
                "--provider", "ff", "--out", str(tmp_path / "scan.csv")]
        assert main(args) == EXIT_USAGE

    def test_missing_temperature(self):
        assert main(["scan", "--model", "xy", "--gamma", "0", "--lambda-range", "0.1:0.3"]) == EXIT_USAGE

    def test_unknown_flag(self):
        assert main(["scan", "--temperature", "0.1"]) == EXIT_USAGE
        assert main([]) == EXIT_USAGE

    def test_missing_parameter(self):
        assert main(["scan", "--model", "xy", "--lambda-range", "0.1:0.3", "--kt", "0.1"]) == EXIT_USAGE

    def test_numerical_failure(self, tmp_path, monkeypatch):
        import services.pipeline as pipeline
        from core.exceptions import QuadratureError

        def broken(*args, **kwargs):
            raise QuadratureError("synthetic")

        monkeypatch.setattr(pipeline, "scan", broken)
        assert main(["scan", *XY_SCAN, "--out", str(tmp_path / "scan.csv")]) == EXIT_NUMERICAL


class TestDetect:
    def test_needs_three_temperatures(self, tmp_path):
        args = ["detect", "--model", "xy", "--gamma", "0", "--lambda-range", "0.5:1.5", "--kt", "0.1,0.2",
                "--provider", "ff", "--out", str(tmp_path / "detect.csv")]
        assert main(args) == EXIT_USAGE

    def test_window_outside_range(self, tmp_path):
        args = ["detect", "--model", "xy", "--gamma", "0", "--lambda-range", "0.5:1.5", "--kt", "0.1,0.2,0.3",
                "--window", "0.2:1.0", "--provider", "ff", "--out", str(tmp_path / "detect.csv")]
        assert main(args) == EXIT_USAGE

    def test_writes_extrema_and_summary(self, tmp_path):
        out = tmp_path / "detect.csv"
        args = ["detect", "--model", "xy", "--gamma", "0", "--lambda-range", "0.5:1.5", "--step", "0.05",
                "--kt", "0.2,0.3,0.4", "--provider", "ff", "--window", "0.7:1.3", "--out", str(out)]
        assert main(args) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert list(frame.columns) == EXTREMA_COLUMNS
        assert sorted(frame["kT"].tolist()) == [0.2, 0.3, 0.4]
        assert frame["location"].between(0.7 - 1e-9, 1.3 + 1e-9).all()

        summary = load_json(out.with_suffix(".json"))
        assert summary["config"]["model"]["name"] == "xy"
        assert len(summary["estimates"]) == 1
        estimate = summary["estimates"][0]
        assert estimate["observable"] == "Dmin"
        assert "extrapolated_location" in estimate

    def test_observable_extremum_at_isotropic_point(self, tmp_path):
        out = tmp_path / "detect.csv"
        args = ["detect", "--model", "xy", "--lambda", "1.5", "--gamma-range=-0.5:0.5", "--step", "0.05",
                "--kt", "0.05,0.1,0.2", "--provider", "ff", "--order", "0", "--window=-0.3:0.3",
                "--observable", "Dmin", "--observable", "Fmax", "--out", str(out)]
        assert main(args) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert (frame["order"] == 0).all()
        assert frame["location"].abs().max() <= 1e-6

        estimates = load_json(out.with_suffix(".json"))["estimates"]
        assert [(e["observable"], e["extremum"]) for e in estimates] == [("Dmin", "max"), ("Fmax", "min")]
        for estimate in estimates:
            assert estimate["extrapolated_location"] == pytest.approx(0.0, abs=1e-6)

    def test_explicit_extremum_sense(self, tmp_path):
        out = tmp_path / "detect.csv"
        args = ["detect", "--model", "xy", "--lambda", "1.5", "--gamma-range=-0.5:0.5", "--step", "0.05",
                "--kt", "0.05,0.1,0.2", "--provider", "ff", "--order", "0", "--extremum", "min",
                "--window=-0.3:0.3", "--out", str(out)]
        assert main(args) == EXIT_OK
        estimate = load_json(out.with_suffix(".json"))["estimates"][0]
        assert estimate["extremum"] == "min"
        # the distance is largest at the isotropic point, so its minimum sits on the window boundary
        assert all(abs(abs(location) - 0.3) <= 1e-6 for _, location in estimate["extrema"])


class TestOtherCommands:
    def test_crossings(self, tmp_path):
        out = tmp_path / "crossings.csv"
        args = ["crossings", "--model", "xy", "--gamma", "0.5", "--lambda-range", "0.5:1.5", "--step", "0.1",
                "--kt", "0.05", "--provider", "ff", "--out", str(out)]
        assert main(args) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert list(frame.columns) == CROSSING_COLUMNS
        for _, row in frame.iterrows():
            assert row["bracket_low"] <= row["param"] <= row["bracket_high"]

    def test_correlators_at_one_point(self, tmp_path):
        out = tmp_path / "correlators.csv"
        args = ["correlators", "--model", "xy", "--lambda", "0", "--gamma", "0.5", "--kt", "0.5",
                "--provider", "ff", "--out", str(out)]
        assert main(args) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert list(frame.columns) == CORRELATOR_COLUMNS
        assert len(frame) == 1
        assert frame.loc[0, "z"] == pytest.approx(math.tanh(1.0), abs=1e-9)
        assert frame.loc[0, "strategy"] == "ff"

    def test_verify_passes(self):
        assert main(["verify", "--level", "quick"]) == EXIT_OK

    def test_verify_detects_broken_closed_form(self, monkeypatch):
        import core.teleport as teleport
        monkeypatch.setattr(teleport, "_f", lambda zz, z: 1.0 + z + z * zz)
        assert main(["verify"]) == EXIT_VERIFICATION


class TestRunConfig:
    def test_yaml_round_trip(self, tmp_path):
        run = RunConfig.from_preset("xxz-h12")
        path = run.to_yaml(tmp_path / "run.yaml")
        assert RunConfig.from_yaml(path).to_dict() == run.to_dict()

    def test_preset_contents(self):
        run = RunConfig.from_preset("xy-gamma0").validate("detect")
        assert run.model == "xy" and run.axis == "lambda"
        assert run.windows[0].expected == 1.0
        assert len(run.kts) == 10

    def test_anisotropy_preset(self):
        run = RunConfig.from_preset("xy-lambda1.5").validate("detect")
        assert run.axis == "gamma" and run.params["lambda"] == 1.5
        assert run.observables == ["Dmin", "Fmax"]
        window = run.windows[0]
        assert (window.order, window.fit_kind, window.sense, window.expected) == (0, "linear", "auto", 0.0)

    @pytest.mark.parametrize("changes", [{"order": 3}, {"sense": "largest"}])
    def test_invalid_window(self, changes):
        from config.run_config import Window
        from core.exceptions import ConfigError
        run = RunConfig.from_preset("xy-gamma0")
        run.windows = [Window(0.7, 1.3, **changes)]
        with pytest.raises(ConfigError):
            run.validate("detect")

    def test_unknown_preset(self):
        from core.exceptions import ConfigError
        with pytest.raises(ConfigError):
            RunConfig.from_preset("ising")

    def test_config_file_with_overrides(self, tmp_path):
        config_path = tmp_path / "run.yaml"
        config_path.write_text(yaml.safe_dump({
            "model": {"name": "xy", "params": {"gamma": 1.0}},
            "scan": {"axis": "lambda", "range": [0.2, 0.4], "step": 0.1, "kts": [0.5], "provider": "ff"},
        }))
        out = tmp_path / "scan.csv"
        assert main(["scan", "--config", str(config_path), "--kt", "0.25", "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out, float_precision="round_trip")
        assert frame["kT"].unique().tolist() == [0.25]
        assert len(frame) == 3

    def test_invalid_yaml(self, tmp_path):
        config_path = tmp_path / "run.yaml"
        config_path.write_text("model: [unclosed")
        assert main(["scan", "--config", str(config_path)]) == EXIT_USAGE
