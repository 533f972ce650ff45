"""Reproducible run description for the command line, stored as YAML."""

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from config.presets import DETECTION_DEFAULTS, EXTREMUM_SENSES, MODEL_PRESETS, OBSERVABLES
from config.settings import config
from core.exceptions import ConfigError
from core.provider import parse_strategy

MODEL_AXES = {
    "xxz": ["delta", "h"],
    "xy": ["lambda", "gamma"],
}
FIT_KINDS = ("linear", "quadratic")
REFINE_MODES = ("exact", "interp")


@dataclass
class Window:
    start: float
    stop: float
    order: int = 1
    fit_kind: str = "linear"
    expected: Optional[float] = None
    sense: str = "auto"


@dataclass
class RunConfig:
    model: str = "xy"
    params: Dict[str, float] = field(default_factory=dict)
    axis: str = "lambda"
    start: Optional[float] = None
    stop: Optional[float] = None
    step: float = config.GRID_STEP
    kts: List[float] = field(default_factory=list)
    provider: str = "auto"
    workers: Optional[int] = None
    observables: List[str] = field(default_factory=lambda: list(DETECTION_DEFAULTS["observables"]))
    windows: List[Window] = field(default_factory=list)
    refine: str = "exact"
    out: Optional[str] = None
    preset: Optional[str] = None

    # === Construction ===

    @classmethod
    def from_preset(cls, name: str) -> "RunConfig":
        if name not in MODEL_PRESETS:
            raise ConfigError(f"Unknown preset '{name}' (available: {', '.join(sorted(MODEL_PRESETS))})")
        preset = MODEL_PRESETS[name]
        start, stop = preset["range"]
        windows = [
            Window(start=w_start, stop=w_stop, order=order,
                   fit_kind=preset["fit_kinds"].get(order, DETECTION_DEFAULTS["fit_kind"]),
                   expected=expected)
            for w_start, w_stop, order, expected in preset["windows"]
        ]
        return cls(
            model=preset["model"],
            params=dict(preset["params"]),
            axis=preset["axis"],
            start=start,
            stop=stop,
            kts=list(preset["kts"]),
            provider=preset["provider"],
            observables=list(preset.get("observables", DETECTION_DEFAULTS["observables"])),
            windows=windows,
            preset=name,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Build from the sectioned mapping written by to_dict."""
        if not isinstance(data, dict):
            raise ConfigError("Run config must be a mapping with model/scan/detect/output sections")
        preset = data.get("preset")
        run = cls.from_preset(preset) if preset else cls()

        model = data.get("model") or {}
        scan = data.get("scan") or {}
        detect = data.get("detect") or {}
        output = data.get("output") or {}

        if "name" in model:
            run.model = str(model["name"]).lower()
        if "params" in model:
            run.params.update({str(k): float(v) for k, v in (model["params"] or {}).items()})

        if "axis" in scan:
            run.axis = str(scan["axis"])
        if "range" in scan:
            bounds = scan["range"]
            if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
                raise ConfigError("scan.range must be a two-element list [start, stop]")
            run.start, run.stop = float(bounds[0]), float(bounds[1])
        if "step" in scan:
            run.step = float(scan["step"])
        if "kts" in scan:
            run.kts = [float(kT) for kT in scan["kts"]]
        if "provider" in scan:
            run.provider = str(scan["provider"])
        if "workers" in scan:
            run.workers = int(scan["workers"]) if scan["workers"] is not None else None

        if "observables" in detect:
            run.observables = [str(name) for name in detect["observables"]]
        if "windows" in detect:
            try:
                run.windows = [Window(**window) for window in detect["windows"]]
            except TypeError as e:
                raise ConfigError(f"Invalid detect.windows entry: {e}") from e
        if "refine" in detect:
            run.refine = str(detect["refine"])

        if "path" in output:
            run.out = output["path"]
        return run

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "RunConfig":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {path}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preset": self.preset,
            "model": {"name": self.model, "params": dict(self.params)},
            "scan": {
                "axis": self.axis,
                "range": [self.start, self.stop],
                "step": self.step,
                "kts": list(self.kts),
                "provider": self.provider,
                "workers": self.workers,
            },
            "detect": {
                "observables": list(self.observables),
                "windows": [asdict(window) for window in self.windows],
                "refine": self.refine,
            },
            "output": {"path": None if self.out is None else str(self.out)},
        }

    def to_yaml(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)
        return path

    @property
    def label(self) -> str:
        return self.preset or f"{self.model}-{self.axis}"

    # === Validation ===

    def validate(self, command: str = "scan") -> "RunConfig":
        """Check module preconditions; raises ConfigError with a hint on the first problem."""
        if self.model not in MODEL_AXES:
            raise ConfigError(f"Unknown model '{self.model}' (use --model xxz or --model xy)")
        axes = MODEL_AXES[self.model]
        if self.axis not in axes:
            raise ConfigError(f"Axis '{self.axis}' does not belong to {self.model} (choose {' or '.join(axes)})")
        for name, value in self.params.items():
            if not math.isfinite(value):
                raise ConfigError(f"Parameter {name}={value} must be finite")
        missing = [name for name in axes if name != self.axis and name not in self.params]
        if missing:
            raise ConfigError(f"Missing model parameter(s) {', '.join(missing)} (e.g. --{missing[0]} 1.0)")
        if self.model == "xy" and self.params.get("lambda", 0.0) < 0:
            raise ConfigError("XY coupling lambda must be non-negative")

        if not self.kts:
            raise ConfigError("No temperatures given (use --kt, repeatable)")
        if any(not math.isfinite(kT) or kT < 0 for kT in self.kts):
            raise ConfigError(f"Temperatures must be finite and non-negative, got {self.kts}")

        self._validate_provider()
        if command == "correlators" and self.start is None:
            if self.axis not in self.params:
                raise ConfigError(f"Give --{self.axis} or a --{self.axis}-range for the correlators command")
            return self

        if self.start is None or self.stop is None:
            raise ConfigError(f"No scan range given (use --{self.axis}-range start:stop)")
        if not self.stop > self.start:
            raise ConfigError(f"Empty scan range [{self.start}, {self.stop}]")
        if not self.step > 0:
            raise ConfigError(f"Step must be positive, got {self.step}")
        if self.model == "xy" and self.axis == "lambda" and self.start < 0:
            raise ConfigError("Lambda range must start at a non-negative value")

        if command == "detect":
            self._validate_detection()
        if command == "crossings" and self.refine not in REFINE_MODES:
            raise ConfigError(f"Unknown refine mode '{self.refine}' (expected exact or interp)")
        return self

    def _validate_provider(self):
        strategy = parse_strategy(self.provider)
        if strategy.kind == "ff" and self.model != "xy":
            raise ConfigError("The free-fermion provider (ff) only supports the xy model; use --provider ed:<L>")

    def _validate_detection(self):
        positive = sorted(set(kT for kT in self.kts if kT > 0))
        if len(positive) < DETECTION_DEFAULTS["min_temperatures"]:
            raise ConfigError(
                f"Detection needs at least {DETECTION_DEFAULTS['min_temperatures']} temperatures above zero, "
                f"got {len(positive)}"
            )
        unknown = [name for name in self.observables if name not in OBSERVABLES]
        if unknown or not self.observables:
            raise ConfigError(f"Unknown observable(s) {unknown} (choose from {', '.join(OBSERVABLES)})")
        if not self.windows:
            self.windows = [Window(self.start, self.stop, 1, DETECTION_DEFAULTS["fit_kind"])]
        for window in self.windows:
            if window.order not in (0, 1, 2):
                raise ConfigError(f"Derivative order must be 0, 1 or 2, got {window.order}")
            if window.sense not in EXTREMUM_SENSES:
                raise ConfigError(f"Unknown extremum '{window.sense}' (expected one of {', '.join(EXTREMUM_SENSES)})")
            if window.fit_kind not in FIT_KINDS:
                raise ConfigError(f"Unknown fit kind '{window.fit_kind}' (expected linear or quadratic)")
            if window.fit_kind == "quadratic" and len(positive) < 4:
                raise ConfigError("A quadratic fit needs at least 4 temperatures above zero")
            if not window.stop > window.start:
                raise ConfigError(f"Empty window [{window.start}, {window.stop}]")
            if window.start < self.start - 1e-12 or window.stop > self.stop + 1e-12:
                raise ConfigError(
                    f"Window [{window.start}, {window.stop}] lies outside the scan range [{self.start}, {self.stop}]"
                )
