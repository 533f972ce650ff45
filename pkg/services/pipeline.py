from datetime import datetime
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from config import config
from config.presets import PEAK_SENSES
from config.run_config import RunConfig, Window
from core.chains import ModelSpec, ThermalPoint, build_model
from core.detector import (
    CrossingPoint,
    ExtremumEstimate,
    QcpEstimate,
    ScanSeries,
    find_crossings,
    finite_difference,
    locate_extremum,
    make_grid,
    extrapolate_qcp,
    scan,
)
from core.exceptions import FitError, QcpError
from core.logger import logger
from core.provider import correlator_provider, parse_strategy
from core.teleport import PairCorrelators, SetFamily, closed_form_mean_fidelity, closed_form_mean_trace_distance
from utils.helpers import default_output_path, save_json, summary_path_for, write_csv
from utils.logger import PerformanceLogger

EXTREMA_COLUMNS = [
    "observable", "window_start", "window_stop", "order", "kT",
    "location", "uncertainty", "derivative", "at_edge", "at_window_boundary",
]
CROSSING_COLUMNS = [
    "kT", "kind", "param", "bracket_low", "bracket_high",
    "z", "xx", "yy", "zz", "Fbar_psi", "Fbar_phi", "Dbar_psi", "Dbar_phi",
]
CORRELATOR_COLUMNS = ["param", "kT", "z", "xx", "yy", "zz", "strategy", "chain_length"]


def _window_sense(observable: str, window: Window) -> str:
    if window.sense != "auto":
        return window.sense
    if window.order == 0:
        return PEAK_SENSES.get(observable, "abs")
    return "abs"


class DetectionPipeline:
    def __init__(self, run: RunConfig):
        """Prepare a validated run"""
        self.run = run
        params = dict(run.params)
        params.setdefault(run.axis, run.start if run.start is not None else 0.0)
        self.model: ModelSpec = build_model(run.model, params)
        self.strategy = parse_strategy(run.provider)
        self.series: List[ScanSeries] = []
        config.setup_directories()

    def _output_path(self, command: str) -> Path:
        if self.run.out:
            return Path(self.run.out)
        return default_output_path(command, self.run.label)

    # === Scans ===

    def scan_all(self) -> List[ScanSeries]:
        """One series per temperature, in the configured order"""
        if self.series:
            return self.series

        timer = PerformanceLogger(f"{self.run.label} scan over {len(self.run.kts)} temperature(s)")
        timer.start()
        for kT in self.run.kts:
            logger.info(f"Scanning {self.model.name} {self.run.axis} in [{self.run.start}, {self.run.stop}] "
                        f"at kT={kT} with {self.strategy}")
            self.series.append(scan(
                self.model, self.run.axis, self.run.start, self.run.stop, self.run.step, kT,
                self.strategy, self.run.workers,
            ))
        timer.end()
        return self.series

    def run_scan(self) -> Path:
        frame = pd.concat([series.to_frame() for series in self.scan_all()], ignore_index=True)
        path = write_csv(frame, self._output_path("scan"))
        logger.info(f"Scan written: {path} ({len(frame)} rows)")
        return path

    # === Detection ===

    def extrema(self, observable: str, window: Window) -> List[ExtremumEstimate]:
        """Derivative extremum inside the window at every temperature"""
        sense = _window_sense(observable, window)
        estimates = []
        for series in self.scan_all():
            try:
                derivative = finite_difference(series[observable], series.step, window.order)
                estimate = locate_extremum(
                    derivative, series.grid, (window.start, window.stop),
                    order=window.order, observable=observable, kT=series.kT, sense=sense,
                )
            except QcpError as e:
                logger.warning(f"No extremum of {observable} at kT={series.kT} in "
                               f"[{window.start}, {window.stop}]: {e}")
                continue
            if not estimate.reliable:
                logger.warning(f"Extremum of {observable} at kT={series.kT} sits on an edge "
                               f"({estimate.location:.4f}); treat it as unreliable")
            estimates.append(estimate)
        return estimates

    def run_detect(self) -> Tuple[Path, Dict]:
        rows = []
        estimates: List[Dict] = []
        for observable in self.run.observables:
            for window in self.run.windows:
                found = self.extrema(observable, window)
                for estimate in found:
                    rows.append({
                        "observable": observable,
                        "window_start": window.start,
                        "window_stop": window.stop,
                        "order": window.order,
                        "kT": estimate.kT,
                        "location": estimate.location,
                        "uncertainty": estimate.uncertainty,
                        "derivative": estimate.value,
                        "at_edge": estimate.at_edge,
                        "at_window_boundary": estimate.at_window_boundary,
                    })
                estimates.append(self._fit(observable, window, found))

        csv_path = write_csv(pd.DataFrame(rows, columns=EXTREMA_COLUMNS), self._output_path("detect"))
        summary = {
            "generated_at": datetime.now().isoformat(),
            "config": self.run.to_dict(),
            "estimates": estimates,
        }
        summary_path = save_json(summary, summary_path_for(csv_path))
        self._log_summary(estimates)
        logger.info(f"Detection written: {csv_path} and {summary_path}")
        return csv_path, summary

    def _fit(self, observable: str, window: Window, found: List[ExtremumEstimate]) -> Dict:
        entry = {
            "observable": observable,
            "window": [window.start, window.stop],
            "order": window.order,
            "extremum": _window_sense(observable, window),
            "fit_kind": window.fit_kind,
            "expected": window.expected,
            "extrema": [[e.kT, e.location] for e in found],
        }
        try:
            estimate: QcpEstimate = extrapolate_qcp(
                [(e.kT, e.location) for e in found], window.fit_kind, observable
            )
            entry.update({
                "extrapolated_location": estimate.extrapolated_location,
                "uncertainty": found[0].uncertainty,
                "residual": estimate.residual,
                "coefficients": list(estimate.coefficients),
            })
        except FitError as e:
            logger.error(f"Extrapolation of {observable} in [{window.start}, {window.stop}] failed: {e}")
            entry.update({"extrapolated_location": None, "error": str(e)})
        return entry

    def _log_summary(self, estimates: List[Dict]):
        logger.info("=" * 60)
        for entry in estimates:
            location = entry.get("extrapolated_location")
            text = "n/a" if location is None else f"{location:.4f} +/- {entry['uncertainty']:.2f}"
            expected = "" if entry["expected"] is None else f" (expected {entry['expected']})"
            logger.info(f"{entry['observable']} order {entry['order']} {entry['fit_kind']} "
                        f"in {entry['window']}: QCP at kT=0 -> {text}{expected}")
        logger.info("=" * 60)

    # === Crossings and raw correlators ===

    def _evaluator(self, kT: float):
        if self.run.refine != "exact":
            return None

        def evaluate(param: float) -> PairCorrelators:
            point = ThermalPoint(self.model.with_param(self.run.axis, param), kT)
            return correlator_provider(point, self.strategy)
        return evaluate

    def crossings(self) -> List[CrossingPoint]:
        points = []
        for series in self.scan_all():
            found = find_crossings(series, self._evaluator(series.kT))
            logger.info(f"kT={series.kT}: {len(found)} crossing(s)")
            points.extend(found)
        return points

    def run_crossings(self) -> Path:
        rows = []
        for point in self.crossings():
            c = point.correlators
            rows.append({
                "kT": point.kT,
                "kind": point.kind.value,
                "param": point.param_value,
                "bracket_low": point.bracket[0],
                "bracket_high": point.bracket[1],
                "z": c.z, "xx": c.xx, "yy": c.yy, "zz": c.zz,
                "Fbar_psi": closed_form_mean_fidelity(c.z, c.zz, SetFamily.PSI),
                "Fbar_phi": closed_form_mean_fidelity(c.z, c.zz, SetFamily.PHI),
                "Dbar_psi": closed_form_mean_trace_distance(c.z, c.zz, SetFamily.PSI),
                "Dbar_phi": closed_form_mean_trace_distance(c.z, c.zz, SetFamily.PHI),
            })
        path = write_csv(pd.DataFrame(rows, columns=CROSSING_COLUMNS), self._output_path("crossings"))
        logger.info(f"Crossings written: {path} ({len(rows)} rows)")
        return path

    def run_correlators(self) -> Path:
        """Correlators on the scan grid, or at the model parameters when no range is set"""
        if self.run.start is None:
            params = [self.model.params()[self.run.axis]]
        else:
            params = list(make_grid(self.run.start, self.run.stop, self.run.step))

        rows = []
        for kT in self.run.kts:
            for param in params:
                point = ThermalPoint(self.model.with_param(self.run.axis, param), kT)
                c = correlator_provider(point, self.strategy)
                provenance = c.provenance
                rows.append({
                    "param": param, "kT": kT,
                    "z": c.z, "xx": c.xx, "yy": c.yy, "zz": c.zz,
                    "strategy": provenance.strategy if provenance else "",
                    "chain_length": provenance.chain_length if provenance and provenance.chain_length else np.nan,
                })
        path = write_csv(pd.DataFrame(rows, columns=CORRELATOR_COLUMNS), self._output_path("correlators"))
        logger.info(f"Correlators written: {path} ({len(rows)} rows)")
        return path
