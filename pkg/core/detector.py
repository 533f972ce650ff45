"""
Finite-temperature critical-point detection from teleportation efficiencies.

A scan evaluates correlators and every efficiency measure along one model
parameter at fixed kT. Critical points show up as extrema of derivatives of
those curves; their locations at several temperatures are extrapolated to
kT = 0.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from config import config
from config.presets import OBSERVABLES
from core.chains import ModelSpec, ThermalPoint, XYModel
from core.exceptions import (
    ConfigError,
    EmptyWindowError,
    FitError,
    QcpError,
    SeriesTooShortError,
)
from core.logger import logger
from core.provider import Strategy, correlator_provider, parse_strategy
from core.teleport import (
    PairCorrelators,
    SetFamily,
    closed_form_mean_fidelity,
    closed_form_mean_trace_distance,
    d_min,
    f_max,
)

LABEL_COLUMNS = ("argmax_set", "argmin_set")
FIT_DEGREES = {"linear": 1, "quadratic": 2}


def observable_row(c: PairCorrelators) -> Dict[str, Union[float, str]]:
    """Correlators and all efficiency measures at one point."""
    fmax, fmax_set = f_max(c)
    dmin, dmin_set = d_min(c)
    return {
        "z": c.z, "xx": c.xx, "yy": c.yy, "zz": c.zz,
        "Fbar_psi": closed_form_mean_fidelity(c.z, c.zz, SetFamily.PSI),
        "Fbar_phi": closed_form_mean_fidelity(c.z, c.zz, SetFamily.PHI),
        "Fmax": fmax,
        "argmax_set": fmax_set.value,
        "Dbar_psi": closed_form_mean_trace_distance(c.z, c.zz, SetFamily.PSI),
        "Dbar_phi": closed_form_mean_trace_distance(c.z, c.zz, SetFamily.PHI),
        "Dmin": dmin,
        "argmin_set": dmin_set.value,
    }


def make_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Uniform ascending grid start, start + step, ..., up to stop."""
    if not step > 0:
        raise ConfigError(f"Grid step must be positive, got {step}")
    if not stop > start:
        raise ConfigError(f"Empty parameter range [{start}, {stop}]")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


@dataclass(frozen=True, eq=False)
class ScanSeries:
    param_name: str
    grid: np.ndarray
    kT: float
    values: Dict[str, np.ndarray]
    labels: Dict[str, List[str]] = field(default_factory=dict)
    gaps: List[int] = field(default_factory=list)
    model: Optional[ModelSpec] = None
    strategy: str = ""

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or len(grid) < 2:
            raise SeriesTooShortError("A scan needs at least two grid points")
        spacing = np.diff(grid)
        if spacing.min() <= 0 or spacing.max() - spacing.min() > 1e-12:
            raise ConfigError("Scan grid must be ascending with a uniform step")
        for name, sequence in list(self.values.items()) + list(self.labels.items()):
            if len(sequence) != len(grid):
                raise ConfigError(f"Observable {name} has {len(sequence)} values for {len(grid)} grid points")
        object.__setattr__(self, "grid", grid)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def __len__(self) -> int:
        return len(self.grid)

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self.values:
            raise ConfigError(f"Unknown observable '{name}' (expected one of {', '.join(OBSERVABLES)})")
        return self.values[name]

    def correlators_at(self, index: int) -> PairCorrelators:
        return PairCorrelators(*(float(self.values[name][index]) for name in ("z", "xx", "yy", "zz")))

    def to_frame(self) -> pd.DataFrame:
        """Rows in grid order with the scan columns."""
        data = {"param": self.grid, "kT": np.full(len(self.grid), float(self.kT))}
        for column in config.SCAN_COLUMNS[2:]:
            data[column] = (self.labels.get(column, [""] * len(self.grid)) if column in LABEL_COLUMNS
                            else self.values[column])
        return pd.DataFrame(data, columns=config.SCAN_COLUMNS)


def scan(model: ModelSpec, axis: str, start: float, stop: float, step: float, kT: float,
         strategy: Union[str, Strategy] = "auto", workers: Optional[int] = None) -> ScanSeries:
    """Evaluate correlators and efficiencies at every grid point; failed points become NaN gaps."""
    strategy = parse_strategy(strategy)
    grid = make_grid(start, stop, step)
    points = [ThermalPoint(model.with_param(axis, value), kT) for value in grid]

    def evaluate(point: ThermalPoint) -> Optional[Dict[str, Union[float, str]]]:
        try:
            return observable_row(correlator_provider(point, strategy))
        except QcpError as e:
            logger.warning(f"Scan point {point.model.params()} at kT={kT} failed: {e}")
            return None

    workers = workers or config.WORKERS
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(evaluate, points))
    else:
        rows = [evaluate(point) for point in points]

    numeric = list(OBSERVABLES)
    values = {name: np.full(len(grid), np.nan) for name in numeric}
    labels = {name: [""] * len(grid) for name in LABEL_COLUMNS}
    gaps = []
    for index, row in enumerate(rows):
        if row is None:
            gaps.append(index)
            continue
        for name in numeric:
            values[name][index] = row[name]
        for name in LABEL_COLUMNS:
            labels[name][index] = row[name]

    if gaps:
        logger.warning(f"Scan over {axis} at kT={kT} has {len(gaps)} gap(s)")
    logger.debug(f"Scanned {model.name} over {axis} in [{start}, {stop}] at kT={kT}: {len(grid)} points")
    return ScanSeries(
        param_name=axis, grid=grid, kT=kT, values=values, labels=labels,
        gaps=gaps, model=model, strategy=str(strategy),
    )


# === Derivatives and extrema ===

def finite_difference(series: Sequence[float], step: float, order: int = 1) -> np.ndarray:
    """Central differences inside, one-sided at both ends; order 2 differentiates the order-1 result.

    Order 0 returns a copy of the series, so an observable's own extremum goes
    through the same search as a derivative peak.
    """
    if order not in (0, 1, 2):
        raise ConfigError(f"Derivative order must be 0, 1 or 2, got {order}")
    values = np.asarray(series, dtype=float)
    if values.ndim != 1 or len(values) < order + 1:
        raise SeriesTooShortError(f"Need at least {order + 1} samples for order {order}, got {len(values)}")
    if order == 0:
        return values.copy()
    derivative = np.gradient(values, step)
    if order == 2:
        derivative = np.gradient(derivative, step)
    return derivative


@dataclass(frozen=True)
class ExtremumEstimate:
    location: float
    uncertainty: float
    derivative_order: int
    observable: str
    kT: float
    value: float = float("nan")
    at_edge: bool = False
    at_window_boundary: bool = False

    @property
    def reliable(self) -> bool:
        return not (self.at_edge or self.at_window_boundary)


def _parabolic_offset(score: np.ndarray, best: int, usable: np.ndarray) -> float:
    """Vertex of the parabola through the peak and its two neighbours, in grid steps."""
    if best == 0 or best == len(score) - 1 or not (usable[best - 1] and usable[best + 1]):
        return 0.0
    left, centre, right = score[best - 1], score[best], score[best + 1]
    curvature = left - 2.0 * centre + right
    if not curvature < 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / curvature, -0.5, 0.5))


def locate_extremum(deriv: Sequence[float], grid: Sequence[float], window: Optional[Tuple[float, float]] = None,
                    order: int = 1, observable: str = "", kT: float = float("nan"),
                    sense: str = "abs", refine: bool = True) -> ExtremumEstimate:
    """
    Extremum of a sampled curve inside the window.

    sense "abs" takes the largest |value|, "max" and "min" the signed extremes.
    Ties go to the lowest parameter. With refine, the grid optimum moves to the
    vertex of the parabola through it and its neighbours; the reported
    uncertainty stays one grid step (two for order 2).
    """
    if sense not in ("abs", "max", "min"):
        raise ConfigError(f"Unknown extremum sense '{sense}' (expected abs, max or min)")
    deriv = np.asarray(deriv, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if len(deriv) != len(grid) or len(grid) < 2:
        raise SeriesTooShortError("Derivative and grid must have equal length of at least 2")
    step = float(grid[1] - grid[0])
    low, high = window if window is not None else (grid[0], grid[-1])
    slack = 1e-9 * step

    usable = (grid >= low - slack) & (grid <= high + slack) & np.isfinite(deriv)
    candidates = np.flatnonzero(usable)
    if candidates.size == 0:
        raise EmptyWindowError(f"No finite samples of {observable or 'derivative'} in window [{low}, {high}]")

    score = np.abs(deriv) if sense == "abs" else (deriv if sense == "max" else -deriv)
    best = candidates[int(np.argmax(score[candidates]))]
    location = float(grid[best])
    if refine:
        location += step * _parabolic_offset(score, best, usable)

    last = len(grid) - 1
    reach = max(order, 1)
    return ExtremumEstimate(
        location=location,
        uncertainty=2.0 * step if order == 2 else step,
        derivative_order=order,
        observable=observable,
        kT=kT,
        value=float(deriv[best]),
        at_edge=bool(best < reach or best > last - reach),
        at_window_boundary=bool(best == candidates[0] or best == candidates[-1]),
    )


@dataclass(frozen=True)
class QcpEstimate:
    extrapolated_location: float
    fit_kind: str
    fit_points: List[Tuple[float, float]]
    residual: float
    coefficients: Tuple[float, ...] = ()
    observable: str = ""


def extrapolate_qcp(points: Sequence[Tuple[float, float]], fit_kind: str = "linear",
                    observable: str = "") -> QcpEstimate:
    """Unweighted least-squares polynomial in kT evaluated at kT = 0."""
    if fit_kind not in FIT_DEGREES:
        raise ConfigError(f"Unknown fit kind '{fit_kind}' (expected linear or quadratic)")
    degree = FIT_DEGREES[fit_kind]
    minimum = degree + 2
    points = list(points)

    usable = [(float(kT), float(location)) for kT, location in points if kT > 0 and np.isfinite(location)]
    if len(usable) < len(points):
        logger.debug(f"Fit for {observable or 'QCP'} skips {len(points) - len(usable)} point(s) at kT=0 or NaN")
    if len(usable) < minimum:
        raise FitError(f"{fit_kind} fit needs at least {minimum} points with kT > 0, got {len(usable)}")

    kts = np.array([kT for kT, _ in usable])
    locations = np.array([location for _, location in usable])
    design = np.vander(kts, degree + 1, increasing=True)
    coefficients, _, rank, _ = np.linalg.lstsq(design, locations, rcond=None)
    if rank < degree + 1:
        raise FitError(f"Rank-deficient {fit_kind} fit: temperatures {sorted(set(kts.tolist()))}")

    residual = float(np.linalg.norm(design @ coefficients - locations))
    return QcpEstimate(
        extrapolated_location=float(coefficients[0]),
        fit_kind=fit_kind,
        fit_points=usable,
        residual=residual,
        coefficients=tuple(float(c) for c in coefficients),
        observable=observable,
    )


# === Crossings ===

class CrossingKind(Enum):
    FIDELITY_SETS = "fidelity-set-crossing"
    DISTANCE_SETS = "distance-set-crossing"
    CUBIC_SIGN = "cubic-sign-change"


def _fidelity_gap(c: PairCorrelators) -> float:
    return (closed_form_mean_fidelity(c.z, c.zz, SetFamily.PSI)
            - closed_form_mean_fidelity(c.z, c.zz, SetFamily.PHI))


def _distance_gap(c: PairCorrelators) -> float:
    # D(S_Psi) - D(S_Phi) = |z| (z^2 + zz) / 2, located by the zero of z^2 + zz
    return c.z * c.z + c.zz


def _cubic(c: PairCorrelators) -> float:
    return c.z ** 3 - c.z * c.zz


_CROSSING_FUNCTIONS = {
    CrossingKind.FIDELITY_SETS: _fidelity_gap,
    CrossingKind.DISTANCE_SETS: _distance_gap,
    CrossingKind.CUBIC_SIGN: _cubic,
}


@dataclass(frozen=True)
class CrossingPoint:
    param_value: float
    kind: CrossingKind
    kT: float
    correlators: PairCorrelators
    bracket: Tuple[float, float] = (float("nan"), float("nan"))


def _interpolated(series: ScanSeries, index: int) -> Callable[[float], PairCorrelators]:
    low, high = series.grid[index], series.grid[index + 1]
    left, right = series.correlators_at(index), series.correlators_at(index + 1)

    def correlators(param: float) -> PairCorrelators:
        t = (param - low) / (high - low)
        return PairCorrelators(*((1.0 - t) * getattr(left, name) + t * getattr(right, name)
                                 for name in ("z", "xx", "yy", "zz")))
    return correlators


def find_crossings(series: ScanSeries, evaluator: Optional[Callable[[float], PairCorrelators]] = None,
                   kinds: Sequence[CrossingKind] = tuple(CrossingKind),
                   zero_tol: float = 1e-12) -> List[CrossingPoint]:
    """
    Bracket sign changes on the grid and refine each with brentq.

    The refinement uses the evaluator (parameter -> correlators) when given,
    otherwise correlators linearly interpolated between the bracketing points.
    """
    crossings = []
    grid = series.grid
    for kind in kinds:
        gap = _CROSSING_FUNCTIONS[kind]
        samples = np.array([
            gap(series.correlators_at(i)) if i not in series.gaps else np.nan
            for i in range(len(grid))
        ])
        samples[np.abs(samples) < zero_tol] = 0.0

        for i in range(len(grid) - 1):
            left, right = samples[i], samples[i + 1]
            if not (np.isfinite(left) and np.isfinite(right)):
                continue
            if right == 0.0:
                # Zero on an interior grid point counts only when the sign flips across it
                if i + 2 < len(grid) and left * samples[i + 2] < 0:
                    crossings.append(CrossingPoint(float(grid[i + 1]), kind, series.kT,
                                                   series.correlators_at(i + 1),
                                                   (float(grid[i]), float(grid[i + 2]))))
                continue
            if left * right > 0 or left == 0.0:
                continue

            bracket = (float(grid[i]), float(grid[i + 1]))
            source = _interpolated(series, i)
            if evaluator is not None:
                try:
                    if gap(evaluator(bracket[0])) * gap(evaluator(bracket[1])) < 0:
                        source = evaluator
                    else:
                        logger.warning(f"Evaluator does not bracket {kind.value} near {bracket[0]}; interpolating")
                except QcpError as e:
                    logger.warning(f"Evaluator failed near {bracket[0]}: {e}; interpolating")

            location = brentq(lambda p: gap(source(p)), bracket[0], bracket[1], xtol=1e-13)
            crossings.append(CrossingPoint(float(location), kind, series.kT, source(location), bracket))

    crossings.sort(key=lambda point: (point.param_value, point.kind.value))
    return crossings


# === Anisotropy transition ===

@dataclass(frozen=True)
class GammaTransition:
    kT: float
    dmin_argmax: float
    fmax_argmin: float
    dmin_curvature: float
    fmax_curvature: float


def gamma_transition_check(lambda_fixed: float, kts: Sequence[float],
                           gamma_range: Tuple[float, float] = (-1.0, 1.0), step: float = None,
                           strategy: Union[str, Strategy] = "auto",
                           workers: Optional[int] = None) -> List[GammaTransition]:
    """Per temperature, where the minimum trace distance peaks and the maximum fidelity dips over gamma."""
    if not lambda_fixed > 1.0:
        raise ConfigError(f"Anisotropy check needs lambda > 1, got {lambda_fixed}")
    step = config.GRID_STEP if step is None else step
    model = XYModel(lam=lambda_fixed, gamma=0.0)

    results = []
    for kT in kts:
        series = scan(model, "gamma", gamma_range[0], gamma_range[1], step, kT, strategy, workers)
        dmin, fmax = series["Dmin"], series["Fmax"]
        if np.all(np.isnan(dmin)):
            raise EmptyWindowError(f"No valid points in the gamma scan at kT={kT}")
        peak = int(np.nanargmax(dmin))
        dip = int(np.nanargmin(fmax))
        results.append(GammaTransition(
            kT=float(kT),
            dmin_argmax=float(series.grid[peak]),
            fmax_argmin=float(series.grid[dip]),
            dmin_curvature=float(finite_difference(dmin, series.step, 2)[peak]),
            fmax_curvature=float(finite_difference(fmax, series.step, 2)[dip]),
        ))
        logger.info(f"kT={kT}: Dmin peaks at gamma={series.grid[peak]:.2f}, Fmax dips at gamma={series.grid[dip]:.2f}")
    return results
