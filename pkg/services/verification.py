"""Oracle-equivalence and invariant suites behind the verify command."""

import time
from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from core.chains import ThermalPoint, XXZModel, XYModel, ed_correlators, xxz_qcp_delta1, xxz_qcp_delta2
from core.free_fermion import xy_correlators
from core.logger import logger
from core.qmat import BellLabel, bell_projector, bloch_trace_distance, random_density_matrix, trace_distance, uhlmann_fidelity
from core.teleport import (
    PairCorrelators,
    bob_output_closed_form,
    closed_form_d_min,
    correction_set,
    d_min,
    f_max,
    mean_fidelity,
    mean_trace_distance,
    rho1_from_z,
    rho23_from_correlators,
    sample_correlators,
    sign_analysis,
    teleport_engine,
)
from utils.logger import PerformanceLogger

LEVELS = ("quick", "full")
SEED = 20240601


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class VerificationReport:
    level: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


# === Checks: each returns (passed, detail) ===

def check_delta_equations() -> Tuple[bool, str]:
    delta1 = xxz_qcp_delta1(12.0)
    delta2 = xxz_qcp_delta2(12.0)
    passed = delta1 == 2.0 and abs(delta2 - 4.875) <= 1e-3
    return passed, f"delta1(12)={delta1:.6f}, delta2(12)={delta2:.6f}"


def check_engine_equivalence(samples: int) -> Tuple[bool, str]:
    """Brute-force protocol against closed-form fidelities, distances and Bob states."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for c in sample_correlators(rng, samples):
        rho1 = rho1_from_z(c.z)
        rho23 = rho23_from_correlators(c)
        for label in BellLabel:
            corrections = correction_set(label)
            fidelity = distance = 0.0
            for outcome in teleport_engine(rho1, rho23, corrections):
                if outcome.degenerate:
                    continue
                fidelity += outcome.probability * uhlmann_fidelity(rho1, outcome.bob_state)
                distance += outcome.probability * trace_distance(rho1, outcome.bob_state)
                expected = bob_output_closed_form(c, outcome.j, corrections)
                worst = max(worst, float(np.max(np.abs(outcome.bob_state.entries - expected.entries))))
            worst = max(
                worst,
                abs(fidelity - mean_fidelity(c, corrections)),
                abs(distance - mean_trace_distance(c, corrections)),
            )
        worst = max(worst, abs(d_min(c)[0] - closed_form_d_min(c.z, c.zz)))
    return worst <= 1e-10, f"max deviation {worst:.2e} over {samples} samples"


def check_uncorrelated_input(samples: int = 100) -> Tuple[bool, str]:
    """z = 0 gives perfect efficiencies whatever the two-point functions are."""
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    found = 0
    while found < samples:
        xx, yy, zz = rng.uniform(-1.0, 1.0, size=3)
        c = PairCorrelators(0.0, xx, yy, zz)
        if not c.is_physical(tol=0.0):
            continue
        found += 1
        worst = max(worst, abs(f_max(c)[0] - 1.0), abs(d_min(c)[0]))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_two_point_independence(samples: int = 200) -> Tuple[bool, str]:
    """Efficiencies depend on z and zz only."""
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for c in sample_correlators(rng, samples):
        shifted = PairCorrelators(c.z, c.xx * 0.5, c.yy * 0.5, c.zz)
        worst = max(worst, abs(f_max(c)[0] - f_max(shifted)[0]), abs(d_min(c)[0] - d_min(shifted)[0]))
    return worst <= 1e-12, f"max change {worst:.2e}"


def check_bloch_identity(samples: int = 1000) -> Tuple[bool, str]:
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(samples):
        r1 = random_density_matrix(1, rng)
        r2 = random_density_matrix(1, rng)
        worst = max(worst, abs(trace_distance(r1, r2) - bloch_trace_distance(r1, r2)))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_ideal_teleportation(samples: int = 100) -> Tuple[bool, str]:
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(samples):
        rho1 = random_density_matrix(1, rng)
        for label in BellLabel:
            for outcome in teleport_engine(rho1, bell_projector(label), correction_set(label)):
                worst = max(
                    worst,
                    abs(1.0 - uhlmann_fidelity(rho1, outcome.bob_state)),
                    trace_distance(rho1, outcome.bob_state),
                )
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_branch_forms(samples: int = 500) -> Tuple[bool, str]:
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for c in sample_correlators(rng, samples):
        worst = max(worst, abs(sign_analysis(c).value - closed_form_d_min(c.z, c.zz)))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_decoupled_spins() -> Tuple[bool, str]:
    """lambda = 0: free spins in a unit field, for both providers."""
    expected = np.tanh(1.0)
    point = ThermalPoint(XYModel(lam=0.0, gamma=0.5), 0.5)
    worst = 0.0
    for c in (xy_correlators(point), ed_correlators(point, 6)):
        worst = max(worst, abs(c.z - expected), abs(c.xx), abs(c.yy), abs(c.zz - expected ** 2))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


def check_saturated_chain() -> Tuple[bool, str]:
    c = ed_correlators(ThermalPoint(XXZModel(delta=1.0, h=12.0), 0.0), 8)
    worst = max(abs(c.z - 1.0), abs(c.zz - 1.0))
    return worst <= 1e-12, f"z={c.z:.12f}, zz={c.zz:.12f}"


def check_free_fermion_against_ed(length: int = 14) -> Tuple[bool, str]:
    worst = 0.0
    for lam in (0.5, 1.0, 1.5):
        point = ThermalPoint(XYModel(lam=lam, gamma=1.0), 1.0)
        exact = xy_correlators(point)
        finite = ed_correlators(point, length)
        for name in ("z", "xx", "yy", "zz"):
            worst = max(worst, abs(getattr(exact, name) - getattr(finite, name)))
    return worst <= 2e-3, f"max componentwise difference {worst:.2e} at L={length}"


def _suite(level: str) -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
    samples = 200 if level == "quick" else 1000
    checks = [
        ("delta equations", check_delta_equations),
        ("engine vs closed forms", lambda: check_engine_equivalence(samples)),
        ("z=0 efficiencies", check_uncorrelated_input),
        ("two-point independence", check_two_point_independence),
        ("Bloch trace distance", check_bloch_identity),
        ("ideal teleportation", check_ideal_teleportation),
        ("branch forms", check_branch_forms),
        ("decoupled spins", check_decoupled_spins),
    ]
    if level == "full":
        checks += [
            ("saturated XXZ chain", check_saturated_chain),
            ("free fermions vs ED", check_free_fermion_against_ed),
        ]
    return checks


def run_verification(level: str = "quick") -> VerificationReport:
    """Run every check of the level; failures and crashes are recorded, never raised."""
    if level not in LEVELS:
        level = "quick"
    report = VerificationReport(level=level)
    timer = PerformanceLogger(f"{level} verification")
    timer.start()

    for name, check in _suite(level):
        started = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as e:
            passed, detail = False, f"raised {type(e).__name__}: {e}"
        seconds = time.perf_counter() - started
        report.checks.append(CheckResult(name, bool(passed), detail, seconds))
        if passed:
            logger.info(f"PASS {name}: {detail} ({seconds:.2f}s)")
        else:
            logger.error(f"FAIL {name}: {detail} ({seconds:.2f}s)")

    timer.end()
    logger.info(f"Verification {level}: {len(report.checks) - len(report.failures)}/{len(report.checks)} passed")
    return report
