"""
Thermodynamic-limit correlators of the XY chain from its free-fermion solution.

With E(k) = sqrt((1 + lambda cos k)^2 + lambda^2 gamma^2 sin^2 k) and the
thermal factor t(k) = tanh(E / 2kT):

    z  = 1/pi int_0^pi (1 + lambda cos k) / E * t dk
    xx = 1/pi int_0^pi [cos k (1 + lambda cos k) + gamma lambda sin^2 k] / E * t dk
    yy = 1/pi int_0^pi [cos k (1 + lambda cos k) - gamma lambda sin^2 k] / E * t dk
    zz = z^2 - xx yy
"""

import math
from typing import Callable, List

from scipy.integrate import quad

from config import config
from core.chains import ThermalPoint, XYModel
from core.exceptions import QuadratureError, UnsupportedStrategyError
from core.teleport import PairCorrelators, Provenance


def dispersion(k: float, lam: float, gamma: float) -> float:
    return math.hypot(1.0 + lam * math.cos(k), lam * gamma * math.sin(k))


def _thermal_response(energy: float, kT: float) -> float:
    """tanh(E / 2kT) / E with its finite limits."""
    if energy == 0.0:
        # Every numerator vanishes with E at kT=0
        return 0.0 if kT == 0 else 1.0 / (2.0 * kT)
    if kT == 0:
        return 1.0 / energy
    return math.tanh(energy / (2.0 * kT)) / energy


def _breakpoints(lam: float) -> List[float]:
    """Momenta where 1 + lambda cos k changes sign."""
    if lam <= 1.0:
        return []
    return [math.acos(-1.0 / lam)]


def _integrate(integrand: Callable[[float], float], points: List[float]) -> float:
    result = quad(
        integrand, 0.0, math.pi,
        points=points or None,
        epsabs=config.QUADRATURE_TOL,
        epsrel=config.QUADRATURE_TOL,
        limit=config.QUADRATURE_LIMIT,
        full_output=1,
    )
    # quad appends a message only when it did not converge
    if len(result) > 3:
        raise QuadratureError(f"Momentum integral did not converge: {result[3]}")
    value, error = result[0], result[1]
    if error > 1e3 * config.QUADRATURE_TOL:
        raise QuadratureError(f"Momentum integral error estimate {error:.3e} too large")
    return value / math.pi


def xy_correlators(point: ThermalPoint) -> PairCorrelators:
    """Infinite-chain z, xx, yy, zz for the XY model at temperature kT."""
    model = point.model
    if not isinstance(model, XYModel):
        raise UnsupportedStrategyError(f"Free-fermion correlators need the XY model, got {model.name}")
    lam, gamma, kT = model.lam, model.gamma, point.kT
    points = _breakpoints(lam)

    def z_integrand(k: float) -> float:
        return (1.0 + lam * math.cos(k)) * _thermal_response(dispersion(k, lam, gamma), kT)

    def pair_integrand(sign: float) -> Callable[[float], float]:
        def integrand(k: float) -> float:
            cos_k, sin_k = math.cos(k), math.sin(k)
            numerator = cos_k * (1.0 + lam * cos_k) + sign * gamma * lam * sin_k * sin_k
            return numerator * _thermal_response(dispersion(k, lam, gamma), kT)
        return integrand

    z = _integrate(z_integrand, points)
    xx = _integrate(pair_integrand(1.0), points)
    yy = _integrate(pair_integrand(-1.0), points)
    zz = z * z - xx * yy

    def bounded(value: float) -> float:
        return min(max(value, -1.0), 1.0)

    return PairCorrelators(bounded(z), bounded(xx), bounded(yy), bounded(zz), provenance=Provenance("ff"))
