"""
Teleportation of one chain spin through a thermal nearest-neighbour pair.

Alice holds the input spin (factor 0) and one spin of the pair (factor 1);
Bob holds the other spin of the pair (factor 2). The input state and the
resource are both fixed by the chain's thermal correlators, so every
efficiency measure below is a function of PairCorrelators alone.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from config import config
from core.exceptions import DegenerateOutcomeError, InvalidStateError, UnphysicalCorrelatorsError
from core.qmat import (
    BellLabel,
    DensityMatrix,
    PauliLabel,
    bell_projector,
    partial_trace_array,
    pauli,
    tensor,
    trace_distance,
    uhlmann_fidelity,
)


class SetFamily(Enum):
    """Correction sets that give identical efficiencies for diagonal inputs."""

    PSI = "S_Psi"
    PHI = "S_Phi"


class RegionLabel(Enum):
    """Which simplified expression of the minimum mean trace distance applies."""

    ZERO = "zero"
    PHI_BELOW = "phi-below"
    PHI_ABOVE = "phi-above"
    PSI = "psi"


_I = pauli(PauliLabel.I)
_X = pauli(PauliLabel.X)
_Z = pauli(PauliLabel.Z)
_ZX = _Z @ _X

# Bob's unitary per Alice outcome, one table per assumed resource Bell state
_CORRECTION_TABLES = {
    BellLabel.PHI_PLUS: {
        BellLabel.PHI_PLUS: _I, BellLabel.PHI_MINUS: _Z,
        BellLabel.PSI_PLUS: _X, BellLabel.PSI_MINUS: _ZX,
    },
    BellLabel.PHI_MINUS: {
        BellLabel.PHI_PLUS: _Z, BellLabel.PHI_MINUS: _I,
        BellLabel.PSI_PLUS: _ZX, BellLabel.PSI_MINUS: _X,
    },
    BellLabel.PSI_PLUS: {
        BellLabel.PHI_PLUS: _X, BellLabel.PHI_MINUS: _ZX,
        BellLabel.PSI_PLUS: _I, BellLabel.PSI_MINUS: _Z,
    },
    BellLabel.PSI_MINUS: {
        BellLabel.PHI_PLUS: _ZX, BellLabel.PHI_MINUS: _X,
        BellLabel.PSI_PLUS: _Z, BellLabel.PSI_MINUS: _I,
    },
}


@dataclass(frozen=True, eq=False)
class CorrectionSet:
    label: BellLabel
    table: Mapping[BellLabel, np.ndarray]

    @property
    def family(self) -> SetFamily:
        return SetFamily.PSI if self.label.is_psi else SetFamily.PHI

    def unitary(self, outcome: BellLabel) -> np.ndarray:
        return self.table[outcome]


def correction_set(label: BellLabel) -> CorrectionSet:
    table = {outcome: matrix.copy() for outcome, matrix in _CORRECTION_TABLES[label].items()}
    for matrix in table.values():
        matrix.setflags(write=False)
    return CorrectionSet(label=label, table=table)


def all_correction_sets() -> List[CorrectionSet]:
    return [correction_set(label) for label in BellLabel]


@dataclass(frozen=True)
class Provenance:
    strategy: str
    chain_length: Optional[int] = None


@dataclass(frozen=True)
class PairCorrelators:
    """One- and two-point thermal correlators z, xx, yy, zz."""

    z: float
    xx: float
    yy: float
    zz: float
    provenance: Optional[Provenance] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("z", "xx", "yy", "zz"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or abs(value) > 1.0 + config.PSD_TOL:
                raise UnphysicalCorrelatorsError(f"{name}={value} outside [-1, 1]")
            # rounding slack within PSD_TOL snaps back onto the boundary
            object.__setattr__(self, name, min(max(value, -1.0), 1.0))

    def x_shape_entries(self) -> Tuple[float, float, float, float, float]:
        """Entries a, b, c, d, e of the X-shaped two-site matrix."""
        a = (1.0 + 2.0 * self.z + self.zz) / 4.0
        b = (1.0 - self.zz) / 4.0
        c = (self.xx + self.yy) / 4.0
        d = (1.0 - 2.0 * self.z + self.zz) / 4.0
        e = (self.xx - self.yy) / 4.0
        return a, b, c, d, e

    def is_physical(self, tol: float = None) -> bool:
        tol = config.PSD_TOL if tol is None else tol
        a, b, c, d, e = self.x_shape_entries()
        if min(a, b, d) < -tol:
            return False
        if abs(c) > b + tol:
            return False
        return abs(e) <= np.sqrt(max(a, 0.0) * max(d, 0.0)) + tol

    def with_provenance(self, provenance: Provenance) -> "PairCorrelators":
        return PairCorrelators(self.z, self.xx, self.yy, self.zz, provenance=provenance)


@dataclass(frozen=True, eq=False)
class TeleportOutcome:
    j: BellLabel
    probability: float
    bob_state: Optional[DensityMatrix]

    @property
    def degenerate(self) -> bool:
        return self.bob_state is None


# === Two-site and single-site states ===

def rho23_from_correlators(c: PairCorrelators) -> DensityMatrix:
    """X-shaped nearest-neighbour density matrix built from the correlators."""
    if not c.is_physical():
        raise UnphysicalCorrelatorsError(
            f"Correlators (z={c.z}, xx={c.xx}, yy={c.yy}, zz={c.zz}) give a non-PSD pair state"
        )
    a, b, cc, d, e = c.x_shape_entries()
    matrix = np.array([
        [a, 0, 0, e],
        [0, b, cc, 0],
        [0, cc, b, 0],
        [e, 0, 0, d],
    ], dtype=complex)
    try:
        return DensityMatrix(matrix)
    except InvalidStateError as exc:
        raise UnphysicalCorrelatorsError(str(exc)) from exc


def rho1_from_z(z: float) -> DensityMatrix:
    if abs(z) > 1.0:
        raise UnphysicalCorrelatorsError(f"|z|={abs(z)} exceeds 1")
    return DensityMatrix(np.diag([(1.0 + z) / 2.0, (1.0 - z) / 2.0]).astype(complex))


# === Brute-force protocol ===

def teleport_engine(rho1: DensityMatrix, rho23: DensityMatrix, corrections: CorrectionSet) -> List[TeleportOutcome]:
    """Run the protocol for each Bell outcome; zero-probability outcomes carry no state."""
    if rho1.dim != 2 or rho23.dim != 4:
        raise InvalidStateError(f"Expected 2x2 input and 4x4 resource, got {rho1.dim} and {rho23.dim}")
    rho = tensor(rho1, rho23).entries
    outcomes = []
    for j in BellLabel:
        projector = np.kron(bell_projector(j).entries, _I)
        probability = float(np.trace(projector @ rho).real)
        if probability < config.DEGENERATE_PROB:
            outcomes.append(TeleportOutcome(j=j, probability=max(probability, 0.0), bob_state=None))
            continue
        collapsed = partial_trace_array(projector @ rho @ projector, keep=[2], dims=[2, 2, 2])
        unitary = corrections.unitary(j)
        bob = unitary @ collapsed @ unitary.conj().T / probability
        bob = 0.5 * (bob + bob.conj().T)
        outcomes.append(TeleportOutcome(j=j, probability=probability, bob_state=DensityMatrix(bob)))
    return outcomes


def _engine_average(c: PairCorrelators, corrections: CorrectionSet, measure) -> float:
    rho1 = rho1_from_z(c.z)
    total = 0.0
    for outcome in teleport_engine(rho1, rho23_from_correlators(c), corrections):
        if not outcome.degenerate:
            total += outcome.probability * measure(rho1, outcome.bob_state)
    return total


# === Closed forms ===

def _f(zz: float, z: float) -> float:
    return 1.0 + z + z * z + z * zz


def _g(zz: float, z: float) -> float:
    return 1.0 - z - z * z + z * zz


def _sqrt(value: float) -> float:
    return float(np.sqrt(max(value, 0.0)))


def outcome_probabilities(z: float) -> Dict[SetFamily, float]:
    """Probability of each single Psi outcome and each single Phi outcome."""
    return {SetFamily.PSI: (1.0 - z * z) / 4.0, SetFamily.PHI: (1.0 + z * z) / 4.0}


def closed_form_mean_fidelity(z: float, zz: float, family: SetFamily) -> float:
    if family is SetFamily.PSI:
        first = _sqrt((1.0 + z) * _f(zz, -z)) + _sqrt((1.0 - z) * _f(zz, z))
        second = _sqrt((1.0 - z) * _g(zz, z)) + _sqrt((1.0 + z) * _g(zz, -z))
    else:
        first = _sqrt((1.0 - z) * _f(zz, -z)) + _sqrt((1.0 + z) * _f(zz, z))
        second = _sqrt((1.0 + z) * _g(zz, z)) + _sqrt((1.0 - z) * _g(zz, -z))
    return (first ** 2 + second ** 2) / 8.0


def closed_form_mean_trace_distance(z: float, zz: float, family: SetFamily) -> float:
    cubic = abs(z ** 3 - z * zz)
    if family is SetFamily.PSI:
        return ((2.0 + z * z + zz) * abs(z) + cubic) / 4.0
    return ((2.0 - z * z - zz) * abs(z) + cubic) / 4.0


def closed_form_d_min(z: float, zz: float) -> float:
    """Minimum mean trace distance as a single expression in z and zz."""
    return ((2.0 - abs(z * z + zz)) * abs(z) + abs(z ** 3 - z * zz)) / 4.0


def _family(corrections: Union[CorrectionSet, SetFamily, BellLabel]) -> SetFamily:
    if isinstance(corrections, SetFamily):
        return corrections
    if isinstance(corrections, BellLabel):
        return SetFamily.PSI if corrections.is_psi else SetFamily.PHI
    return corrections.family


def _as_set(corrections: Union[CorrectionSet, SetFamily, BellLabel]) -> CorrectionSet:
    if isinstance(corrections, CorrectionSet):
        return corrections
    if isinstance(corrections, BellLabel):
        return correction_set(corrections)
    return correction_set(BellLabel.PSI_PLUS if corrections is SetFamily.PSI else BellLabel.PHI_PLUS)


def mean_fidelity(c: PairCorrelators, corrections: Union[CorrectionSet, SetFamily, BellLabel],
                  method: str = "closed") -> float:
    """Probability-weighted Uhlmann fidelity between input and Bob's output."""
    if method == "engine":
        return _engine_average(c, _as_set(corrections), uhlmann_fidelity)
    return closed_form_mean_fidelity(c.z, c.zz, _family(corrections))


def mean_trace_distance(c: PairCorrelators, corrections: Union[CorrectionSet, SetFamily, BellLabel],
                        method: str = "closed") -> float:
    """Probability-weighted trace distance between input and Bob's output."""
    if method == "engine":
        return _engine_average(c, _as_set(corrections), trace_distance)
    return closed_form_mean_trace_distance(c.z, c.zz, _family(corrections))


def f_max(c: PairCorrelators) -> Tuple[float, SetFamily]:
    """Maximum mean fidelity over the correction sets; ties go to S_Phi."""
    psi = closed_form_mean_fidelity(c.z, c.zz, SetFamily.PSI)
    phi = closed_form_mean_fidelity(c.z, c.zz, SetFamily.PHI)
    if psi > phi:
        return psi, SetFamily.PSI
    return phi, SetFamily.PHI


def d_min(c: PairCorrelators) -> Tuple[float, SetFamily]:
    """Minimum mean trace distance over the correction sets; ties go to S_Phi."""
    psi = closed_form_mean_trace_distance(c.z, c.zz, SetFamily.PSI)
    phi = closed_form_mean_trace_distance(c.z, c.zz, SetFamily.PHI)
    if psi < phi:
        return psi, SetFamily.PSI
    return phi, SetFamily.PHI


def bob_output_closed_form(c: PairCorrelators, j: BellLabel, family: Union[SetFamily, CorrectionSet, BellLabel]) -> DensityMatrix:
    """Bob's diagonal output state for outcome j under a correction family."""
    z, zz = c.z, c.zz
    family = _family(family)
    if j.is_psi:
        if abs(z) >= 1.0:
            raise DegenerateOutcomeError(f"Outcome {j.value} has zero probability at |z|=1")
        norm = 2.0 * (1.0 - z * z)
        upper, lower = (_g(zz, -z), _g(zz, z)) if family is SetFamily.PSI else (_g(zz, z), _g(zz, -z))
    else:
        norm = 2.0 * (1.0 + z * z)
        upper, lower = (_f(zz, -z), _f(zz, z)) if family is SetFamily.PSI else (_f(zz, z), _f(zz, -z))
    return DensityMatrix(np.diag([upper / norm, lower / norm]).astype(complex))


# === Branch analysis ===

@dataclass(frozen=True)
class SignAnalysis:
    cubic_sign: int
    z_sign: int
    region: RegionLabel
    value: float


def branch_value(region: RegionLabel, z: float, zz: float) -> float:
    m = abs(z)
    if region is RegionLabel.ZERO:
        return 0.0
    if region is RegionLabel.PHI_BELOW:
        return m * (1.0 - zz) / 2.0
    if region is RegionLabel.PHI_ABOVE:
        return m * (1.0 - z * z) / 2.0
    return m * (1.0 + z * z) / 2.0


def sign_analysis(c: PairCorrelators) -> SignAnalysis:
    """
    Classify (z, zz) into the simplified branch of the minimum mean trace distance.

    phi-below: zz >= -z^2 and zz <= z^2, value |z|(1 - zz)/2
    phi-above: zz >= z^2, value |z|(1 - z^2)/2
    psi:       zz <= -z^2, value |z|(1 + z^2)/2
    """
    z, zz = c.z, c.zz
    cubic = z ** 3 - z * zz
    if z == 0.0:
        region = RegionLabel.ZERO
    elif zz + z * z < 0.0:
        region = RegionLabel.PSI
    elif zz > z * z:
        region = RegionLabel.PHI_ABOVE
    else:
        region = RegionLabel.PHI_BELOW
    return SignAnalysis(
        cubic_sign=int(np.sign(cubic)),
        z_sign=int(np.sign(z)),
        region=region,
        value=branch_value(region, z, zz),
    )


# === Sampling ===

def sample_correlators(rng: np.random.Generator, count: int, max_tries: int = 1000000) -> List[PairCorrelators]:
    """Uniform samples from [-1, 1]^4 restricted to the physical region."""
    samples = []
    tries = 0
    while len(samples) < count:
        if tries >= max_tries:
            raise UnphysicalCorrelatorsError(f"Only {len(samples)} physical samples after {tries} draws")
        z, xx, yy, zz = rng.uniform(-1.0, 1.0, size=4)
        tries += 1
        candidate = PairCorrelators(z, xx, yy, zz)
        if candidate.is_physical(tol=0.0):
            samples.append(candidate)
    return samples
