"""
Periodic spin-1/2 chains and their thermal nearest-neighbour correlators.

Models:
    XXZ: H = sum_j [sx sx + sy sy + delta sz sz - (h/2) sz]
    XY:  H = -(lambda/4) sum_j [(1+gamma) sx sx + (1-gamma) sy sy] - (1/2) sum_j sz

Basis: site i of a chain of length L is bit (L - 1 - i) of the basis index;
bit value 0 is spin up (sz = +1).
"""

import math
from dataclasses import dataclass, replace
from typing import ClassVar, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.optimize import brentq
from scipy.special import logsumexp

from config import config
from core.exceptions import ConfigError, DimensionError, InvalidStateError, RootNotBracketedError
from core.logger import logger
from core.qmat import DensityMatrix
from core.teleport import PairCorrelators, Provenance
from database.spectrum_cache import spectrum_cache


@dataclass(frozen=True)
class BondTerms:
    """Matrix elements of one bond in the sz basis."""

    amp_diff: float      # flips an antiparallel pair
    amp_same: float      # flips a parallel pair
    coupling_zz: float
    field: float         # per-site sz coefficient, one site per bond


def _check_finite(**values: float):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ConfigError(f"Model parameter {name}={value} must be finite")


@dataclass(frozen=True)
class XXZModel:
    delta: float
    h: float

    name: ClassVar[str] = "xxz"
    _axes: ClassVar[Dict[str, str]] = {"delta": "delta", "h": "h"}

    def __post_init__(self):
        _check_finite(delta=self.delta, h=self.h)

    @property
    def conserves_magnetization(self) -> bool:
        return True

    def bond_terms(self) -> BondTerms:
        return BondTerms(amp_diff=2.0, amp_same=0.0, coupling_zz=self.delta, field=-self.h / 2.0)

    def params(self) -> Dict[str, float]:
        return {"delta": float(self.delta), "h": float(self.h)}

    def with_param(self, axis: str, value: float) -> "XXZModel":
        if axis not in self._axes:
            raise ConfigError(f"Axis '{axis}' is not a parameter of the XXZ model (use delta or h)")
        return replace(self, **{self._axes[axis]: float(value)})


@dataclass(frozen=True)
class XYModel:
    lam: float
    gamma: float

    name: ClassVar[str] = "xy"
    _axes: ClassVar[Dict[str, str]] = {"lambda": "lam", "gamma": "gamma"}

    def __post_init__(self):
        _check_finite(lam=self.lam, gamma=self.gamma)
        if self.lam < 0:
            raise ConfigError(f"XY coupling lambda={self.lam} must be non-negative")

    @property
    def conserves_magnetization(self) -> bool:
        return self.gamma == 0.0

    def bond_terms(self) -> BondTerms:
        return BondTerms(
            amp_diff=-self.lam / 2.0,
            amp_same=-self.lam * self.gamma / 2.0,
            coupling_zz=0.0,
            field=-0.5,
        )

    def params(self) -> Dict[str, float]:
        return {"lambda": float(self.lam), "gamma": float(self.gamma)}

    def with_param(self, axis: str, value: float) -> "XYModel":
        if axis not in self._axes:
            raise ConfigError(f"Axis '{axis}' is not a parameter of the XY model (use lambda or gamma)")
        return replace(self, **{self._axes[axis]: float(value)})


ModelSpec = Union[XXZModel, XYModel]


def build_model(name: str, params: Dict[str, float]) -> ModelSpec:
    """Model from its name and a parameter mapping as written in run configs."""
    name = str(name).lower()
    try:
        if name == "xxz":
            return XXZModel(delta=float(params.get("delta", 1.0)), h=float(params["h"]))
        if name == "xy":
            return XYModel(lam=float(params.get("lambda", 1.0)), gamma=float(params["gamma"]))
    except KeyError as e:
        raise ConfigError(f"Model '{name}' needs parameter {e}") from e
    raise ConfigError(f"Unknown model '{name}' (expected xxz or xy)")


@dataclass(frozen=True)
class ThermalPoint:
    model: ModelSpec
    kT: float

    def __post_init__(self):
        if not math.isfinite(self.kT) or self.kT < 0:
            raise ConfigError(f"Temperature kT={self.kT} must be finite and non-negative")


@dataclass(frozen=True)
class ChainSize:
    L: int

    def __post_init__(self):
        if self.L < 4 or self.L % 2:
            raise ConfigError(f"Chain length L={self.L} must be an even integer >= 4")
        if self.L > config.MAX_QUBITS:
            raise DimensionError(f"Chain length L={self.L} exceeds the limit of {config.MAX_QUBITS}")


def _length(L: Union[ChainSize, int]) -> int:
    return L.L if isinstance(L, ChainSize) else ChainSize(int(L)).L


# === Basis helpers ===

def _popcount(states: np.ndarray, L: int) -> np.ndarray:
    counts = np.zeros_like(states)
    for bit in range(L):
        counts += (states >> bit) & 1
    return counts


def _spins(states: np.ndarray, L: int, site: int) -> np.ndarray:
    return 1 - 2 * ((states >> (L - 1 - site)) & 1)


def _pair_mask(L: int, i: int, j: int) -> int:
    return (1 << (L - 1 - i)) | (1 << (L - 1 - j))


def _locate(states: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Positions of targets in the sorted basis and a mask of those present."""
    positions = np.searchsorted(states, targets)
    positions = np.minimum(positions, len(states) - 1)
    return positions, states[positions] == targets


def _sectors(model: ModelSpec, L: int) -> List[np.ndarray]:
    """Sorted basis states of each conserved-quantity block."""
    states = np.arange(2 ** L, dtype=np.int64)
    downs = _popcount(states, L)
    if model.conserves_magnetization:
        labels = downs
    else:
        if L > config.MAX_PARITY_QUBITS:
            raise DimensionError(
                f"Parity-sector ED is limited to L <= {config.MAX_PARITY_QUBITS}, got L={L}"
            )
        labels = downs % 2
    return [states[labels == label] for label in np.unique(labels)]


def _block_hamiltonian(model: ModelSpec, L: int, states: np.ndarray) -> sparse.csr_matrix:
    terms = model.bond_terms()
    dim = len(states)
    index = np.arange(dim)
    diagonal = np.zeros(dim)
    rows, cols, values = [], [], []

    for i in range(L):
        j = (i + 1) % L
        si = _spins(states, L, i)
        sj = _spins(states, L, j)
        diagonal += terms.coupling_zz * si * sj + terms.field * si

        amplitude = np.where(si != sj, terms.amp_diff, terms.amp_same)
        target, present = _locate(states, states ^ _pair_mask(L, i, j))
        keep = present & (amplitude != 0.0)
        rows.append(target[keep])
        cols.append(index[keep])
        values.append(amplitude[keep])

    rows.append(index)
    cols.append(index)
    values.append(diagonal)
    # Duplicate entries are summed (L=2 counts its single bond twice)
    matrix = sparse.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return matrix.tocsr()


def hamiltonian_matrix(model: ModelSpec, L: Union[ChainSize, int]) -> sparse.csr_matrix:
    """Full 2^L x 2^L Hamiltonian with the periodic wrap bond."""
    length = L.L if isinstance(L, ChainSize) else int(L)
    if length < 2:
        raise ConfigError(f"Chain length L={length} must be at least 2")
    if length > config.MAX_QUBITS:
        raise DimensionError(f"Chain length L={length} exceeds the limit of {config.MAX_QUBITS}")
    return _block_hamiltonian(model, length, np.arange(2 ** length, dtype=np.int64))


def magnetization_operator(L: int) -> sparse.csr_matrix:
    states = np.arange(2 ** L, dtype=np.int64)
    total = sum(_spins(states, L, site) for site in range(L))
    return sparse.diags(total.astype(float)).tocsr()


def _diagonalize(model: ModelSpec, L: int) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    for states in _sectors(model, L):
        block = _block_hamiltonian(model, L, states).toarray()
        energies, vectors = eigh(block)
        logger.debug(f"Diagonalized {model.name} block of dimension {len(states)} (L={L})")
        yield states, energies, vectors


def _pair_observables(states: np.ndarray, vectors: np.ndarray, L: int, site: int) -> np.ndarray:
    """Per-eigenstate (z, xx, yy, zz) on the pair (site, site + 1)."""
    neighbour = (site + 1) % L
    si = _spins(states, L, site)
    sj = _spins(states, L, neighbour)
    weights = np.abs(vectors) ** 2
    z = si @ weights
    zz = (si * sj) @ weights

    # Flipped states outside the block have zero overlap with its eigenstates
    target, present = _locate(states, states ^ _pair_mask(L, site, neighbour))
    overlap = (vectors[target[present]].conj() * vectors[present]).real
    xx = overlap.sum(axis=0)
    yy = np.where(si == sj, -1.0, 1.0)[present] @ overlap
    return np.column_stack([z, xx, yy, zz])


def _thermal_weights(energies: np.ndarray, kT: float) -> np.ndarray:
    """Normalized Boltzmann weights; equal weights on the ground space at kT=0."""
    shifted = energies - energies.min()
    if kT == 0:
        width = float(shifted.max())
        weights = (shifted <= config.DEGENERACY_TOL * max(width, 1.0)).astype(float)
    else:
        weights = np.exp(-shifted / kT)
    return weights / weights.sum()


@dataclass(frozen=True, eq=False)
class ThermalSpectrum:
    """Energies and per-eigenstate pair observables; independent of temperature."""

    energies: np.ndarray
    observables: np.ndarray
    chain_length: int

    def weights(self, kT: float) -> np.ndarray:
        return _thermal_weights(self.energies, kT)

    def correlators(self, kT: float) -> PairCorrelators:
        z, xx, yy, zz = self.weights(kT) @ self.observables
        return PairCorrelators(z, xx, yy, zz, provenance=Provenance("ed", self.chain_length))

    def energy(self, kT: float) -> float:
        return float(self.weights(kT) @ self.energies)

    def log_partition(self, kT: float) -> float:
        if kT <= 0:
            raise InvalidStateError("Partition function needs kT > 0")
        return float(logsumexp(-self.energies / kT))


def thermal_spectrum(model: ModelSpec, L: Union[ChainSize, int], site: int = 0,
                     use_cache: Optional[bool] = None) -> ThermalSpectrum:
    """Full spectrum of the chain with pair observables measured at one site."""
    length = _length(L)
    site = int(site) % length
    use_cache = config.USE_SPECTRUM_CACHE if use_cache is None else use_cache

    if use_cache:
        cached = spectrum_cache.load(model.name, model.params(), length, site)
        if cached is not None:
            energies, observables = cached
            return ThermalSpectrum(energies, observables, length)

    energy_blocks, observable_blocks = [], []
    for states, energies, vectors in _diagonalize(model, length):
        energy_blocks.append(energies)
        observable_blocks.append(_pair_observables(states, vectors, length, site))
    energies = np.concatenate(energy_blocks)
    observables = np.concatenate(observable_blocks)
    order = np.argsort(energies, kind="stable")
    energies, observables = energies[order], observables[order]

    if use_cache:
        spectrum_cache.store(model.name, model.params(), length, site, energies, observables)
    return ThermalSpectrum(energies, observables, length)


def ed_correlators(point: ThermalPoint, L: Union[ChainSize, int] = None, site: int = 0) -> PairCorrelators:
    """Canonical-ensemble correlators of a finite periodic chain."""
    length = config.DEFAULT_CHAIN_LENGTH if L is None else _length(L)
    return thermal_spectrum(point.model, length, site).correlators(point.kT)


def ed_pair_density_matrix(point: ThermalPoint, L: Union[ChainSize, int], site: int = 0) -> DensityMatrix:
    """Two-site reduced density matrix traced directly from the thermal state."""
    length = _length(L)
    site = int(site) % length
    blocks = list(_diagonalize(point.model, length))
    weights = _thermal_weights(np.concatenate([energies for _, energies, _ in blocks]), point.kT)

    rho = np.zeros((4, 4))
    offset = 0
    for states, energies, vectors in blocks:
        block_weights = weights[offset:offset + len(energies)]
        offset += len(energies)
        occupied = block_weights > 0
        if not occupied.any():
            continue
        full = np.zeros((2 ** length, int(occupied.sum())))
        full[states] = vectors[:, occupied] * np.sqrt(block_weights[occupied])
        tensor = full.reshape([2] * length + [-1])
        tensor = np.moveaxis(tensor, [site, (site + 1) % length], [0, 1])
        pair = tensor.reshape(4, -1)
        rho += pair @ pair.T
    return DensityMatrix(rho)


# === XXZ critical points ===

def xxz_qcp_delta1(h: float) -> float:
    """Saturation boundary from h = 4(1 + delta1)."""
    return h / 4.0 - 1.0


def _alternating_sech_sum(eta: float) -> float:
    """1 + 2 sum_{j>=1} (-1)^j sech(j eta), truncated below the series cutoff."""
    terms = int(math.ceil(math.log(2.0 / config.SERIES_CUTOFF) / eta)) + 1
    j = np.arange(1, terms + 1, dtype=float)
    decay = np.exp(-j * eta)
    sech = 2.0 * decay / (1.0 + decay * decay)
    signs = np.where(j % 2 == 0, 1.0, -1.0)
    return 1.0 + 2.0 * float(np.sum(signs * sech))


def critical_field(eta: float) -> float:
    """Field at which the antiferromagnetic phase closes, as a function of eta = arccosh(delta2)."""
    return 4.0 * math.sinh(eta) * _alternating_sech_sum(eta)


def xxz_qcp_delta2(h: float) -> float:
    """Anisotropy delta2 = cosh(eta) solving h = critical_field(eta)."""
    if not h > 0:
        raise RootNotBracketedError(f"Field h={h} must be positive")

    def residual(eta: float) -> float:
        return critical_field(eta) - h

    low, high = 1e-2, 1.0
    if residual(low) >= 0:
        raise RootNotBracketedError(f"Field h={h} is below the resolvable range")
    while residual(high) <= 0:
        high *= 2.0
        if high > 64.0:
            raise RootNotBracketedError(f"No root bracketed for h={h}")

    eta = brentq(residual, low, high, xtol=1e-14)
    return math.cosh(eta)
