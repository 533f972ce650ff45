from dataclasses import dataclass
from typing import Optional, Union

from config import config
from config.presets import PROVIDER_ORDER
from core.chains import ChainSize, ThermalPoint, ed_correlators
from core.exceptions import ConfigError, QcpError, UnsupportedStrategyError
from core.free_fermion import xy_correlators
from core.logger import logger
from core.teleport import PairCorrelators


@dataclass(frozen=True)
class Strategy:
    """How correlators are obtained: ED on L sites, free fermions, or the preset fallback order."""

    kind: str
    chain_length: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("ed", "ff", "auto"):
            raise ConfigError(f"Unknown provider '{self.kind}' (expected ed:<L>, ff or auto)")
        if self.kind == "ed":
            ChainSize(self.chain_length if self.chain_length is not None else config.DEFAULT_CHAIN_LENGTH)

    @property
    def length(self) -> int:
        return self.chain_length if self.chain_length is not None else config.DEFAULT_CHAIN_LENGTH

    def __str__(self) -> str:
        if self.kind == "ed":
            return f"ed:{self.length}"
        return self.kind


def parse_strategy(text: Union[str, Strategy]) -> Strategy:
    """Parse 'ed:<L>', 'ed', 'ff' or 'auto'."""
    if isinstance(text, Strategy):
        return text
    value = str(text).strip().lower()
    if value.startswith("ed"):
        _, _, length = value.partition(":")
        if not length:
            return Strategy("ed")
        try:
            return Strategy("ed", int(length))
        except ValueError as e:
            raise ConfigError(f"Invalid chain length in provider '{text}'") from e
    return Strategy(value)


def correlator_provider(point: ThermalPoint, strategy: Union[str, Strategy] = "auto") -> PairCorrelators:
    """Correlators at a thermal point, tagged with the strategy that produced them."""
    strategy = parse_strategy(strategy)

    if strategy.kind == "ed":
        return ed_correlators(point, strategy.length)
    if strategy.kind == "ff":
        if point.model.name != "xy":
            raise UnsupportedStrategyError(f"Free-fermion strategy is not available for the {point.model.name} model")
        return xy_correlators(point)

    last_error = None
    for name in PROVIDER_ORDER[point.model.name]:
        try:
            return correlator_provider(point, name)
        except QcpError as e:
            logger.warning(f"Provider {name} failed for {point.model.name} at kT={point.kT}: {e}")
            last_error = e
            continue

    logger.error(f"All providers failed for {point.model.name} at kT={point.kT}")
    raise last_error if last_error is not None else UnsupportedStrategyError("No provider configured")
