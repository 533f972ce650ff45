import os
from pathlib import Path
from dataclasses import dataclass, field
from typing import List

from dotenv import load_dotenv

# .env values never override variables already set in the environment
load_dotenv()


def _env_flag(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() not in ("0", "false", "no", "off", "")


@dataclass
class Config:
    # Paths
    BASE_DIR: Path = Path(__file__).resolve().parent.parent
    OUTPUT_DIR: Path = Path(os.getenv("QCP_OUTPUT_DIR", str(BASE_DIR / "output")))
    LOGS_DIR: Path = Path(os.getenv("QCP_LOGS_DIR", str(BASE_DIR / "logs")))
    CACHE_DIR: Path = Path(os.getenv("QCP_CACHE_DIR", str(BASE_DIR / "cache")))
    CACHE_DB_NAME: str = "spectra.db"

    # Density-matrix tolerances
    HERMITIAN_TOL: float = 1e-12
    TRACE_TOL: float = 1e-12
    PSD_TOL: float = 1e-10
    DEGENERATE_PROB: float = 1e-14

    # Chains
    MAX_QUBITS: int = 16
    MAX_PARITY_QUBITS: int = 14
    DEFAULT_CHAIN_LENGTH: int = 12
    DEGENERACY_TOL: float = 1e-10
    QUADRATURE_TOL: float = 1e-9
    QUADRATURE_LIMIT: int = 2000
    SERIES_CUTOFF: float = 1e-16

    # Scans
    GRID_STEP: float = 0.01
    WORKERS: int = int(os.getenv("QCP_WORKERS", "1"))
    CSV_FLOAT_FORMAT: str = "%.17g"

    # Cache
    USE_SPECTRUM_CACHE: bool = _env_flag("QCP_USE_CACHE", True)
    MEMORY_CACHE_BYTES: int = int(os.getenv("QCP_CACHE_MEMORY_MB", "256")) * 1024 * 1024

    # Logging
    LOG_LEVEL: str = os.getenv("QCP_LOG_LEVEL", "INFO")
    LOG_TO_FILE: bool = _env_flag("QCP_LOG_TO_FILE", True)

    # Observables written by the scan command, in column order
    SCAN_COLUMNS: List[str] = field(default_factory=lambda: [
        "param", "kT", "z", "xx", "yy", "zz",
        "Fbar_psi", "Fbar_phi", "Fmax", "argmax_set",
        "Dbar_psi", "Dbar_phi", "Dmin", "argmin_set",
    ])

    @property
    def cache_db_path(self) -> Path:
        return self.CACHE_DIR / self.CACHE_DB_NAME

    def setup_directories(self):
        """Create all necessary directories"""
        for directory in [self.OUTPUT_DIR, self.LOGS_DIR, self.CACHE_DIR]:
            directory.mkdir(parents=True, exist_ok=True)


config = Config()
