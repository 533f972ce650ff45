import io
import json
import sqlite3
import threading
from collections import OrderedDict
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from config import config
from core.logger import logger


def _to_blob(array: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    np.save(buffer, np.ascontiguousarray(array), allow_pickle=False)
    return buffer.getvalue()


def _from_blob(blob: bytes) -> np.ndarray:
    return np.load(io.BytesIO(blob), allow_pickle=False)


def _nbytes(value: Tuple[np.ndarray, np.ndarray]) -> int:
    return int(sum(array.nbytes for array in value))


def cache_key(model: str, params: Dict[str, float], chain_length: int, site: int) -> str:
    """Stable key with parameters rounded to 1e-12."""
    rounded = {name: round(float(value), 12) + 0.0 for name, value in sorted(params.items())}
    return f"{model}|{json.dumps(rounded, sort_keys=True)}|L={chain_length}|site={site}"


class SpectrumCache:
    """Spectra of diagonalized chains, in memory and in a sqlite file"""

    def __init__(self, db_path: Optional[Path] = None):
        self.db_path = Path(db_path) if db_path is not None else None
        self._memory: "OrderedDict[str, Tuple[np.ndarray, np.ndarray]]" = OrderedDict()
        self._memory_bytes = 0
        self._write_lock = threading.Lock()
        self._initialized = False

    def _resolve_path(self) -> Path:
        return self.db_path if self.db_path is not None else config.cache_db_path

    def _init_database(self):
        """Create the spectra table on first use"""
        if self._initialized:
            return

        db_path = self._resolve_path()
        db_path.parent.mkdir(parents=True, exist_ok=True)

        conn = self._get_connection()
        cursor = conn.cursor()
        cursor.execute('''
        CREATE TABLE IF NOT EXISTS spectra (
            key TEXT PRIMARY KEY,
            model TEXT NOT NULL,
            params TEXT NOT NULL,
            chain_length INTEGER NOT NULL,
            site INTEGER NOT NULL,
            energies BLOB NOT NULL,
            observables BLOB NOT NULL,
            created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
        )
        ''')
        cursor.execute('''
        CREATE INDEX IF NOT EXISTS idx_spectra_model ON spectra(model, chain_length)
        ''')
        conn.commit()
        conn.close()

        self._initialized = True
        logger.debug(f"Spectrum cache ready at {db_path}")

    def _get_connection(self) -> sqlite3.Connection:
        conn = sqlite3.connect(str(self._resolve_path()), timeout=30)
        conn.row_factory = sqlite3.Row
        return conn

    def _remember(self, key: str, value: Tuple[np.ndarray, np.ndarray]):
        """Keep the newest spectra while their arrays fit in MEMORY_CACHE_BYTES"""
        size = _nbytes(value)
        if key in self._memory:
            self._memory_bytes -= _nbytes(self._memory.pop(key))
        if size > config.MEMORY_CACHE_BYTES:
            return
        self._memory[key] = value
        self._memory_bytes += size
        while self._memory_bytes > config.MEMORY_CACHE_BYTES:
            _, evicted = self._memory.popitem(last=False)
            self._memory_bytes -= _nbytes(evicted)

    @property
    def memory_bytes(self) -> int:
        return self._memory_bytes

    # === Spectra ===

    def load(self, model: str, params: Dict[str, float], chain_length: int,
             site: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Cached (energies, observables), or None on a miss or read failure"""
        key = cache_key(model, params, chain_length, site)
        cached = self._memory.get(key)
        if cached is not None:
            return cached

        try:
            self._init_database()
            conn = self._get_connection()
            cursor = conn.cursor()
            cursor.execute('SELECT energies, observables FROM spectra WHERE key = ?', (key,))
            row = cursor.fetchone()
            conn.close()
        except (sqlite3.Error, OSError) as e:
            logger.warning(f"Spectrum cache read failed for {key}: {e}")
            return None

        if row is None:
            return None

        try:
            value = (_from_blob(row['energies']), _from_blob(row['observables']))
        except (ValueError, OSError) as e:
            logger.warning(f"Discarding corrupt cache entry {key}: {e}")
            return None

        logger.debug(f"Spectrum cache hit: {key}")
        with self._write_lock:
            self._remember(key, value)
        return value

    def store(self, model: str, params: Dict[str, float], chain_length: int, site: int,
              energies: np.ndarray, observables: np.ndarray) -> bool:
        """Persist a spectrum; failures are logged and ignored"""
        key = cache_key(model, params, chain_length, site)
        value = (np.asarray(energies, dtype=float), np.asarray(observables, dtype=float))

        with self._write_lock:
            self._remember(key, value)
            try:
                self._init_database()
                conn = self._get_connection()
                cursor = conn.cursor()
                cursor.execute('''
                INSERT OR REPLACE INTO spectra
                (key, model, params, chain_length, site, energies, observables, created_at)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                ''', (
                    key, model, json.dumps(params, sort_keys=True), chain_length, site,
                    _to_blob(value[0]), _to_blob(value[1]), datetime.now().isoformat(),
                ))
                conn.commit()
                conn.close()
                return True
            except (sqlite3.Error, OSError) as e:
                logger.warning(f"Spectrum cache write failed for {key}: {e}")
                return False

    def count(self) -> int:
        try:
            self._init_database()
            conn = self._get_connection()
            cursor = conn.cursor()
            cursor.execute('SELECT COUNT(*) FROM spectra')
            total = cursor.fetchone()[0]
            conn.close()
            return int(total)
        except (sqlite3.Error, OSError) as e:
            logger.warning(f"Spectrum cache count failed: {e}")
            return 0

    def clear(self):
        """Drop every cached spectrum"""
        with self._write_lock:
            self._memory.clear()
            self._memory_bytes = 0
            try:
                self._init_database()
                conn = self._get_connection()
                cursor = conn.cursor()
                cursor.execute('DELETE FROM spectra')
                conn.commit()
                conn.close()
                logger.info("Spectrum cache cleared")
            except (sqlite3.Error, OSError) as e:
                logger.error(f"Spectrum cache clear failed: {e}")


# Global cache instance
spectrum_cache = SpectrumCache()
