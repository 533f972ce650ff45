import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import config
from core.exceptions import ConfigError


def ensure_directory(path: Union[str, Path]) -> Path:
    """Create the directory if needed"""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def parse_range(text: str) -> Tuple[float, float]:
    """Parse 'a:b' into an ascending pair"""
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ConfigError(f"Range '{text}' must look like start:stop")
    try:
        start, stop = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise ConfigError(f"Range '{text}' has a non-numeric bound") from e
    if not stop > start:
        raise ConfigError(f"Range '{text}' is empty (stop must exceed start)")
    return start, stop


def parse_float_list(values: Sequence[Union[str, float]]) -> List[float]:
    """Flatten repeated or comma-separated numeric options"""
    result = []
    for value in values:
        for part in str(value).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                number = float(part)
            except ValueError as e:
                raise ConfigError(f"'{part}' is not a number") from e
            if not math.isfinite(number):
                raise ConfigError(f"'{part}' is not finite")
            result.append(number)
    return result


def write_csv(frame: pd.DataFrame, filepath: Union[str, Path]) -> Path:
    """UTF-8 comma-separated file with a header row"""
    path = Path(filepath)
    ensure_directory(path.parent)
    frame.to_csv(path, index=False, float_format=config.CSV_FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def save_json(data: Any, filepath: Union[str, Path], indent: int = 2) -> Path:
    """Write data as JSON; NaN becomes null"""
    path = Path(filepath)
    ensure_directory(path.parent)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(data), f, indent=indent, ensure_ascii=False)
    return path


def load_json(filepath: Union[str, Path]) -> Any:
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        return {}
    except json.JSONDecodeError:
        return {}


def default_output_path(command: str, label: str, suffix: str = ".csv") -> Path:
    """Timestamped file under the output directory"""
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    safe_label = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)
    return config.OUTPUT_DIR / f"{command}_{safe_label}_{timestamp}{suffix}"


def summary_path_for(csv_path: Union[str, Path]) -> Path:
    return Path(csv_path).with_suffix(".json")

