import sys
import json
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from src.config.settings import settings


def add_project_root() -> None:
    """
    Add the project root directory to sys.path to allow absolute imports.
    Assumes this file is located in src/utils.py or similar depth.
    """
    current_file = Path(__file__).resolve()
    src_dir = current_file.parent
    project_root = src_dir.parent

    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))


def round_sig(value: float, digits: int = None) -> float:
    """Round a float to a number of significant digits (default settings.ROUND_DIGITS)."""
    digits = settings.ROUND_DIGITS if digits is None else digits
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def to_serializable(obj: Any) -> Any:
    """
    Recursively convert numpy scalars/arrays, fractions and enums into plain JSON
    values, rounding every float to settings.ROUND_DIGITS significant digits.
    Non-finite floats become the strings "inf", "-inf" and "nan".
    """
    if isinstance(obj, dict):
        return {str(k): to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_serializable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_serializable(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return round_sig(value)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def default_converter(o):
    """Fallback for json.dumps on objects that to_serializable left untouched."""
    if hasattr(o, "to_dict"):
        return to_serializable(o.to_dict())
    return str(o)


def dumps_report(payload: dict) -> str:
    """Deterministic JSON text: schema stamp, rounded floats, sorted keys."""
    body = {"schema": settings.SCHEMA_VERSION}
    body.update(payload)
    return json.dumps(to_serializable(body), sort_keys=True, indent=2, default=default_converter) + "\n"


def write_report(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(payload), encoding="utf-8")
    return path
