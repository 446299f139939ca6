"""Default pass thresholds and config parsing helpers.

Every tolerance used by a check lives in :data:`TOLERANCES`; a config file
may override any of them with a top-level key of the same name.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

__all__ = ["TOLERANCES", "MAX_RESOLUTION", "ConfigError", "load_config", "merged_tolerances", "thread_count"]

MAX_RESOLUTION = 20

TOLERANCES = {
    # Haar system
    "orthonormality_tol": 1e-10,
    "parseval_tol": 1e-10,
    "haar_runtime_s": 5.0,
    # pointwise domination
    "c_cap": 50.0,
    "stability": 0.25,
    "case_runtime_s": 60.0,
    # maximal weak type
    "weak_c0": 2.0,
    "weak_tol": 0.1,
    # weight arithmetic and factorization
    "identity_rtol": 1e-9,
    "lemma_rtol": 1e-9,
    "roundtrip_rtol": 1e-12,
    # sharpness
    "theta_slack": 0.15,
    "refinement_tol": 0.05,
    # shifts and paraproducts
    "shift_stability": 0.10,
    # mixed weak type
    "mixed_c_cap": 50.0,
}


class ConfigError(ValueError):
    """Raised for unreadable or inconsistent experiment configs."""


def merged_tolerances(overrides: dict | None = None) -> dict:
    out = dict(TOLERANCES)
    for key, value in (overrides or {}).items():
        if key in TOLERANCES:
            out[key] = float(value)
    return out


def load_config(path) -> dict:
    """Read a JSON config and validate the generic keys."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "experiment" not in data:
        raise ConfigError("config needs an 'experiment' key")
    for key in ("resolution", "lattice_depth"):
        if key in data:
            value = data[key]
            if not isinstance(value, int) or value < 0:
                raise ConfigError(f"{key} must be a nonnegative integer")
            if value > MAX_RESOLUTION:
                raise ConfigError(f"{key} = {value} exceeds the desk-scale limit {MAX_RESOLUTION}")
    return data


def thread_count() -> int:
    """Parallelism cap from ``FBMOO_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("FBMOO_THREADS", "1")))
    except ValueError:
        return 1
