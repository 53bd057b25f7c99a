"""Flat `key = value` scenario configuration files.

Every key is documented in the shipped configs; unknown keys are rejected so
typos fail loudly.  Rates are per hour, durations in hours.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .simulator.types import SimConfig

SCENARIO_KEYS = {
    "lambda_per_hour",
    "theta_per_hour",
    "q",
    "n_slots",
    "mu_sr_per_hour",
    "mu_sab_per_hour",
    "horizon_hours",
    "warmup_hours",
    "mask_p_ss",
}

REQUIRED_KEYS = SCENARIO_KEYS - {"mask_p_ss"}


def parse_kv_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such config file: {path}")
    out: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key in out:
            raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_scenario(path: str | Path, seed: int = 0) -> tuple[SimConfig, float]:
    """Parse a scenario config; returns (SimConfig, mask_p_ss)."""
    raw = parse_kv_file(path)
    unknown = set(raw) - SCENARIO_KEYS
    if unknown:
        raise ValidationError(f"{path}: unknown config keys: {sorted(unknown)}")
    missing = REQUIRED_KEYS - set(raw)
    if missing:
        raise ValidationError(f"{path}: missing config keys: {sorted(missing)}")

    def num(key: str) -> float:
        try:
            return float(raw[key])
        except ValueError:
            raise ValidationError(f"{path}: key {key!r} is not a number: {raw[key]!r}") from None

    mu_sab_raw = raw["mu_sab_per_hour"]
    mu_sab = math.inf if mu_sab_raw.lower() in ("inf", "instantaneous") else float(mu_sab_raw)
    config = SimConfig(
        lam=num("lambda_per_hour"),
        theta=num("theta_per_hour"),
        q=num("q"),
        n_slots=int(num("n_slots")),
        mu_sr=num("mu_sr_per_hour"),
        mu_sab=mu_sab,
        horizon=num("horizon_hours"),
        warmup=num("warmup_hours"),
        seed=seed,
    )
    p_ss = float(raw.get("mask_p_ss", "0.15"))
    if not 0.0 <= p_ss <= 1.0:
        raise ValidationError(f"{path}: mask_p_ss must be a probability, got {p_ss}")
    return config, p_ss


def builtin_config_path(name: str) -> Path:
    """Path of a config shipped with the package (e.g. 'messaging.cfg')."""
    ref = resources.files("silentq").joinpath("configs", name)
    path = Path(str(ref))
    if not path.exists():
        raise ValidationError(f"no built-in config named {name!r}")
    return path
