"""Flat text configuration: one ``key = value`` per line, dotted keys.

Lines starting with ``#`` (or blank) are ignored; inline ``#`` comments
are stripped.  Every key has a default; unknown keys are errors so that
typos cannot silently fall back to defaults.  Turbo polynomials are
octal-coded, matching their usual citation form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

__all__ = ["ConfigError", "DEFAULTS", "parse_config_text", "load_config", "merge_options"]


class ConfigError(Exception):
    """Bad key, bad value or unreadable config file."""


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_optional_float(s: str) -> float | None:
    low = s.strip().lower()
    if low in ("none", ""):
        return None
    return float(s)


def _parse_interval(s: str) -> tuple[float, float]:
    parts = [p for p in s.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError(f"interval needs two numbers: {s!r}")
    return float(parts[0]), float(parts[1])


def _parse_float_list(s: str) -> tuple[float, ...]:
    parts = [p for p in s.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _parse_int_list(s: str) -> tuple[int, ...]:
    parts = [p for p in s.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(int(p) for p in parts)


def _parse_octal(s: str) -> int:
    return int(s.strip(), 8)


def _parse_choice(*choices: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        value = s.strip().lower()
        if value not in choices:
            raise ValueError(f"must be one of {choices}, got {s!r}")
        return value
    return parse


# key -> (default value, parser). Defaults simulate the urban V2V preset.
_SCHEMA: dict[str, tuple[Any, Callable[[str], Any]]] = {
    "channel.paths": (20, int),
    "channel.carrier_hz": (5.9e9, float),
    "channel.wave_speed": (3.0e8, float),
    "channel.u_t_max": (30.0, float),
    "channel.u_r_max": (25.0, float),
    "channel.azimuth_t": ((-math.pi, math.pi), _parse_interval),
    "channel.azimuth_r": ((-math.pi, math.pi), _parse_interval),
    "channel.elevation_t": ((-math.pi / 2, math.pi / 2), _parse_interval),
    "channel.elevation_r": ((-math.pi / 2, math.pi / 2), _parse_interval),
    "channel.weibull_b": (0.8, float),
    "channel.weibull_w": (0.14011184901633444, float),
    "channel.u_s_max": (10.0, _parse_optional_float),
    "channel.normalization": ("sqrt2_over_l", _parse_choice("sqrt2_over_l", "unit_power")),
    "channel.probe_rate_factor": (1.0, float),
    "channel.n_samples": (10_000, int),
    "nr.sigma2": (0.02, float),
    "nr.mu_real": (0.0, float),
    "nr.mu_imag": (0.0, float),
    "nr.snr_db": (None, _parse_optional_float),
    "quant.gamma": (0.35, float),
    "quant.m": (5, int),
    "quant.fraction": (1.0, float),
    "quant.rho_threshold": (0.9, float),
    "quant.region_budget": (10, int),
    "turbo.constraint_length": (3, int),
    "turbo.feedback_poly": (0o7, _parse_octal),
    "turbo.feedforward_poly": (0o5, _parse_octal),
    "turbo.block_len": (512, int),
    "turbo.interleaver_seed": (1, int),
    "turbo.puncture": ("none", _parse_choice("none", "half")),
    "turbo.iterations": (8, int),
    "turbo.algorithm": ("log-map", _parse_choice("log-map", "max-log-map")),
    "turbo.extrinsic_scale": (1.0, float),
    "run.key_len": (128, int),
    "run.scheme": ("both", _parse_choice("indexing", "turbo", "both")),
    "run.master_seed": (1, int),
    "run.trials": (1, int),
    "run.simulated_minutes": (1.0, float),
    "run.calibration_samples": (256, int),
    "sweep.sigma2": ((0.002, 0.005, 0.01, 0.02, 0.05), _parse_float_list),
    "sweep.key_len": ((128,), _parse_int_list),
}

DEFAULTS: dict[str, Any] = {key: default for key, (default, _) in _SCHEMA.items()}


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse config text into a full options dict (defaults + overrides)."""
    options = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        _, parser = _SCHEMA[key]
        try:
            options[key] = parser(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return options


def load_config(path: str | Path | None) -> dict[str, Any]:
    """Options from a config file; pure defaults when path is None."""
    if path is None:
        return dict(DEFAULTS)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def merge_options(options: dict[str, Any], **overrides: Any) -> dict[str, Any]:
    """Apply non-None keyword overrides (CLI flags) onto parsed options."""
    merged = dict(options)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged
