"""Run configuration: sectioned INI (or JSON) files with a strict schema."""

from __future__ import annotations

import configparser
import json
from pathlib import Path

from .targets import DEFAULTS as TARGET_DEFAULTS


class ConfigError(ValueError):
    pass


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _list(item):
    def conv(v):
        if isinstance(v, (list, tuple)):
            return [item(x) for x in v]
        return [item(x.strip()) for x in str(v).split(",") if x.strip()]

    return conv


_TARGET_KEYS = {"kind": str} | {k: float for p in TARGET_DEFAULTS.values() for k in p}

SCHEMA: dict[str, dict] = {
    "model": {"kind": str, "n": int, "depth": int, "ansatz": str, "scheme": str, "correlation": _bool},
    "target": _TARGET_KEYS,
    "train": {
        "epochs": int,
        "learning_rate": float,
        "seed": int,
        "loss_report_stride": int,
        "init_scale": float,
        "early_stop": float,
    },
    "sample": {"model": str, "shots": int, "S": int, "variant": str, "seed": int, "tvd": _bool},
    "compare": {"schemes": _list(str), "n_values": _list(int), "depth": int, "seeds": int},
    "verify": {"n_min": int, "n_max": int, "corrupt_qht": _bool},
    "overlap": {"n": int, "step": float, "regularized": _bool},
    "output": {"directory": str, "formats": _list(str)},
}


def read_config_file(path) -> dict:
    """Parse an INI or JSON file into ``{section: {key: raw value}}``."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON config: {e}") from e
        if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError("JSON config must map section names to objects")
        return data
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (``S``)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"invalid INI config: {e}") from e
    return {s: dict(cp[s]) for s in cp.sections()}


def coerce(raw: dict) -> dict:
    """Check every section and key against the schema and convert values."""
    out: dict[str, dict] = {}
    for section, values in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        schema = SCHEMA[section]
        out[section] = {}
        for key, value in values.items():
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                out[section][key] = schema[key](value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad value for [{section}] {key}: {value!r} ({e})") from e
    return out


def merge(defaults: dict, override: dict) -> dict:
    merged = {s: dict(v) for s, v in defaults.items()}
    for s, v in override.items():
        merged.setdefault(s, {}).update(v)
    return merged


def load(path=None, defaults: dict | None = None) -> dict:
    cfg = coerce(read_config_file(path)) if path else {}
    return merge(defaults or {}, cfg)


def canonical(cfg: dict) -> str:
    """Compact, key-sorted JSON; embedded in every output file."""
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))
