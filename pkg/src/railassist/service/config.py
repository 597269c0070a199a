"""Flat key=value configuration with same-named command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Callable

from ..predictor.bundles import CI_LEVELS


@dataclass(frozen=True)
class AppConfig:
    server_port: int = 8000
    model_bundle_path: str = "model.bundle"
    model_kind: str = "forest"
    model_n_trees: int = 50
    ci_default_level: int = 99
    gate_min_confidence: float = 0.5
    gate_timeout_ms: float = 10_000.0
    data_dir: str = "data"
    session_ttl_minutes: float = 30.0

    def __post_init__(self) -> None:
        if self.model_kind not in ("forest", "ridge"):
            raise ValueError("model.kind must be forest or ridge")
        if self.ci_default_level not in CI_LEVELS:
            raise ValueError(f"ci.default_level must be one of {CI_LEVELS}")
        if self.model_n_trees < 1:
            raise ValueError("model.n_trees must be >= 1")
        if self.gate_timeout_ms <= 0 or self.session_ttl_minutes <= 0:
            raise ValueError("gate.timeout_ms and session.ttl_minutes must be positive")


# Config-file key -> (dataclass field, parser). Command-line flags carry the
# same names, e.g. --server.port 9000.
CONFIG_KEYS: dict[str, tuple[str, Callable[[str], object]]] = {
    "server.port": ("server_port", int),
    "model.bundle_path": ("model_bundle_path", str),
    "model.kind": ("model_kind", str),
    "model.n_trees": ("model_n_trees", int),
    "ci.default_level": ("ci_default_level", int),
    "gate.min_confidence": ("gate_min_confidence", float),
    "gate.timeout_ms": ("gate_timeout_ms", float),
    "data.dir": ("data_dir", str),
    "session.ttl_minutes": ("session_ttl_minutes", float),
}

_FIELD_NAMES = {f.name for f in fields(AppConfig)}


def parse_config_text(text: str, base: AppConfig | None = None) -> AppConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        attr, parser = CONFIG_KEYS[key]
        values[attr] = parser(value.strip())
    base = base or AppConfig()
    return replace(base, **values)


def load_config(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> AppConfig:
    """Read the config file (if given), then apply key=value overrides."""
    config = AppConfig()
    if path is not None:
        config = parse_config_text(Path(path).read_text(encoding="utf-8"), config)
    if overrides:
        values: dict[str, object] = {}
        for key, value in overrides.items():
            if key not in CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            attr, parser = CONFIG_KEYS[key]
            values[attr] = parser(value)
        config = replace(config, **values)
    return config
