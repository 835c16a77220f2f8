"""Flat key=value config files mirroring TrainConfig, fail-fast on unknowns."""

from __future__ import annotations

import dataclasses
from pathlib import Path

from ..errors import InvalidConfigurationError
from ..train.config import TrainConfig

_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config(path: str | Path | None, overrides: dict | None = None) -> TrainConfig:
    """Defaults -> config file -> explicit overrides, in increasing priority."""
    cfg = TrainConfig()
    field_types = {f.name: f.type for f in dataclasses.fields(TrainConfig)}

    def assign(key: str, raw, where: str):
        if key not in field_types:
            raise InvalidConfigurationError(f"unknown config key {key!r} ({where})")
        current = getattr(cfg, key)
        try:
            if isinstance(current, bool):
                value = _BOOL[str(raw).strip().lower()]
            elif isinstance(current, int):
                value = int(float(raw))
            elif isinstance(current, float):
                value = float(raw)
            else:
                value = type(current)(raw)
        except (ValueError, KeyError) as exc:
            raise InvalidConfigurationError(f"bad value for {key!r}: {raw!r} ({where})") from exc
        setattr(cfg, key, value)

    if path is not None:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise InvalidConfigurationError(f"malformed config line {lineno}: {line!r}")
            key, _, raw = stripped.partition("=")
            assign(key.strip(), raw.strip(), f"{path}:{lineno}")
    for key, raw in (overrides or {}).items():
        if raw is not None:
            assign(key, raw, "override")
    return cfg.validate()


def write_config(cfg: TrainConfig, path: str | Path) -> None:
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in dataclasses.fields(TrainConfig)]
    Path(path).write_text("\n".join(lines) + "\n")
