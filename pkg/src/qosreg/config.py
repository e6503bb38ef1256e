"""key=value configuration with environment overrides (``QOSREG_<KEY>``)."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Mapping, Optional

from .reputation import DEFAULT_TOLERANCE, MODES
from .selector import MINMAX, SCORERS

ENV_PREFIX = "QOSREG_"
USAGE_MODES = ("handoff", "confirm")


@dataclass(frozen=True)
class Config:
    journal: str = "qosreg.journal"
    model: str = "qosreg-model.json"
    listen: str = "127.0.0.1:8080"
    tolerance: float = DEFAULT_TOLERANCE
    scorer: str = MINMAX
    reputation_mode: str = "literal"
    usage_on: str = "handoff"
    seed: int = 0
    ratio: float = 0.8
    k_max: int = 0  # 0: up to the number of features
    fetch_wsdl: bool = True
    fetch_timeout_ms: int = 5000
    fetch_parallelism: int = 8

    def __post_init__(self):
        if self.scorer not in SCORERS:
            raise ValueError(f"scorer must be one of {SCORERS}")
        if self.reputation_mode not in MODES:
            raise ValueError(f"reputation_mode must be one of {MODES}")
        if self.usage_on not in USAGE_MODES:
            raise ValueError(f"usage_on must be one of {USAGE_MODES}")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")

    @property
    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen.rpartition(":")
        return host or "127.0.0.1", int(port)

    def with_overrides(self, values: Mapping[str, str]) -> "Config":
        return replace(self, **_coerce(values))


def _coerce(values: Mapping[str, str]) -> dict:
    types = {f.name: f.type for f in fields(Config)}
    out = {}
    for key, raw in values.items():
        if key not in types:
            raise ValueError(f"unknown configuration key {key!r}")
        kind = types[key]
        if kind == "bool":
            out[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif kind == "int":
            out[key] = int(raw)
        elif kind == "float":
            out[key] = float(raw)
        else:
            out[key] = raw.strip()
    return out


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


def load_config(path: Optional[str | os.PathLike] = None, env: Optional[Mapping[str, str]] = None) -> Config:
    """Defaults, then the file (if given), then ``QOSREG_*`` environment variables."""
    env = os.environ if env is None else env
    values: dict[str, str] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    for f in fields(Config):
        key = ENV_PREFIX + f.name.upper()
        if key in env:
            values[f.name] = env[key]
    return Config().with_overrides(values)
