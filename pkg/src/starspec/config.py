"""Tunable defaults.

Values can be overridden from a JSON file named by the ``STARSPEC_CONFIG``
environment variable; unknown keys are rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

from .errors import SchemaError

ENV_VAR = "STARSPEC_CONFIG"


@dataclass(frozen=True)
class Config:
    n_low: int = 3
    box_height: float = 5.0
    n_tail_factor: int = 10
    k_out: int = 64
    k_dict: int = 32
    tol_adjoint: float = 1e-8
    tol_products: float = 1e-4
    tol_euler: float = 1e-10
    tol_roundtrip: float = 1e-4
    plot_points: int = 401

    def updated(self, **overrides) -> "Config":
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **clean)

    def as_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | None = None) -> Config:
    """Defaults, updated from ``path`` or from the file named in ``STARSPEC_CONFIG``."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object")
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise SchemaError(f"unknown config keys: {', '.join(unknown)}")
    defaults = Config()
    for key, value in data.items():
        want = type(getattr(defaults, key))
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if want is int:
            ok = ok and isinstance(value, int)
        if not ok:
            raise SchemaError(f"config key {key} must be a {want.__name__}")
    return defaults.updated(**data)
