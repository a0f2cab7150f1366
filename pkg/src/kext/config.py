"""Run configuration: defaults < config file < ``KEXT_*`` environment < CLI flags."""

from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass, fields

from .dynsys import SQRT38

__all__ = ["RunConfig", "ConfigError", "load_config_file", "from_env"]

ENV_PREFIX = "KEXT_"


class ConfigError(ValueError):
    """Invalid configuration value (a usage error)."""


@dataclass
class RunConfig:
    p: float = SQRT38
    y_end: float = 50.0
    tol: float = 1e-10
    samples: int = 0            # 0: one CSV row per integrator step
    grid: int = 400
    p_min: float = 0.01
    p_max: float = 0.856
    denom_cap: int = 50
    r_min: float = 1.480473
    r_max: float = 1.507784
    n: int = 4096
    threads: int = 1
    out: str = "-"

    def validate(self):
        for name in ("tol",):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        for name in ("p", "p_min", "p_max"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ConfigError(f"{name} must lie in (0, 1], got {v!r}")
        if self.p_min >= self.p_max:
            raise ConfigError("p_min must be below p_max")
        if not math.isfinite(self.y_end):
            raise ConfigError("y_end must be finite")
        if self.grid < 2:
            raise ConfigError("grid must be at least 2")
        if self.samples < 0 or self.samples == 1:
            raise ConfigError("samples must be 0 or at least 2")
        if self.denom_cap < 1:
            raise ConfigError("denom_cap must be >= 1")
        if self.n < 16 or self.n % 2:
            raise ConfigError("n must be an even integer >= 16")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.out != "-":
            parent = os.path.dirname(os.path.abspath(self.out))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ConfigError(f"output directory {parent!r} is not writable")
        return self

    def updated(self, values):
        """Return a copy with ``values`` (strings or typed) applied."""
        known = {f.name: f for f in fields(self)}
        out = {}
        for key, raw in values.items():
            k = key.strip().lower().replace("-", "_")
            if k not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            out[k] = _coerce(known[k], raw)
        return dataclasses.replace(self, **out)

    def to_text(self):
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))


def _coerce(f, raw):
    if not isinstance(raw, str):
        return raw
    typ = {"float": float, "int": int, "str": str}[f.type]
    try:
        return typ(raw.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {f.name} = {raw!r}") from None


def load_config_file(path):
    """Read plain ``key = value`` lines (``#`` comments allowed)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_string("[kext]\n" + fh.read(), source=str(path))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    return dict(parser["kext"])


def from_env(environ=None):
    env = os.environ if environ is None else environ
    names = {f.name for f in fields(RunConfig)}
    out = {}
    for key, val in env.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in names:
                out[name] = val
    return out
