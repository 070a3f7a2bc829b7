"""Experiment configuration: a flat TOML-compatible subset.

Files are lines of `key = value` with `#` comments.  Values are strings,
integers, floats, booleans, or one-level arrays of those.  That covers every
experiment knob while keeping the parser dependency-free (the stdlib gained a
TOML reader only in 3.11) and round-trip exact: parse(dumps(d)) == d.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field as dc_field, asdict
from typing import Optional, Union

Scalar = Union[str, int, float, bool]

_KEY_RE = re.compile(r"^[A-Za-z0-9_\-]+$")

KNOWN_TASKS = (
    "steady", "spectrum", "decay", "poincare", "splitting", "lyapunov",
    "nash", "entropy", "interpolation", "ultracontractivity",
)


class ConfigError(ValueError):
    """Raised with the offending key named in the message."""


def _parse_scalar(tok: str, lineno: int) -> Scalar:
    tok = tok.strip()
    if tok.startswith('"'):
        if not tok.endswith('"') or len(tok) < 2:
            raise ConfigError(f"line {lineno}: unterminated string {tok!r}")
        body = tok[1:-1]
        return body.replace('\\"', '"').replace("\\\\", "\\")
    if tok == "true":
        return True
    if tok == "false":
        return False
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse value {tok!r}") from None


def _split_array(body: str, lineno: int) -> list:
    items, depth, cur, in_str = [], 0, "", False
    for ch in body:
        if ch == '"' and (not cur or cur[-1] != "\\"):
            in_str = not in_str
        if ch == "," and not in_str:
            items.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        items.append(cur)
    return [_parse_scalar(it, lineno) for it in items]


def parse_flat_toml(text: str) -> dict:
    """Parse the flat key/value subset into a plain dict."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            raise ConfigError(f"line {lineno}: tables are not supported")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, rest = line.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"line {lineno}: bad key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        value = rest.strip()
        # strip trailing comments outside strings
        if "#" in value and not value.startswith('"'):
            value = value.split("#", 1)[0].strip()
        if value.startswith("["):
            if not value.endswith("]"):
                raise ConfigError(f"line {lineno}: unterminated array")
            out[key] = _split_array(value[1:-1], lineno)
        else:
            out[key] = _parse_scalar(value, lineno)
    return out


def _format_scalar(v: Scalar) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    raise ConfigError(f"cannot serialize value of type {type(v).__name__}")


def dumps_flat_toml(d: dict) -> str:
    lines = []
    for key in d:
        if not _KEY_RE.match(str(key)):
            raise ConfigError(f"bad key {key!r}")
        v = d[key]
        if isinstance(v, (list, tuple)):
            lines.append(f"{key} = [" + ", ".join(_format_scalar(x) for x in v) + "]")
        else:
            lines.append(f"{key} = {_format_scalar(v)}")
    return "\n".join(lines) + "\n"


@dataclass
class ExperimentConfig:
    """Validated experiment description; field defaults are the common case."""

    name: str
    gamma: float
    dim: int = 1
    field: str = "canonical"          # canonical | rotated | expression
    scale: float = 1.0
    amplitude: float = 0.0            # swirl strength for rotated fields
    force_exprs: list = dc_field(default_factory=list)
    potential_expr: str = ""
    r0: float = 1.0
    L: float = 50.0
    n: int = 512
    tasks: list = dc_field(default_factory=lambda: ["steady"])
    # weight / norm selection
    weight_family: str = "polynomial"
    weight_k: float = 2.0
    weight_kappa: float = 0.5
    weight_s: float = 0.3
    p: float = 2.0
    theta: float = 1.0
    # time grid for evolution-based tasks
    t_min: float = 1e-3
    t_max: float = 10.0
    n_times: int = 40
    time_spacing: str = "geometric"   # geometric | linear
    dt0: float = 0.0                  # 0 -> automatic
    # initial data
    initial: str = "gaussian"         # gaussian | spike | heavy_tail
    initial_width: float = 1.0
    initial_power: float = 6.0        # heavy_tail: <x>^-power
    initial_center: float = 0.0
    # task-specific knobs
    sigma_fit: float = 0.0            # 0 -> stretched fit skipped in decay task
    rhs_power: float = -10.0          # sentinel: -10 -> default 2(gamma-1)
    zeta0: float = 0.1
    absorb_M: float = 0.0             # 0 -> calibrate automatically
    absorb_R: float = 0.0
    spectrum_count: int = 6
    seed: int = 0

    def validate(self) -> None:
        if not self.name or not _KEY_RE.match(self.name):
            raise ConfigError(f"config key 'name': need a slug, got {self.name!r}")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError(f"config key 'gamma': must lie in (0, 1), got {self.gamma}")
        if self.dim not in (1, 2):
            raise ConfigError(f"config key 'dim': must be 1 or 2, got {self.dim}")
        if self.field not in ("canonical", "rotated", "expression"):
            raise ConfigError(f"config key 'field': unknown family {self.field!r}")
        if self.field == "expression" and len(self.force_exprs) != self.dim:
            raise ConfigError(
                "config key 'force_exprs': expression fields need one entry per coordinate")
        if self.scale <= 0.0:
            raise ConfigError(f"config key 'scale': must be positive, got {self.scale}")
        if self.field == "rotated" and self.dim != 2:
            raise ConfigError("config key 'field': rotated fields need dim = 2")
        if self.L <= 0.0:
            raise ConfigError(f"config key 'L': must be positive, got {self.L}")
        if self.n < 2:
            raise ConfigError(f"config key 'n': need at least 2 cells, got {self.n}")
        for t in self.tasks:
            if t not in KNOWN_TASKS:
                raise ConfigError(f"config key 'tasks': unknown task {t!r}")
        if self.weight_family not in ("polynomial", "stretched", "critical"):
            raise ConfigError(
                f"config key 'weight_family': unknown family {self.weight_family!r}")
        if self.weight_family == "stretched" and not (0.0 < self.weight_s < self.gamma):
            raise ConfigError(
                f"config key 'weight_s': must lie in (0, gamma), got {self.weight_s}")
        if self.weight_family in ("stretched", "critical") and self.weight_kappa <= 0.0:
            raise ConfigError(
                f"config key 'weight_kappa': must be positive, got {self.weight_kappa}")
        if self.weight_family == "critical" and not (self.weight_kappa * self.gamma < 1.0):
            raise ConfigError(
                "config key 'weight_kappa': kappa * gamma must stay below 1 "
                f"for critical weights, got {self.weight_kappa * self.gamma}")
        if self.p < 1.0:
            raise ConfigError(f"config key 'p': must be at least 1, got {self.p}")
        if not (0.0 <= self.theta <= 1.0):
            raise ConfigError(f"config key 'theta': must lie in [0, 1], got {self.theta}")
        if not (0.0 < self.t_min < self.t_max):
            raise ConfigError(
                f"config key 't_min': need 0 < t_min < t_max, got {self.t_min}, {self.t_max}")
        if self.n_times < 2:
            raise ConfigError(f"config key 'n_times': need at least 2, got {self.n_times}")
        if self.time_spacing not in ("geometric", "linear"):
            raise ConfigError(
                f"config key 'time_spacing': unknown spacing {self.time_spacing!r}")
        if self.initial not in ("gaussian", "spike", "heavy_tail"):
            raise ConfigError(f"config key 'initial': unknown kind {self.initial!r}")
        if self.initial == "gaussian" and self.initial_width <= 0.0:
            raise ConfigError(
                f"config key 'initial_width': must be positive, got {self.initial_width}")
        if self.sigma_fit and not (0.0 < self.sigma_fit <= 1.0):
            raise ConfigError(
                f"config key 'sigma_fit': must lie in (0, 1], got {self.sigma_fit}")
        if self.spectrum_count < 1:
            raise ConfigError(
                f"config key 'spectrum_count': need at least 1, got {self.spectrum_count}")

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def config_from_dict(d: dict) -> ExperimentConfig:
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"config key {sorted(unknown)[0]!r}: not a recognized option")
    if "name" not in d:
        raise ConfigError("config key 'name': required")
    if "gamma" not in d:
        raise ConfigError("config key 'gamma': required")
    coerced = dict(d)
    for key in ("gamma", "scale", "amplitude", "r0", "L", "weight_k",
                "weight_kappa", "weight_s", "p", "theta", "t_min", "t_max",
                "dt0", "initial_width", "initial_power", "initial_center",
                "sigma_fit", "rhs_power", "zeta0", "absorb_M", "absorb_R"):
        if key in coerced and isinstance(coerced[key], int) \
                and not isinstance(coerced[key], bool):
            coerced[key] = float(coerced[key])
    for key in ("dim", "n", "n_times", "spectrum_count", "seed"):
        if key in coerced and not isinstance(coerced[key], int):
            raise ConfigError(f"config key {key!r}: must be an integer")
    for key in ("tasks", "force_exprs"):
        if key in coerced and not isinstance(coerced[key], list):
            coerced[key] = [coerced[key]]
    cfg = ExperimentConfig(**coerced)
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(parse_flat_toml(fh.read()))


def save_config(cfg: ExperimentConfig, path: str) -> None:
    d = cfg.to_dict()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_flat_toml(d))
