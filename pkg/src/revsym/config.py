"""Run configuration: a strict TOML schema mapped onto dataclasses.

Example::

    command = "spectrum"

    [map]
    family = "twist"
    params = { a = "2*pi*(y - 1/4)" }

    [numeric]
    q_max = 6

    [output]
    directory = "out/spectrum"
    formats = ["json"]

Unknown keys are errors, reported with the line and column of the key.
"""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .domains import DomainError, InvariantDomain
from .revmaps import BUILTINS, MapError, MapFlags, MapSpec, builtin, from_expressions

COMMANDS = ("validate", "symmlines", "orbits", "twist", "spectrum", "census", "index")
FORMATS = ("json", "csv", "svg")
N_MAX_CAP = 32


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class MapConfig:
    family: str | None = None
    params: dict = field(default_factory=dict)
    x: str | None = None
    y: str | None = None
    inverse_x: str | None = None
    inverse_y: str | None = None
    x_period: float | None = None
    isotopic_to_identity: bool = True
    area_preserving: bool = True
    orientation_preserving: bool = True
    name: str = "expression"


@dataclass
class DomainConfig:
    kind: str = "cylinder"
    y_min: float | None = None
    y_max: float | None = None
    radius: float | None = None


@dataclass
class NumericConfig:
    N_max: int = 12
    N_min: int = 2
    q_max: int = 6
    m: list[int] = field(default_factory=lambda: [0, 6])
    resolution: int = 400
    n_samples: int = 10_000
    line_tol: float = 1e-8
    orbit_tol: float = 1e-10
    validation_tol: float = 1e-10
    area_tol: float = 1e-8
    seed: int = 0
    center: list[float] | None = None
    radius: float = 1e-3


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: list[str] = field(default_factory=lambda: list(FORMATS))


@dataclass
class RunConfig:
    command: str
    map: MapConfig
    domain: DomainConfig | None = None
    numeric: NumericConfig = field(default_factory=NumericConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: str = ""

    def build_map(self) -> MapSpec:
        return build_map(self.map, self.domain)


_SECTIONS = {"map": MapConfig, "domain": DomainConfig, "numeric": NumericConfig,
             "output": OutputConfig}


def _locate(text: str, key: str, section: str | None = None) -> tuple[int | None, int | None]:
    """Line and column of ``key`` in the TOML text, preferring its own table."""
    lines = text.splitlines()
    start = 0
    if section:
        header = re.compile(rf"^\s*\[\s*{re.escape(section)}\s*\]")
        for i, line in enumerate(lines):
            if header.match(line):
                start = i
                break
    pat = re.compile(rf"(^|[\s{{,.])({re.escape(key)})\s*=|^\s*\[\s*({re.escape(key)})\s*\]")
    for i in list(range(start, len(lines))) + list(range(0, start)):
        m = pat.search(lines[i])
        if m:
            group = 2 if m.group(2) is not None else 3
            return i + 1, m.start(group) + 1
    return None, None


def _fail(text: str, message: str, key: str, section: str | None = None):
    line, col = _locate(text, key, section)
    raise ConfigError(message, line, col)


def _coerce(text: str, section: str, cls, table: dict):
    if not isinstance(table, dict):
        _fail(text, f"[{section}] must be a table", section)
    known = {f.name: f for f in fields(cls)}
    for key in table:
        if key not in known:
            _fail(text, f"unknown key '{key}' in [{section}]; allowed: {sorted(known)}",
                  key, section)
    obj = cls(**table)
    for name, f in known.items():
        value = getattr(obj, name)
        if value is None:
            continue
        typ = str(f.type)
        if typ.startswith("float") and not isinstance(value, (int, float)) or \
                typ.startswith("int") and (isinstance(value, bool) or not isinstance(value, int)) or \
                typ.startswith("str") and not isinstance(value, str) or \
                typ == "bool" and not isinstance(value, bool):
            _fail(text, f"[{section}] {name} has the wrong type ({type(value).__name__})",
                  name, section)
        if typ.startswith("float") and not isinstance(value, bool):
            setattr(obj, name, float(value))
    return obj


def _parse_m(text: str, value) -> list[int]:
    if isinstance(value, str):
        m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", value)
        if not m:
            _fail(text, f"m range must look like '0..6', got {value!r}", "m", "numeric")
        return [int(m.group(1)), int(m.group(2))]
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value):
        return list(value)
    _fail(text, "m must be a two-element integer list or a string 'lo..hi'", "m", "numeric")


def parse_m_range(value: str) -> list[int]:
    return _parse_m("", value)


def check_numeric(text: str, num: NumericConfig):
    for name in ("line_tol", "orbit_tol", "validation_tol", "area_tol", "radius"):
        v = getattr(num, name)
        if not (v > 0 and math.isfinite(v)):
            _fail(text, f"{name} must be positive, got {v}", name, "numeric")
    for name in ("N_max", "N_min", "q_max", "resolution", "n_samples"):
        if getattr(num, name) < 1:
            _fail(text, f"{name} must be at least 1", name, "numeric")
    if num.N_max > N_MAX_CAP:
        _fail(text, f"N_max={num.N_max} exceeds the cap {N_MAX_CAP}", "N_max", "numeric")
    if num.N_min > num.N_max:
        _fail(text, "N_min must not exceed N_max", "N_min", "numeric")
    lo, hi = num.m
    if lo < 0 or hi < lo:
        _fail(text, f"bad m range {lo}..{hi}", "m", "numeric")
    if num.resolution < 3:
        _fail(text, "resolution must be at least 3", "resolution", "numeric")
    if num.center is not None:
        if len(num.center) != 2 or not all(isinstance(v, (int, float)) for v in num.center):
            _fail(text, "center must be [x, y]", "center", "numeric")
        num.center = [float(v) for v in num.center]


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        raise ConfigError(f"malformed TOML: {exc}",
                          int(m.group(1)) if m else None, int(m.group(2)) if m else None) from None
    for key in raw:
        if key != "command" and key not in _SECTIONS:
            _fail(text, f"unknown top-level key '{key}'", key)
    if "command" not in raw:
        raise ConfigError("missing 'command'", 1, 1)
    command = raw["command"]
    if command not in COMMANDS:
        _fail(text, f"unknown command {command!r}; choose one of {list(COMMANDS)}", "command")
    if "map" not in raw:
        raise ConfigError("missing [map] table", 1, 1)

    numeric_raw = dict(raw.get("numeric", {}))
    if "m" in numeric_raw:
        numeric_raw["m"] = _parse_m(text, numeric_raw["m"])
    mp = _coerce(text, "map", MapConfig, raw["map"])
    dom = _coerce(text, "domain", DomainConfig, raw["domain"]) if "domain" in raw else None
    num = _coerce(text, "numeric", NumericConfig, numeric_raw)
    out = _coerce(text, "output", OutputConfig, raw.get("output", {}))

    if not isinstance(mp.params, dict):
        _fail(text, "[map] params must be a table", "params", "map")
    if not isinstance(out.formats, list):
        _fail(text, "formats must be a list of strings", "formats", "output")
    if (mp.family is None) == (mp.x is None or mp.y is None):
        _fail(text, "[map] needs either 'family' or both 'x' and 'y' expressions",
              "family" if mp.family else "map")
    if mp.family is not None and mp.family not in BUILTINS:
        _fail(text, f"unknown map family {mp.family!r}; known: {sorted(BUILTINS)}", "family", "map")
    if (mp.inverse_x is None) != (mp.inverse_y is None):
        _fail(text, "give both inverse_x and inverse_y or neither", "inverse_x", "map")
    check_numeric(text, num)
    bad = [f for f in out.formats if f not in FORMATS]
    if bad or not out.formats:
        _fail(text, f"formats must be a non-empty subset of {list(FORMATS)}", "formats", "output")

    cfg = RunConfig(command, mp, dom, num, out, text)
    try:
        cfg.build_map()
    except (MapError, DomainError, ValueError, TypeError) as exc:
        key = "params" if mp.family else "x"
        _fail(text, f"cannot build map: {exc}", key, "map")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def build_domain(dc: DomainConfig) -> InvariantDomain:
    bounds = {k: v for k, v in (("y_min", dc.y_min), ("y_max", dc.y_max), ("radius", dc.radius))
              if v is not None}
    return InvariantDomain.from_name(dc.kind, **bounds)


def build_map(mc: MapConfig, dc: DomainConfig | None) -> MapSpec:
    domain = build_domain(dc) if dc is not None else None
    if mc.family is not None:
        params = dict(mc.params)
        if domain is not None:
            if mc.family != "twist":
                raise MapError(f"{mc.family} fixes its own domain; drop the [domain] table")
            params["domain"] = domain
        return builtin(mc.family, **params)
    if domain is None:
        raise MapError("an expression map needs a [domain] table")
    flags = MapFlags(mc.isotopic_to_identity, mc.area_preserving, mc.orientation_preserving)
    inverse = (mc.inverse_x, mc.inverse_y) if mc.inverse_x is not None else None
    return from_expressions(mc.x, mc.y, domain, inverse=inverse, flags=flags, name=mc.name,
                            x_period=mc.x_period)
