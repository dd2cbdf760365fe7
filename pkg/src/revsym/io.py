"""File formats: CSV polylines, JSON documents with lossless reals, and SVG plots.

All writers are deterministic: identical inputs give byte-identical files.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domains import TWO_PI, InvariantDomain

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# JSON

def _real(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if not any(c in text for c in ".eE"):
        text += ".0"
    return text


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _real(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + _emit(v, indent, level + 1)
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every real written to 17 significant digits."""
    return _emit(obj, indent, 0) + "\n"


def loads(text: str):
    return json.loads(text)


@dataclass
class OrbitCatalogDocument:
    map: dict
    domain: dict
    orbits: list[dict]
    warnings: list[str] = field(default_factory=list)
    tool_version: str = TOOL_VERSION
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_catalog(cls, f, catalog) -> "OrbitCatalogDocument":
        return cls(f.describe(), f.domain.describe(), [o.as_dict() for o in catalog.orbits],
                   list(catalog.warnings))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "map": self.map,
            "domain": self.domain,
            "orbits": self.orbits,
            "warnings": self.warnings,
        }

    def emit(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str) -> "OrbitCatalogDocument":
        d = loads(text)
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        return cls(d["map"], d["domain"], d["orbits"], d.get("warnings", []),
                   d.get("tool_version", TOOL_VERSION), d["schema_version"])


# ---------------------------------------------------------------------------
# CSV polylines

def polyline_csv(pieces, closed: bool = False, meta: dict | None = None) -> str:
    """Two-column text: ``#`` comment lines, a header ``x,y``, then rows.
    Several pieces are separated by ``# piece=k`` comments."""
    lines = [f"# closed={'true' if closed else 'false'}"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}={v}")
    lines.append("x,y")
    pieces = [np.asarray(p, dtype=float) for p in pieces]
    for idx, pts in enumerate(pieces):
        if len(pieces) > 1:
            lines.append(f"# piece={idx}")
        lines.extend(f"{_real(x)},{_real(y)}" for x, y in pts)
    return "\n".join(lines) + "\n"


def parse_polyline_csv(text: str) -> tuple[list[np.ndarray], dict]:
    meta: dict[str, str] = {}
    pieces: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("piece="):
                if current:
                    pieces.append(current)
                current = []
            elif "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        if not header_seen:
            if line.replace(" ", "") != "x,y":
                raise ValueError(f"expected header 'x,y', got {line!r}")
            header_seen = True
            continue
        x, y = line.split(",")
        current.append((float(x), float(y)))
    if current:
        pieces.append(current)
    return [np.array(p, dtype=float).reshape(-1, 2) for p in pieces], meta


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def census_csv(census) -> str:
    rows = ["N,count_all,count_odd,count_interior"]
    rows += [f"{r.max_period},{r.count_all},{r.count_odd},{r.count_interior}" for r in census.rows]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# SVG

PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d",
           "#666666", "#1f78b4", "#b2df8a")
CANVAS = 640
MARGIN = 40


def _view_box(domain: InvariantDomain, window=None):
    if domain.is_disk:
        r = domain.radius
        return -r, r, -r, r
    x_lo, x_hi, y_lo, y_hi = domain.sample_window()
    if window is not None:
        y_lo, y_hi = window
    return x_lo, x_hi, y_lo, y_hi


def _split_wrapped(pts: np.ndarray, periodic: bool) -> list[np.ndarray]:
    if not periodic or len(pts) == 0:
        return [pts]
    w = pts.copy()
    w[:, 0] = np.mod(w[:, 0], TWO_PI)
    cut = np.flatnonzero(np.abs(np.diff(w[:, 0])) > math.pi) + 1
    return [seg for seg in np.split(w, cut) if len(seg) >= 2]


def emit_svg(lines, orbits, domain: InvariantDomain, window=None, title: str = "") -> str:
    """Symmetry lines as paths and orbit seeds as labelled markers."""
    x_lo, x_hi, y_lo, y_hi = _view_box(domain, window)
    sx = (CANVAS - 2 * MARGIN) / (x_hi - x_lo)
    sy = (CANVAS - 2 * MARGIN) / (y_hi - y_lo)

    def px(x, y):
        return MARGIN + (x - x_lo) * sx, CANVAS - MARGIN - (y - y_lo) * sy

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<title>{title}</title>' if title else "",
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{CANVAS - 2 * MARGIN}" '
        f'height="{CANVAS - 2 * MARGIN}" fill="none" stroke="black" stroke-width="1"/>',
        f'<text x="{MARGIN}" y="{CANVAS - MARGIN / 3:.1f}" font-size="11">x: [{x_lo:.4g}, {x_hi:.4g}]'
        f'  y: [{y_lo:.4g}, {y_hi:.4g}]</text>',
    ]
    periodic = domain.periodic
    for idx, line in enumerate(sorted(lines, key=lambda L: L.m)):
        colour = PALETTE[line.m % len(PALETTE)]
        parts = []
        for piece in line.pieces:
            for seg in _split_wrapped(np.asarray(piece.points), periodic):
                pts = [px(x, y) for x, y in seg]
                parts.append("M" + " L".join(f"{a:.3f},{b:.3f}" for a, b in pts))
        out.append(f'<path class="line m{line.m}" d="{" ".join(parts)}" fill="none" '
                   f'stroke="{colour}" stroke-width="1"/>')
        ly = MARGIN + 14 * (idx + 1)
        out.append(f'<text class="legend" x="{CANVAS - MARGIN + 4}" y="{ly}" font-size="11" '
                   f'fill="{colour}">m={line.m}</text>')
    for o in orbits:
        x, y = o.seed.x, o.seed.y
        if periodic:
            x = x % TWO_PI
        a, b = px(x, y)
        out.append(f'<circle class="orbit" cx="{a:.3f}" cy="{b:.3f}" r="3" fill="black"/>')
        out.append(f'<text class="period" x="{a + 4:.3f}" y="{b - 4:.3f}" font-size="9">{o.period}</text>')
    out.append("</svg>")
    return "\n".join(s for s in out if s) + "\n"
