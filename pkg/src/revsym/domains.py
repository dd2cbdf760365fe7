"""Planar invariant domains, their reflection and its fixed locus.

Annulus points are stored in internal coordinates ``(x, y) = (angle, radius)``
with the angle measured from the positive vertical axis, so the Euclidean
picture is ``(y sin x, y cos x)``.  The reflection is always ``(x, y) -> (-x, y)``
in these coordinates, and the two fixed components sit at ``x = 0`` and
``x = pi``.  Disk and plane points are Euclidean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """A point was handed to an operation outside the domain it requires."""


class Point(NamedTuple):
    x: float
    y: float

    @classmethod
    def of(cls, p) -> "Point":
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"non-finite point ({x}, {y})")
        return cls(x, y)


class Kind(str, Enum):
    CLOSED_ANNULUS = "closed_annulus"
    OPEN_ANNULUS = "open_annulus"
    STRIP = "strip"
    CLOSED_DISK = "closed_disk"
    OPEN_DISK = "open_disk"
    CYLINDER = "cylinder"
    PLANE = "plane"


PERIODIC_KINDS = (Kind.CLOSED_ANNULUS, Kind.OPEN_ANNULUS, Kind.CYLINDER)
DISK_KINDS = (Kind.CLOSED_DISK, Kind.OPEN_DISK)


def wrap_angle(x):
    """Reduce to ``[0, 2pi)``."""
    return np.mod(x, TWO_PI)


def wrap_signed(x):
    """Reduce to ``[-pi, pi)``."""
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


@dataclass(frozen=True)
class LocusSegment:
    """One connected component of the reflection's fixed set: ``{x} x [y_lo, y_hi]``.

    Unbounded components carry infinite ``y_lo``/``y_hi``.
    """

    component_id: int
    x: float
    y_lo: float
    y_hi: float
    open_lo: bool = False
    open_hi: bool = False

    @property
    def endpoints(self) -> tuple[Point, Point]:
        return Point.of((self.x, self.y_lo)), Point.of((self.x, self.y_hi))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.y_lo) and math.isfinite(self.y_hi)

    def clipped(self, y_lo: float, y_hi: float) -> "LocusSegment":
        lo, hi = max(self.y_lo, y_lo), min(self.y_hi, y_hi)
        return LocusSegment(self.component_id, self.x, lo, hi,
                            self.open_lo and lo == self.y_lo,
                            self.open_hi and hi == self.y_hi)

    def sample(self, n: int) -> np.ndarray:
        if not self.bounded:
            raise DomainError("cannot sample an unbounded segment; clip it first")
        ys = np.linspace(self.y_lo, self.y_hi, n)
        return np.column_stack([np.full(n, self.x), ys])


@dataclass(frozen=True)
class InvariantDomain:
    """A model domain.  ``y_min``/``y_max`` bound the second coordinate for
    annulus, strip and cylinder kinds; ``radius`` is used by disks."""

    kind: Kind
    y_min: float = -math.inf
    y_max: float = math.inf
    radius: float = 1.0

    # -- construction -----------------------------------------------------
    @classmethod
    def closed_annulus(cls) -> "InvariantDomain":
        return cls(Kind.CLOSED_ANNULUS, 1.0, 2.0)

    @classmethod
    def open_annulus(cls) -> "InvariantDomain":
        return cls(Kind.OPEN_ANNULUS, 1.0, 2.0)

    @classmethod
    def strip(cls, y_min: float = 0.0, y_max: float = 1.0) -> "InvariantDomain":
        return cls(Kind.STRIP, y_min, y_max)

    @classmethod
    def cylinder(cls, y_min: float = -math.inf, y_max: float = math.inf) -> "InvariantDomain":
        return cls(Kind.CYLINDER, y_min, y_max)

    @classmethod
    def closed_disk(cls, radius: float = 1.0) -> "InvariantDomain":
        return cls(Kind.CLOSED_DISK, radius=radius)

    @classmethod
    def open_disk(cls, radius: float = 1.0) -> "InvariantDomain":
        return cls(Kind.OPEN_DISK, radius=radius)

    @classmethod
    def plane(cls) -> "InvariantDomain":
        return cls(Kind.PLANE)

    @classmethod
    def from_name(cls, name: str, **bounds) -> "InvariantDomain":
        kind = Kind(name)
        builders = {
            Kind.CLOSED_ANNULUS: cls.closed_annulus, Kind.OPEN_ANNULUS: cls.open_annulus,
            Kind.STRIP: cls.strip, Kind.CYLINDER: cls.cylinder,
            Kind.CLOSED_DISK: cls.closed_disk, Kind.OPEN_DISK: cls.open_disk,
            Kind.PLANE: cls.plane,
        }
        return builders[kind](**bounds)

    # -- basic structure --------------------------------------------------
    @property
    def periodic(self) -> bool:
        return self.kind in PERIODIC_KINDS

    @property
    def x_period(self) -> float | None:
        return TWO_PI if self.periodic else None

    @property
    def is_disk(self) -> bool:
        return self.kind in DISK_KINDS

    @property
    def is_open(self) -> bool:
        return self.kind in (Kind.OPEN_ANNULUS, Kind.OPEN_DISK)

    @property
    def bounded_y(self) -> bool:
        return math.isfinite(self.y_min) and math.isfinite(self.y_max)

    def describe(self) -> dict:
        out = {"kind": self.kind.value}
        if self.is_disk:
            out["radius"] = self.radius
        elif self.kind is not Kind.PLANE:
            out["y_min"], out["y_max"] = self.y_min, self.y_max
        return out

    # -- membership -------------------------------------------------------
    def contains_array(self, pts, interior: bool = False, margin: float = 1e-9) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        finite = np.isfinite(pts).all(axis=1)
        x, y = pts[:, 0], pts[:, 1]
        if self.kind is Kind.PLANE:
            return finite
        if self.is_disk:
            r = np.hypot(x, y)
            if interior:
                return finite & (r < self.radius - margin)
            if self.is_open:
                return finite & (r < self.radius)
            return finite & (r <= self.radius)
        if interior:
            return finite & (y > self.y_min + margin) & (y < self.y_max - margin)
        if self.is_open:
            return finite & (y > self.y_min) & (y < self.y_max)
        return finite & (y >= self.y_min) & (y <= self.y_max)

    def contains(self, p, interior: bool = False, margin: float = 1e-9) -> bool:
        p = Point.of(p)
        return bool(self.contains_array([p], interior, margin)[0])

    # -- reflection -------------------------------------------------------
    def reflect(self, p) -> Point:
        p = Point.of(p)
        if not self.contains(p):
            raise DomainError(f"{p} is outside the {self.kind.value} domain")
        x = -p.x
        if self.periodic:
            x = float(wrap_angle(x))
        return Point(x + 0.0, p.y)

    def fixed_locus(self) -> list[LocusSegment]:
        k = self.kind
        if k in (Kind.CLOSED_ANNULUS, Kind.OPEN_ANNULUS, Kind.CYLINDER):
            o = self.is_open
            return [LocusSegment(0, 0.0, self.y_min, self.y_max, o, o),
                    LocusSegment(1, math.pi, self.y_min, self.y_max, o, o)]
        if self.is_disk:
            o = self.is_open
            return [LocusSegment(0, 0.0, -self.radius, self.radius, o, o)]
        return [LocusSegment(0, 0.0, self.y_min, self.y_max)]

    def component_of(self, p, tol: float = 1e-9) -> int | None:
        """Index of the fixed-locus component containing ``p``, if any."""
        p = Point.of(p)
        for seg in self.fixed_locus():
            dx = float(wrap_signed(p.x - seg.x)) if self.periodic else p.x - seg.x
            if abs(dx) <= tol and seg.y_lo - tol <= p.y <= seg.y_hi + tol:
                if self.is_disk and abs(p.y) > self.radius + tol:
                    continue
                return seg.component_id
        return None

    # -- metric helpers ---------------------------------------------------
    def difference(self, a, b) -> np.ndarray:
        """``a - b`` with the angular coordinate wrapped on periodic kinds."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if self.periodic:
            d = d.copy()
            d[..., 0] = wrap_signed(d[..., 0])
        return d

    def distance(self, a, b) -> np.ndarray:
        return np.linalg.norm(self.difference(a, b), axis=-1)

    def sample_window(self) -> tuple[float, float, float, float]:
        """Bounding box used for sampling: ``(x_lo, x_hi, y_lo, y_hi)``."""
        if self.is_disk:
            r = self.radius
            return (-r, r, -r, r)
        if self.kind is Kind.PLANE:
            return (-2.0, 2.0, -2.0, 2.0)
        y_lo = self.y_min if math.isfinite(self.y_min) else -math.pi
        y_hi = self.y_max if math.isfinite(self.y_max) else math.pi
        if self.periodic:
            return (0.0, TWO_PI, y_lo, y_hi)
        return (-math.pi, math.pi, y_lo, y_hi)

    def halton(self, n: int, window=None) -> np.ndarray:
        """Deterministic low-discrepancy points inside the domain."""
        u = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
        if self.is_disk:
            r = self.radius * np.sqrt(u[:, 0])
            t = TWO_PI * u[:, 1]
            return np.column_stack([r * np.cos(t), r * np.sin(t)])
        x_lo, x_hi, y_lo, y_hi = window if window is not None else self.sample_window()
        return np.column_stack([x_lo + (x_hi - x_lo) * u[:, 0], y_lo + (y_hi - y_lo) * u[:, 1]])

    # -- covering ---------------------------------------------------------
    def quotient(self) -> "InvariantDomain":
        """The cylinder a strip covers (``x`` taken mod ``2pi``)."""
        if self.kind is not Kind.STRIP:
            raise DomainError("only a strip has a quotient cylinder")
        return InvariantDomain.cylinder(self.y_min, self.y_max)

    def covering_strip(self) -> "InvariantDomain":
        if not self.periodic:
            raise DomainError("only annulus and cylinder kinds are covered by a strip")
        return InvariantDomain.strip(self.y_min, self.y_max)


def reflect_xy(pts) -> np.ndarray:
    """The reflection on raw (lifted) coordinates, vectorized."""
    out = np.array(pts, dtype=float)
    out[..., 0] = -out[..., 0]
    return out


def shifted_reflection(c: float):
    """Reflection about the vertical line ``x = c`` on the covering strip."""
    def reflect(pts):
        out = np.array(pts, dtype=float)
        out[..., 0] = 2.0 * c - out[..., 0]
        return out
    return reflect


def lift_point(p) -> Point:
    """Section of the covering ``strip -> annulus``: the representative with x in ``[0, 2pi)``."""
    p = Point.of(p)
    return Point(float(wrap_angle(p.x)), p.y)


def project_point(p) -> Point:
    """Covering projection; only the angle is reduced."""
    p = Point.of(p)
    return Point(float(wrap_angle(p.x)), p.y)


def annulus_to_euclidean(pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    return np.stack([y * np.sin(x), y * np.cos(x)], axis=-1)


def euclidean_to_annulus(pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    u, v = pts[..., 0], pts[..., 1]
    return np.stack([wrap_angle(np.arctan2(u, v)), np.hypot(u, v)], axis=-1)
