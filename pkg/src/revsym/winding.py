"""Variation of angle between paths and the fixed-point index built on it.

A path is either a :class:`Polyline` (piecewise linear in its vertex index)
or a callable ``t -> points`` on ``[0, 1]``.  For two paths ``delta`` and
``gamma`` the variation of angle is the total turning of ``gamma(t) - delta(t)``
divided by ``2 pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .domains import reflect_xy
from .revmaps import MapSpec

SEP_MIN = 1e-12
MAX_DEPTH = 40
BASE_SAMPLES = 256


class WindingError(ValueError):
    """Colliding paths, a loop through a fixed point, or failed refinement."""


@dataclass(frozen=True, eq=False)
class Polyline:
    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if not np.isfinite(pts).all():
            raise ValueError("polyline points must be finite")
        if self.closed and len(pts) > 2 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 2:
            raise ValueError("a polyline needs at least two points")
        steps = np.diff(pts, axis=0)
        if (np.abs(steps).max(axis=1) == 0).any():
            raise ValueError("consecutive polyline points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[0] if self.closed else self.points[-1]

    def vertices(self) -> np.ndarray:
        """Vertex list with the closing vertex repeated for loops."""
        return np.vstack([self.points, self.points[:1]]) if self.closed else self.points

    def reversed(self) -> "Polyline":
        if self.closed:
            return Polyline(np.vstack([self.points[:1], self.points[:0:-1]]), True)
        return Polyline(self.points[::-1], False)

    def mapped(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Polyline":
        return Polyline(fn(np.asarray(self.points)), self.closed)

    def reflected(self) -> "Polyline":
        return self.mapped(reflect_xy)

    def at(self, t) -> np.ndarray:
        """Evaluate the uniform-in-index parametrization on ``[0, 1]``."""
        verts = self.vertices()
        u = np.clip(np.asarray(t, dtype=float), 0.0, 1.0) * (len(verts) - 1)
        k = np.minimum(np.floor(u).astype(int), len(verts) - 2)
        w = (u - k)[..., None]
        return (1 - w) * verts[k] + w * verts[k + 1]


Path = Union[Polyline, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class IndexValue:
    value: float
    is_integer_certified: bool

    @property
    def integer(self) -> int:
        if not self.is_integer_certified:
            raise WindingError(f"value {self.value} is not certified as an integer")
        return int(round(self.value))


def catenate(a: Polyline, b: Polyline, tol: float = 1e-12) -> Polyline:
    """``a * b``: traverse ``a`` then ``b``; the end of ``a`` must be the start of ``b``."""
    if a.closed or b.closed:
        raise ValueError("only open paths can be catenated")
    if np.linalg.norm(a.end - b.start) > tol:
        raise ValueError("paths do not join")
    return Polyline(np.vstack([a.points, b.points[1:]]), False)


def _common_grid(delta: Polyline, gamma: Polyline) -> tuple[np.ndarray, np.ndarray]:
    if delta.closed != gamma.closed:
        raise WindingError("cannot pair a loop with an open path")
    nd, ng = len(delta.vertices()), len(gamma.vertices())
    if nd == ng:
        return delta.vertices(), gamma.vertices()
    t = np.union1d(np.linspace(0, 1, nd), np.linspace(0, 1, ng))
    return delta.at(t), gamma.at(t)


def _turning(v: np.ndarray) -> np.ndarray:
    a, b = v[:-1], v[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = (a * b).sum(axis=1)
    return np.arctan2(cross, dot)


def _segment_clearance(v: np.ndarray) -> float:
    """Smallest distance from the origin to the segments joining consecutive rows."""
    a, b = v[:-1], v[1:]
    d = b - a
    dd = (d * d).sum(axis=1)
    t = np.clip(-(a * d).sum(axis=1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    return float(np.linalg.norm(a + t[:, None] * d, axis=1).min())


def _certify(total: float, closed: bool) -> IndexValue:
    value = total / (2 * math.pi)
    return IndexValue(value, closed and abs(value - round(value)) < 1e-6)


def _adaptive(diff: Callable[[np.ndarray], np.ndarray], closed: bool,
              n_samples: int, sep_min: float) -> IndexValue:
    t = np.linspace(0.0, 1.0, n_samples + 1)
    v = diff(t)
    for _ in range(MAX_DEPTH):
        if not np.isfinite(v).all():
            raise WindingError("path difference is undefined (non-finite values)")
        norms = np.linalg.norm(v, axis=1)
        if (norms <= sep_min).any():
            k = int(np.argmin(norms))
            raise WindingError(f"paths meet near parameter t={t[k]:.6g} (separation {norms[k]:.3e})")
        inc = _turning(v)
        bad = np.abs(inc) >= 0.5 * math.pi
        if not bad.any():
            return _certify(float(inc.sum()), closed)
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        t_new = np.concatenate([t, mids])
        order = np.argsort(t_new, kind="stable")
        t = t_new[order]
        v = np.vstack([v, diff(mids)])[order]
    raise WindingError(f"angle refinement exceeded depth {MAX_DEPTH}")


def angle_variation(delta: Path, gamma: Path, *, closed: bool | None = None,
                    n_samples: int = BASE_SAMPLES, sep_min: float = SEP_MIN) -> IndexValue:
    """Total turning of ``gamma - delta`` in units of full turns.

    Polylines are handled exactly: the difference of two linear segments is a
    segment, whose turning is a single ``atan2``.  Callables are sampled and
    refined by bisection until every step turns by less than a quarter turn.
    """
    if isinstance(delta, Polyline) and isinstance(gamma, Polyline):
        d, g = _common_grid(delta, gamma)
        v = g - d
        if not np.isfinite(v).all():
            raise WindingError("path difference is undefined (non-finite values)")
        if _segment_clearance(v) <= sep_min:
            raise WindingError("paths meet")
        return _certify(float(_turning(v).sum()), delta.closed)
    if closed is None:
        closed = any(isinstance(p, Polyline) and p.closed for p in (delta, gamma))
    fd = delta.at if isinstance(delta, Polyline) else delta
    fg = gamma.at if isinstance(gamma, Polyline) else gamma
    return _adaptive(lambda t: fg(t) - fd(t), closed, n_samples, sep_min)


def displacement_index(f: MapSpec, path: Path, *, closed: bool,
                       n_samples: int = BASE_SAMPLES, sep_min: float = SEP_MIN) -> IndexValue:
    """``i(path, f o path)``."""
    at = path.at if isinstance(path, Polyline) else path

    def diff(t):
        p = at(t)
        return f(p) - p

    try:
        return _adaptive(diff, closed, n_samples, sep_min)
    except WindingError as exc:
        if "meet" in str(exc):
            raise WindingError(f"path passes through a fixed point of {f.name}: {exc}") from None
        raise


def circle(center, radius: float) -> Callable[[np.ndarray], np.ndarray]:
    cx, cy = float(center[0]), float(center[1])

    def at(t):
        a = 2 * math.pi * np.asarray(t, dtype=float)
        return np.column_stack([cx + radius * np.cos(a), cy + radius * np.sin(a)])

    return at


def fixed_point_index(f: MapSpec, z, radius: float = 1e-3, n_samples: int = BASE_SAMPLES,
                      sep_min: float = SEP_MIN) -> IndexValue:
    """Index of an isolated interior fixed point: turning of ``f(p) - p`` on a small
    counter-clockwise circle about ``z``."""
    if not f.domain.contains(z, interior=True, margin=radius):
        raise WindingError(f"{tuple(z)} is not an interior point at radius {radius}")
    return displacement_index(f, circle(z, radius), closed=True, n_samples=n_samples,
                              sep_min=sep_min)


def loop_index(f: MapSpec, loop: Polyline, n_samples: int = BASE_SAMPLES,
               sep_min: float = SEP_MIN) -> IndexValue:
    """``i(loop, f o loop)`` for a closed loop missing the fixed set of ``f``."""
    if not loop.closed:
        raise WindingError("loop_index needs a closed loop")
    return displacement_index(f, loop, closed=True, n_samples=n_samples, sep_min=sep_min)


def mirror_loop(loop: Polyline) -> Polyline:
    """``I o reversed(loop)``: the reflected loop, traversed so it keeps its orientation."""
    return loop.reversed().reflected()


def mirror_index_check(f: MapSpec, loop: Polyline,
                       n_samples: int = BASE_SAMPLES) -> tuple[IndexValue, IndexValue]:
    """Indices of ``loop`` and of its mirror image.  They agree for reversible maps
    isotopic to the identity and are opposite for those isotopic to the reflection."""
    return loop_index(f, loop, n_samples), loop_index(f, mirror_loop(loop), n_samples)
