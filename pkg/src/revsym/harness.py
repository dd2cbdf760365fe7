"""Finite, falsifiable checks of the symmetric fixed-point theorems.

Each function turns an existence statement into something a computer can
confirm or contradict: a witness point on a grid, a certified orbit, or a
count that should grow.  When a predicted object is not found the caller
gets a :class:`FalsificationCandidate` with diagnostics instead of silence.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .domains import TWO_PI, Kind, Point, shifted_reflection, wrap_signed
from .revmaps import MapSpec, ValidationReport
from .symmlines import (ORBIT_TOL, NoRootsError, RefinementError, SymmetricOrbit, base_lines,
                        certify_orbit, find_symmetric_periodic_points, intersect_lines,
                        refine_candidates)


class FalsificationCandidate(RuntimeError):
    """A theorem predicts an object the numerics could not find."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ---------------------------------------------------------------------------
# lifts

@dataclass(frozen=True)
class LiftedMap:
    """A map of the strip ``R x [y_lo, y_hi]`` commuting with ``x -> x + 2pi``."""

    F: MapSpec
    y_lo: float = 0.0
    y_hi: float = 1.0

    @classmethod
    def of(cls, f: MapSpec) -> "LiftedMap":
        d = f.domain
        lo = d.y_min if math.isfinite(d.y_min) else f.base_window()[0]
        hi = d.y_max if math.isfinite(d.y_max) else f.base_window()[1]
        return cls(f, lo, hi)

    def __call__(self, pts):
        return self.F(pts)

    def F1(self, pts) -> np.ndarray:
        return np.asarray(self.F(pts))[..., 0]

    def F2(self, pts) -> np.ndarray:
        return np.asarray(self.F(pts))[..., 1]

    def check_equivariance(self, n_samples: int = 2_000, tol: float = 1e-10) -> ValidationReport:
        u = np.linspace(0.0, 1.0, n_samples)
        pts = np.column_stack([TWO_PI * u * 3.7 - 5.0, self.y_lo + (self.y_hi - self.y_lo) * u[::-1]])
        shift = np.array([TWO_PI, 0.0])
        res = np.linalg.norm(self.F(pts + shift) - self.F(pts) - shift, axis=1)
        k = int(np.argmax(res))
        return ValidationReport("equivariance", float(res[k]), n_samples, tol, Point.of(pts[k]))


# ---------------------------------------------------------------------------
# twist criterion

@dataclass
class ComponentVerdict:
    component_id: int
    x: float
    intersects: bool
    interior: bool
    witness: Point | None
    fixed_points: list[Point] = field(default_factory=list)
    crossings: list[float] = field(default_factory=list)


@dataclass
class BoundaryTwist:
    lower_min: float
    lower_max: float
    upper_min: float
    upper_max: float

    @property
    def lower(self) -> float:
        return self.lower_min

    @property
    def upper(self) -> float:
        return self.upper_max

    @property
    def satisfied(self) -> bool:
        return self.lower_max < 0.0 < self.upper_min


@dataclass
class TwistReport:
    components: list[ComponentVerdict]
    boundary: BoundaryTwist | None = None

    @property
    def all_intersect(self) -> bool:
        return all(c.intersects for c in self.components)


def _displacement_roots(delta, lo: float, hi: float, n: int, periodic: bool) -> list[float]:
    ys = np.linspace(lo, hi, n)
    d = delta(ys)
    roots = list(ys[d == 0.0])
    sign = np.sign(d)
    change = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    if periodic:
        change = change[np.abs(np.diff(d))[change] < math.pi]
    for k in change:
        roots.append(brentq(lambda y: float(delta(np.array([y]))[0]), ys[k], ys[k + 1],
                            xtol=1e-15, rtol=1e-15, maxiter=200))
    return sorted({float(r) for r in roots})


def twist_criterion(f: MapSpec, n_samples: int = 2001, tol: float = ORBIT_TOL,
                    max_depth: int = 4) -> TwistReport:
    """For each fixed-locus component ``Y``, test ``f(Y) n Y`` and look for a fixed point on ``Y``.

    ``f(Y)`` meets ``Y`` exactly where the image of a point of ``Y`` has
    angular displacement zero.  Such a point is fixed or symmetric of
    period two; in the second case the fixed point is searched for on the
    piece of ``Y`` between the point and its image.
    """
    g = f.on_quotient()
    periodic = g.lattice[0] is not None
    lo_w, hi_w = g.base_window()
    verdicts = []
    for seg in g.domain.fixed_locus():
        lo, hi = (seg.y_lo, seg.y_hi) if seg.bounded else (lo_w, hi_w)
        c = seg.x

        def delta(ys, c=c):
            img = g(np.column_stack([np.full(len(ys), c), ys]))
            dx = img[:, 0] - c
            return wrap_signed(dx) if periodic else dx

        def fixed_residual(y, c=c):
            w = np.array([c, y])
            d = g(w) - w
            if periodic:
                d[0] = wrap_signed(d[0])
            return float(np.linalg.norm(d))

        roots = _displacement_roots(delta, lo, hi, n_samples, periodic)
        fixed = []
        pending = [(y, 0) for y in roots]
        seen = set()
        while pending:
            y, depth = pending.pop(0)
            key = round(y, 12)
            if key in seen:
                continue
            seen.add(key)
            if fixed_residual(y) <= tol:
                fixed.append(y)
                continue
            if depth >= max_depth:
                continue
            y_img = float(g(np.array([c, y]))[1])
            a, b = sorted((y, y_img))
            if b - a <= 1e-14:
                continue
            for r in _displacement_roots(delta, a, b, n_samples, periodic):
                pending.append((r, depth + 1))
        fixed = sorted(set(fixed))
        interior_pts = [y for y in fixed
                        if g.domain.contains((c, y), interior=True)]
        crossing_interior = any(
            g.domain.contains(g(np.array([c, y])), interior=True) for y in roots)
        witness_y = interior_pts[0] if interior_pts else (fixed[0] if fixed else None)
        verdicts.append(ComponentVerdict(
            component_id=seg.component_id,
            x=c,
            intersects=bool(roots),
            interior=crossing_interior,
            witness=None if witness_y is None else Point(c, witness_y),
            fixed_points=[Point(c, y) for y in fixed],
            crossings=list(roots),
        ))
    report = TwistReport(verdicts)
    if periodic and g.domain.bounded_y:
        report.boundary = boundary_twist(LiftedMap.of(g))
    return report


def boundary_twist(F: LiftedMap, n_grid: int = 4096, check: bool = True) -> BoundaryTwist:
    """Extremes of the boundary displacements ``F1(x, y) - x`` over one period."""
    if check:
        rep = F.check_equivariance()
        if not rep.passed:
            raise ValueError(f"lift is not 2pi-equivariant (residual {rep.max_residual:.3e})")
    xs = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
    low = F.F1(np.column_stack([xs, np.full(n_grid, F.y_lo)])) - xs
    up = F.F1(np.column_stack([xs, np.full(n_grid, F.y_hi)])) - xs
    return BoundaryTwist(float(low.min()), float(low.max()), float(up.min()), float(up.max()))


# ---------------------------------------------------------------------------
# rotation numbers and the rational spectrum

def rotation_number(F: LiftedMap, p, n_iter: int) -> float:
    """Average angular advance per step over ``n_iter`` steps, in turns."""
    q = np.asarray(p, dtype=float)
    x0 = q[0]
    for _ in range(n_iter):
        q = F(q)
        if not (F.y_lo - 1e-12 <= q[1] <= F.y_hi + 1e-12):
            raise ValueError(f"orbit of {tuple(p)} left the band [{F.y_lo}, {F.y_hi}]")
    return float((q[0] - x0) / (TWO_PI * n_iter))


def rationalize(value: float, q_max: int) -> Fraction:
    """Nearest fraction with denominator at most ``q_max`` (continued fractions)."""
    return Fraction(value).limit_denominator(q_max)


def admissible_rationals(lower: float, upper: float, q_max: int) -> list[Fraction]:
    """Reduced ``p/q`` with ``q <= q_max`` and ``lower < 2 pi p/q < upper``,
    generated by Stern-Brocot mediants between consecutive integers."""
    lo, hi = lower / TWO_PI, upper / TWO_PI
    out = set()
    for n in range(math.floor(lo), math.ceil(hi) + 1):
        stack = [((n, 1), (n + 1, 1))]
        out.update({Fraction(n), Fraction(n + 1)})
        while stack:
            (a, b), (c, d) = stack.pop()
            if b + d > q_max:
                continue
            mid = (a + c, b + d)
            out.add(Fraction(*mid))
            stack.append(((a, b), mid))
            stack.append((mid, (c, d)))
    # endpoints come from floating extrema; a rational within rounding of one is excluded
    eps = 1e-12 * max(1.0, abs(lo), abs(hi))
    return sorted(r for r in out if lo + eps < r < hi - eps)


@dataclass
class SpectrumEntry:
    rational: Fraction
    component: int
    orbit: SymmetricOrbit
    rotation: float


@dataclass
class SpectrumResult:
    entries: list[SpectrumEntry]
    rationals: list[Fraction]
    boundary: BoundaryTwist
    missing: list[tuple[Fraction, int]] = field(default_factory=list)


def _spectrum_roots(F: LiftedMap, c: float, pq: Fraction, n_grid: int) -> list[float]:
    p, q = pq.numerator, pq.denominator
    a = (q + 1) // 2
    b = q - a
    refl = shifted_reflection(c)

    def rx(ys):
        w = np.column_stack([np.full(len(ys), c), ys])
        return (F.F.power(w, a) - refl(F.F.power(w, b)))[:, 0] - TWO_PI * p

    return _displacement_roots(rx, F.y_lo, F.y_hi, n_grid, periodic=False)


def farey_orbit_spectrum(f, q_max: int, n_grid: int = 801, tol: float = ORBIT_TOL) -> SpectrumResult:
    """One certified symmetric ``q``-periodic orbit of rotation number ``p/q`` on each
    fixed-locus component, for every admissible ``p/q`` with ``q <= q_max``."""
    F = f if isinstance(f, LiftedMap) else LiftedMap.of(f)
    g = F.F.on_quotient()
    bt = boundary_twist(F)
    if not bt.satisfied:
        raise ValueError("boundary twist condition fails; the spectrum is not predicted")
    rationals = admissible_rationals(bt.lower, bt.upper, q_max)
    entries, missing = [], []
    for pq in rationals:
        q = pq.denominator
        for comp, c in enumerate((0.0, math.pi)):
            orbit = None
            for y in _spectrum_roots(F, c, pq, n_grid):
                w = np.array([c, y])
                try:
                    cand = certify_orbit(g, w, q, tol=tol, base=0, found_by=(q, 0))
                except RefinementError:
                    continue
                if cand.period == q:
                    orbit = cand
                    break
            if orbit is None:
                missing.append((pq, comp))
                continue
            rot = float((F.F.power(np.array([c, orbit.seed.y]), q)[0] - c) / (TWO_PI * q))
            orbit.rotation = rot
            entries.append(SpectrumEntry(pq, comp, orbit, rot))
    return SpectrumResult(entries, rationals, bt, missing)


# ---------------------------------------------------------------------------
# census

@dataclass
class CensusRow:
    max_period: int
    count_all: int
    count_odd: int
    count_interior: int
    count_by_component: dict[int, int]


@dataclass
class CensusResult:
    map_name: str
    rows: list[CensusRow]
    runtime_s: float
    warnings: list[str] = field(default_factory=list)
    degenerate: bool = False

    def column(self, name: str) -> list[int]:
        return [getattr(r, name) for r in self.rows]


def dichotomy_census(f: MapSpec, N_max: int, N_min: int = 2, resolution: int = 400) -> CensusResult:
    """Counts of symmetric periodic orbits with period at most ``N`` for ``N_min <= N <= N_max``.

    A single search at ``N_max`` is filtered by period; orbits of period at most
    ``N`` are exactly those the search at ``N`` would return.
    """
    t0 = time.perf_counter()
    cat = find_symmetric_periodic_points(f, N_max, resolution=resolution)
    g = f.on_quotient()
    comps = [s.component_id for s in g.domain.fixed_locus()]
    rows = []
    for N in range(N_min, N_max + 1):
        sel = [o for o in cat.orbits if o.period <= N]
        rows.append(CensusRow(
            N, len(sel), sum(o.period % 2 for o in sel), sum(o.interior for o in sel),
            {c: sum(c in o.components for o in sel) for c in comps},
        ))
    return CensusResult(f.name, rows, time.perf_counter() - t0, cat.warnings, cat.degenerate)


# ---------------------------------------------------------------------------
# disk

def _scan_roots(fn, lo: float, hi: float, n: int, zero_tol: float) -> list[float]:
    ys = np.linspace(lo, hi, n)
    v = fn(ys)
    roots = list(ys[np.abs(v) <= zero_tol])
    sign = np.sign(v)
    for k in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        roots.append(brentq(lambda y: float(fn(np.array([y]))[0]), ys[k], ys[k + 1],
                            xtol=1e-15, rtol=1e-15, maxiter=200))
    return sorted(float(r) for r in roots)


def disk_symmetric_fixed_points(f: MapSpec, resolution: int = 801,
                                tol: float = ORBIT_TOL) -> list[SymmetricOrbit]:
    """All symmetric fixed points found on the vertical diameter, sorted by height.

    Orientation-preserving maps use ``Fix(f o I) n Fix I``.  For
    orientation-reversing maps a symmetric point of period two is located
    first; the fixed point is then sought on the diameter between that point
    and its image.
    """
    if not f.domain.is_disk:
        raise ValueError("disk_symmetric_fixed_points needs a disk domain")
    R = f.domain.radius
    found: list[SymmetricOrbit] = []
    if f.flags.orientation_preserving:
        base = base_lines(f, resolution)
        br = base.branches[0][0]
        crossings = intersect_lines(base.gamma1, base.gamma0)
        if crossings:
            ds = (br.s_hi - br.s_lo) / (resolution - 1)
            s0 = np.array(sorted({c.s for c in crossings}))
            s, ok = refine_candidates(f, br, 0, 1, s0, ds, tol=tol)
            for sv, good in zip(s, ok):
                if good:
                    try:
                        found.append(certify_orbit(f, br.fn(np.array([sv]))[0], 1, tol=tol, base=0))
                    except RefinementError:
                        pass
    else:
        axis = lambda ys: np.column_stack([np.zeros(len(ys)), ys])  # noqa: E731
        lands_on_axis = lambda ys: f(axis(ys))[:, 0]  # noqa: E731
        for y in _scan_roots(lands_on_axis, -R, R, resolution, 1e-15):
            z = np.array([0.0, y])
            y_img = float(f(z)[1])
            a, b = sorted((y, y_img))
            if b - a < 1e-15:
                segment = [y]
            else:
                segment = []
                for comp in (0, 1):
                    res = lambda ys, comp=comp: (f(axis(ys)) - axis(ys))[:, comp]  # noqa: E731
                    segment.extend(_scan_roots(res, a, b, resolution, 1e-15))
            for yy in segment:
                w = np.array([0.0, yy])
                if np.linalg.norm(f(w) - w) <= tol:
                    found.append(certify_orbit(f, w, 1, tol=tol, base=0, found_by=(2, 0)))
            if found:
                break
    unique: list[SymmetricOrbit] = []
    for o in sorted(found, key=lambda o: o.seed.y):
        if not unique or abs(o.seed.y - unique[-1].seed.y) > 1e-9:
            unique.append(o)
    return unique


def disk_symmetric_fixed_point(f: MapSpec, resolution: int = 801,
                               tol: float = ORBIT_TOL) -> SymmetricOrbit:
    """An interior symmetric fixed point; the one nearest the center when several exist."""
    try:
        pts = [o for o in disk_symmetric_fixed_points(f, resolution, tol) if o.interior]
    except NoRootsError as exc:
        raise FalsificationCandidate(f"{f.name}: {exc}", {"resolution": resolution}) from None
    if not pts:
        raise FalsificationCandidate(
            f"no interior symmetric fixed point found for {f.name}",
            {"resolution": resolution, "tolerance": tol})
    return min(pts, key=lambda o: (abs(o.seed.y), o.seed.y))


__all__ = [
    "BoundaryTwist", "CensusResult", "CensusRow", "ComponentVerdict", "FalsificationCandidate",
    "LiftedMap", "NoRootsError", "SpectrumEntry", "SpectrumResult", "TwistReport",
    "admissible_rationals", "boundary_twist", "dichotomy_census", "disk_symmetric_fixed_point",
    "disk_symmetric_fixed_points", "farey_orbit_spectrum", "rationalize", "rotation_number",
    "twist_criterion",
]
