"""Symmetry lines ``Gamma_m = Fix(f^m o I)`` and the symmetric orbits on them.

``Gamma_0`` is the reflection axis and ``Gamma_1`` the fixed set of the
involution ``f o I``; every other line is a pushforward,
``f^j(Gamma_i) = Gamma_{2j+i}``.  A point of ``Gamma_m`` that also lies on a
base line ``Gamma_l`` (``l`` in ``{0, 1}``) is periodic with period dividing
``m - l``.  Since every symmetric orbit passes through ``Gamma_0`` or
``Gamma_1``, intersecting ``Gamma_m`` with the two base lines for
``m <= N + 1`` finds every symmetric orbit of period at most ``N`` that the
discretization resolves.

Base lines carry an exact parametrization ``s -> point``; candidates are
refined along it by a bracketed one-dimensional solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import InvariantDomain, Point, reflect_xy, wrap_signed
from .revmaps import Branch, MapSpec, fd_jacobian
from .winding import Polyline

LINE_TOL = 1e-8
ORBIT_TOL = 1e-10
DEDUPE_EPS = 1e-6
REFINE_BUDGET = 2_000_000
TANGENT_SIN = 1e-6


class NoRootsError(RuntimeError):
    """``f o I`` appears to have no fixed points in the search window."""


class RefinementBudgetError(RuntimeError):
    def __init__(self, m: int, attained: int, n_points: int):
        self.m, self.attained, self.n_points = m, attained, n_points
        super().__init__(f"line m={m}: refinement budget exhausted with {n_points} points "
                         f"(last complete line m={attained})")


class RefinementError(RuntimeError):
    """A candidate could not be turned into a certified symmetric orbit."""


# ---------------------------------------------------------------------------
# data

@dataclass(eq=False)
class LinePiece:
    """Samples of one branch: parameters ``s`` on the base branch and image points."""

    branch: int
    s: np.ndarray
    points: np.ndarray


@dataclass(eq=False)
class SymmetryLine:
    m: int
    pieces: list[LinePiece]
    provenance: str
    max_residual: float = 0.0

    @property
    def parity(self) -> int:
        return self.m % 2

    @property
    def base(self) -> int:
        return self.m % 2

    @property
    def curves(self) -> list[Polyline]:
        out = []
        for piece in self.pieces:
            pts = piece.points
            keep = np.concatenate([[True], np.abs(np.diff(pts, axis=0)).max(axis=1) > 0])
            if keep.sum() >= 2:
                out.append(Polyline(pts[keep]))
        return out

    @property
    def n_points(self) -> int:
        return sum(len(p.s) for p in self.pieces)


@dataclass(eq=False)
class BaseLines:
    """The two generating lines together with their exact parametrizations."""

    gamma0: SymmetryLine
    gamma1: SymmetryLine | None
    branches: tuple[list[Branch], list[Branch]]
    window: tuple[float, float]
    warnings: list[str] = field(default_factory=list)

    def __iter__(self):
        yield self.gamma0
        yield self.gamma1

    def line(self, i: int) -> SymmetryLine:
        line = self.gamma0 if i == 0 else self.gamma1
        if line is None:
            raise NoRootsError("Fix(f o I) is empty in the search window")
        return line


@dataclass(frozen=True)
class Crossing:
    point: Point
    m_high: int
    m_low: int
    branch: int
    s: float
    tangent: bool

    @property
    def period(self) -> int:
        return self.m_high - self.m_low

    @property
    def parity(self) -> str:
        return "odd" if (self.m_high - self.m_low) % 2 else "even"


@dataclass(eq=False)
class SymmetricOrbit:
    seed: Point
    period: int
    witness: tuple[int, int]
    found_by: tuple[int, int]
    residual: float
    symmetric_residual: float
    symmetric_shift: int
    interior: bool
    orbit_points: np.ndarray
    components: tuple[int, ...] = ()
    rotation: float | None = None

    @property
    def parity(self) -> str:
        return "odd" if self.period % 2 else "even"

    def as_dict(self) -> dict:
        return {
            "seed": [float(self.seed.x), float(self.seed.y)],
            "period": self.period,
            "parity": self.parity,
            "witness": list(self.witness),
            "found_by": list(self.found_by),
            "residual": float(self.residual),
            "symmetric_residual": float(self.symmetric_residual),
            "symmetric_shift": self.symmetric_shift,
            "interior": bool(self.interior),
            "components": [int(c) for c in self.components],
            "rotation": None if self.rotation is None else float(self.rotation),
            "orbit_points": [[float(a), float(b)] for a, b in self.orbit_points],
        }


@dataclass(eq=False)
class OrbitCatalog:
    orbits: list[SymmetricOrbit]
    warnings: list[str] = field(default_factory=list)
    degenerate: bool = False
    max_period: int = 0
    lines: dict[int, SymmetryLine] = field(default_factory=dict)

    def __len__(self):
        return len(self.orbits)

    def __iter__(self):
        return iter(self.orbits)


# ---------------------------------------------------------------------------
# lattice-aware differences

def _lattice(f: MapSpec) -> tuple[float | None, float | None]:
    return f.lattice


def lattice_difference(a, b, lattice) -> np.ndarray:
    """``a - b`` reduced modulo the translation lattice of the map."""
    px, py = lattice
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if px is None and py is None:
        return d
    d = np.array(d, dtype=float)
    if px is not None:
        d[..., 0] = (np.mod(d[..., 0] + 0.5 * px, px) - 0.5 * px)
    if py is not None:
        d[..., 1] = (np.mod(d[..., 1] + 0.5 * py, py) - 0.5 * py)
    return d


def _periodic_difference(f: MapSpec):
    """Difference used for period residuals: only the angle is reduced."""
    px = f.lattice[0]
    if px is None:
        return lambda a, b: np.asarray(a, dtype=float) - np.asarray(b, dtype=float)

    def diff(a, b):
        d = np.array(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
        d[..., 0] = np.mod(d[..., 0] + 0.5 * px, px) - 0.5 * px
        return d
    return diff


def line_residual(f: MapSpec, m: int, pts: np.ndarray) -> np.ndarray:
    """``|f^m(I p) - p|`` with the angle reduced."""
    diff = _periodic_difference(f)
    return np.linalg.norm(diff(f.power(reflect_xy(pts), m), pts), axis=-1)


# ---------------------------------------------------------------------------
# base lines

def _axis_branches(f: MapSpec, window: tuple[float, float]) -> list[Branch]:
    lo, hi = window
    out = []
    for seg in f.domain.fixed_locus():
        seg = seg.clipped(lo, hi) if not seg.bounded else seg
        out.append(Branch(lambda s, c=seg.x: np.column_stack([np.full(len(np.atleast_1d(s)), c),
                                                              np.atleast_1d(s)]),
                          seg.y_lo, seg.y_hi, f"x={seg.x:.6g}"))
    return out


def _sample_branch(br: Branch, n: int) -> tuple[np.ndarray, np.ndarray]:
    s = np.linspace(br.s_lo, br.s_hi, n)
    return s, br.fn(s)


def _project_fixed(J, diff, pts: np.ndarray, iters: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Pull points onto ``Fix J``: midpoint averaging, then Gauss-Newton."""
    p = np.array(pts, dtype=float)
    for _ in range(iters):
        p = p + 0.5 * diff(J(p), p)
    for _ in range(25):
        r = diff(J(p), p)
        jac = fd_jacobian(lambda q: diff(J(q), p), p) - np.eye(2)
        step = (np.linalg.pinv(jac, rcond=1e-10) @ r[..., None])[..., 0]
        p = p - step
    return p, np.linalg.norm(diff(J(p), p), axis=1)


def _chain(pts: np.ndarray, diff, link: float) -> list[np.ndarray]:
    """Order scattered curve samples into chains by greedy nearest-neighbour walks."""
    remaining = list(range(len(pts)))
    chains = []
    while remaining:
        idx = np.array(remaining)
        # start from the sample farthest from an arbitrary one: an end of its branch
        d0 = np.linalg.norm(diff(pts[idx], pts[idx[0]]), axis=1)
        start = int(idx[np.argmax(np.where(d0 < 50 * link, d0, -1))])
        order = [start]
        left = set(remaining)
        left.discard(start)
        cur = start
        while left:
            cand = np.array(sorted(left))
            d = np.linalg.norm(diff(pts[cand], pts[cur]), axis=1)
            k = int(np.argmin(d))
            if d[k] > link:
                break
            cur = int(cand[k])
            order.append(cur)
            left.discard(cur)
        remaining = sorted(left)
        if len(order) >= 2:
            seq = pts[order].copy()
            steps = diff(seq[1:], seq[:-1])
            chains.append(np.vstack([seq[:1], seq[0] + np.cumsum(steps, axis=0)]))
    return chains


def _numeric_fix_branches(f: MapSpec, window: tuple[float, float], resolution: int,
                          tol: float = 1e-11) -> list[Branch]:
    J = f.involution()
    diff = _periodic_difference(f)
    x_lo, x_hi = (0.0, 2 * math.pi) if f.lattice[0] is not None else f.domain.sample_window()[:2]
    y_lo, y_hi = window
    n = max(16, resolution // 8)
    gx, gy = np.meshgrid(np.linspace(x_lo, x_hi, n, endpoint=f.lattice[0] is None),
                         np.linspace(y_lo, y_hi, n))
    seeds = np.column_stack([gx.ravel(), gy.ravel()])
    with np.errstate(all="ignore"):
        pts, res = _project_fixed(J, diff, seeds)
    ok = np.isfinite(res) & (res < tol)
    ok &= (pts[:, 1] >= y_lo - 1e-9) & (pts[:, 1] <= y_hi + 1e-9)
    if f.domain.is_disk:
        ok &= f.domain.contains_array(pts, margin=0.0) | (np.hypot(*pts.T) <= f.domain.radius + 1e-9)
    pts = pts[ok]
    if len(pts) == 0:
        raise NoRootsError(f"no fixed points of f o I found for {f.name}")
    if f.lattice[0] is not None:
        pts[:, 0] = np.mod(pts[:, 0], f.lattice[0])
    spacing = max(x_hi - x_lo, y_hi - y_lo) / n
    keys = np.round(pts / (0.05 * spacing)).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    pts = pts[np.sort(first)]
    chains = _chain(pts, diff, 3.0 * spacing)
    if not chains:
        raise NoRootsError(f"fixed points of f o I for {f.name} are isolated; no curve to trace")

    branches = []
    for chain in chains:
        def fn(s, chain=chain):
            s = np.atleast_1d(np.asarray(s, dtype=float))
            k = np.clip(np.floor(s).astype(int), 0, len(chain) - 2)
            w = (s - k)[:, None]
            guess = (1 - w) * chain[k] + w * chain[k + 1]
            return _project_fixed(J, diff, guess, iters=4)[0]
        branches.append(Branch(fn, 0.0, float(len(chain) - 1), "traced"))
    return branches


def base_lines(f: MapSpec, resolution: int = 400) -> BaseLines:
    """``Gamma_0`` exactly and ``Gamma_1`` from its formula or by tracing.

    Raises :class:`NoRootsError` when ``f o I`` has no fixed point.
    """
    window = f.base_window()
    b0 = _axis_branches(f, window)
    g0 = SymmetryLine(0, [LinePiece(k, *_sample_branch(br, resolution)) for k, br in enumerate(b0)],
                      "base_fix_I")
    if f.base_line_formula is not None:
        b1 = f.base_line_formula(window)
    else:
        b1 = _numeric_fix_branches(f, window, resolution)
    pieces = []
    for k, br in enumerate(b1):
        s, pts = _sample_branch(br, resolution)
        pieces.append(LinePiece(k, s, pts))
    g1 = SymmetryLine(1, pieces, "base_fix_fI")
    g1.max_residual = float(max(line_residual(f, 1, p.points).max() for p in pieces))
    if g1.max_residual > LINE_TOL:
        raise NoRootsError(f"Fix(f o I) samples miss the line by {g1.max_residual:.3e}")
    return BaseLines(g0, g1, (b0, b1), window)


def safe_base_lines(f: MapSpec, resolution: int = 400) -> BaseLines:
    """Like :func:`base_lines` but degrades to ``Gamma_0`` alone when ``f o I`` is free."""
    try:
        return base_lines(f, resolution)
    except NoRootsError as exc:
        window = f.base_window()
        b0 = _axis_branches(f, window)
        g0 = SymmetryLine(0, [LinePiece(k, *_sample_branch(br, resolution))
                              for k, br in enumerate(b0)], "base_fix_I")
        return BaseLines(g0, None, (b0, []), window, [str(exc)])


# ---------------------------------------------------------------------------
# pushforward

def _default_max_edge(f: MapSpec, window) -> float:
    x_lo, x_hi = f.domain.sample_window()[:2]
    if f.lattice[0] is not None:
        x_lo, x_hi = 0.0, f.lattice[0]
    y_lo, y_hi = window
    return math.hypot(x_hi - x_lo, y_hi - y_lo) / 200.0


def symmetry_line(f: MapSpec, m: int, base: BaseLines | None = None, *,
                  max_edge: float | None = None, budget: int = REFINE_BUDGET,
                  line_tol: float = LINE_TOL, resolution: int = 400) -> SymmetryLine:
    """``Gamma_m`` as ``f^j(Gamma_i)`` with ``m = 2j + i``, refined so that consecutive
    image points are at most ``max_edge`` apart, then certified."""
    if m < 0:
        raise ValueError("line index must be non-negative")
    base = base or base_lines(f, resolution)
    j, i = divmod(m, 2)
    source = base.line(i)
    if j == 0:
        return source
    branches = base.branches[i]
    max_edge = max_edge or _default_max_edge(f, base.window)
    pieces = []
    total = 0
    for piece in source.pieces:
        br = branches[piece.branch]
        s = piece.s.copy()
        img = f.power(br.fn(s), j)
        while True:
            gaps = np.linalg.norm(np.diff(img, axis=0), axis=1)
            bad = np.flatnonzero(gaps > max_edge)
            if bad.size == 0:
                break
            if total + len(s) + bad.size > budget:
                raise RefinementBudgetError(m, m - 1, total + len(s) + bad.size)
            mids = 0.5 * (s[bad] + s[bad + 1])
            unresolved = mids <= s[bad]
            if unresolved.all():
                break
            s = np.insert(s, bad + 1, mids)
            img = np.insert(img, bad + 1, f.power(br.fn(mids), j), axis=0)
        total += len(s)
        pieces.append(LinePiece(piece.branch, s, img))
    line = SymmetryLine(m, pieces, f"pushforward({j},{i})")
    line.max_residual = float(max(line_residual(f, m, p.points).max() for p in pieces))
    if line.max_residual > line_tol:
        raise RefinementError(f"line m={m} fails certification: residual {line.max_residual:.3e}")
    return line


# ---------------------------------------------------------------------------
# intersections

def _cells(a: np.ndarray, b: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Hash keys of the (up to four) grid cells touched by each segment's bounding box."""
    lo = np.floor(np.minimum(a, b) / h).astype(np.int64)
    hi = np.floor(np.maximum(a, b) / h).astype(np.int64)
    keys, ids = [], []
    n = np.arange(len(a))
    for dx in (0, 1):
        for dy in (0, 1):
            cx, cy = lo[:, 0] + dx, lo[:, 1] + dy
            ok = (cx <= hi[:, 0]) & (cy <= hi[:, 1])
            keys.append(cx[ok] * 2_000_003 + cy[ok])
            ids.append(n[ok])
    return np.concatenate(keys), np.concatenate(ids)


def segment_crossings(P: np.ndarray, Q: np.ndarray, eps: float = 1e-12):
    """All crossings between polylines ``P`` and ``Q`` (endpoints included).

    Returns ``(points, i, t, k, u, sin_angle)`` where the crossing lies at
    parameter ``t`` on segment ``i`` of ``P`` and ``u`` on segment ``k`` of ``Q``.
    """
    a0, a1, b0, b1 = P[:-1], P[1:], Q[:-1], Q[1:]
    if len(a0) == 0 or len(b0) == 0:
        empty = np.empty(0)
        return np.empty((0, 2)), empty.astype(int), empty, empty.astype(int), empty, empty
    la = np.abs(a1 - a0).max(axis=1)
    lb = np.abs(b1 - b0).max(axis=1)
    h = max(float(la.max()), float(lb.max()), 1e-12) * 1.0001
    ka, ia = _cells(a0, a1, h)
    kb, ib = _cells(b0, b1, h)
    order = np.argsort(ka, kind="stable")
    ka, ia = ka[order], ia[order]
    left = np.searchsorted(ka, kb, side="left")
    right = np.searchsorted(ka, kb, side="right")
    counts = right - left
    if counts.sum() == 0:
        empty = np.empty(0)
        return np.empty((0, 2)), empty.astype(int), empty, empty.astype(int), empty, empty
    rep_b = np.repeat(ib, counts)
    starts = np.repeat(left - np.cumsum(counts) + counts, counts)
    pos = np.arange(counts.sum()) + starts
    rep_a = ia[pos]
    pairs = np.unique(np.column_stack([rep_a, rep_b]), axis=0)
    i, k = pairs[:, 0], pairs[:, 1]
    p, r = a0[i], a1[i] - a0[i]
    q, s = b0[k], b1[k] - b0[k]
    denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    qp = q - p
    norm = np.linalg.norm(r, axis=1) * np.linalg.norm(s, axis=1)
    sin_angle = np.abs(denom) / np.where(norm > 0, norm, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
        u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / denom
    ok = (denom != 0) & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
    t, u = np.clip(t[ok], 0, 1), np.clip(u[ok], 0, 1)
    pts = p[ok] + t[:, None] * r[ok]
    return pts, i[ok], t, k[ok], u, sin_angle[ok]


def _shifts(P: np.ndarray, Q: np.ndarray, lattice) -> list[np.ndarray]:
    px, py = lattice
    out = []
    rng = []
    for axis, per in ((0, px), (1, py)):
        if per is None:
            rng.append([0])
            continue
        lo = math.floor((P[:, axis].min() - Q[:, axis].max()) / per) - 1
        hi = math.ceil((P[:, axis].max() - Q[:, axis].min()) / per) + 1
        rng.append(range(lo, hi + 1))
    for a in rng[0]:
        for b in rng[1]:
            out.append(np.array([a * (px or 0.0), b * (py or 0.0)]))
    return out


def intersect_lines(L1: SymmetryLine, L2: SymmetryLine, lattice=(None, None),
                    tol: float = 1e-12) -> list[Crossing]:
    """Crossings of ``L1`` with the lattice translates of ``L2`` (``L1.m > L2.m``).

    Points are reported on the untranslated ``L2`` together with the branch
    parameter there, so they can be refined along ``L2``.
    """
    if L1.m <= L2.m:
        raise ValueError("intersect_lines needs L1.m > L2.m")
    out = []
    for P in L1.pieces:
        for Qp in L2.pieces:
            for shift in _shifts(P.points, Qp.points, lattice):
                pts, _, _, k, u, sin_a = segment_crossings(P.points, Qp.points + shift, tol)
                for pt, kk, uu, sa in zip(pts, k, u, sin_a):
                    s = Qp.s[kk] + uu * (Qp.s[kk + 1] - Qp.s[kk])
                    out.append(Crossing(Point.of(pt - shift), L1.m, L2.m, Qp.branch, float(s),
                                        bool(sa < TANGENT_SIN)))
    return out


# ---------------------------------------------------------------------------
# refinement along a base branch

def _half_orbit_residual(f: MapSpec, fn, i: int, d: int, diff):
    a = (d + 1) // 2
    b = d - a

    def r(s):
        w = fn(np.atleast_1d(s))
        return diff(f.power(w, a), reflect_xy(f.power(w, b - i)))
    return r


def _illinois(phi, lo, hi, flo, fhi, iters: int = 100):
    """Vectorized regula falsi with the Illinois modification on sign-changing brackets."""
    lo, hi, flo, fhi = (np.array(v, dtype=float) for v in (lo, hi, flo, fhi))
    x = np.where(flo == 0, lo, hi)
    side = np.zeros(len(lo), dtype=int)
    done = (flo == 0) | (fhi == 0)
    for _ in range(iters):
        act = ~done
        if not act.any():
            break
        denom = fhi[act] - flo[act]
        xa = np.where(denom != 0, (lo[act] * fhi[act] - hi[act] * flo[act]) / denom,
                      0.5 * (lo[act] + hi[act]))
        # guard against stagnation at an end
        bad = ~((xa > np.minimum(lo[act], hi[act])) & (xa < np.maximum(lo[act], hi[act])))
        xa = np.where(bad, 0.5 * (lo[act] + hi[act]), xa)
        fx = phi(xa, act)
        x[act] = xa
        ia = np.flatnonzero(act)
        zero = fx == 0
        same_lo = np.sign(fx) == np.sign(flo[act])
        # replace lo
        rep_lo = ~zero & same_lo
        rep_hi = ~zero & ~same_lo
        lo[ia[rep_lo]] = xa[rep_lo]
        flo[ia[rep_lo]] = fx[rep_lo]
        fhi[ia[rep_lo & (side[ia] == -1)]] *= 0.5
        side[ia[rep_lo]] = -1
        hi[ia[rep_hi]] = xa[rep_hi]
        fhi[ia[rep_hi]] = fx[rep_hi]
        flo[ia[rep_hi & (side[ia] == 1)]] *= 0.5
        side[ia[rep_hi]] = 1
        width = np.abs(hi[ia] - lo[ia])
        scale = np.maximum(1.0, np.maximum(np.abs(lo[ia]), np.abs(hi[ia])))
        done[ia[zero | (width <= 4e-16 * scale)]] = True
    return x


def refine_candidates(f: MapSpec, branch: Branch, i: int, d: int, s0: np.ndarray, ds: float,
                      *, tol: float = ORBIT_TOL, n_grid: int = 17):
    """Solve the half-orbit condition near each ``s0`` along ``branch``.

    Returns the refined parameters and a mask of candidates whose residual
    could be driven to zero.
    """
    diff = _periodic_difference(f)
    r = _half_orbit_residual(f, branch.fn, i, d, diff)
    s0 = np.asarray(s0, dtype=float)
    n = len(s0)
    span = 2.0 * ds
    offs = np.linspace(-span, span, n_grid)
    grid = np.clip(s0[:, None] + offs[None, :], branch.s_lo, branch.s_hi)
    R = r(grid.ravel()).reshape(n, n_grid, 2)
    eps = max(ds * 1e-4, 1e-9)
    v = r(np.clip(s0 + eps, branch.s_lo, branch.s_hi)) - r(np.clip(s0 - eps, branch.s_lo, branch.s_hi))
    # fall back to the secant of the bracket when the local derivative is degenerate
    sec = R[:, -1] - R[:, 0]
    vn = np.linalg.norm(v, axis=1)
    v = np.where((vn > 1e-300)[:, None], v, sec)
    vn = np.linalg.norm(v, axis=1)
    v = v / np.where(vn > 0, vn, 1.0)[:, None]
    phi_grid = (R * v[:, None, :]).sum(axis=2)

    s_out = np.full(n, np.nan)
    lo = np.full(n, np.nan)
    hi = np.full(n, np.nan)
    flo = np.full(n, np.nan)
    fhi = np.full(n, np.nan)
    centre = n_grid // 2
    periodic = f.lattice[0] is not None
    rnorm = np.linalg.norm(R, axis=2)
    for c in range(n):
        g, ph, rn = grid[c], phi_grid[c], rnorm[c]
        zeros = np.flatnonzero(rn <= tol * 1e-2)
        best = None
        if zeros.size:
            k = zeros[np.argmin(np.abs(zeros - centre))]
            s_out[c] = g[k]
            continue
        jump = np.abs(np.diff(R[c][:, 0])) > math.pi if periodic else np.zeros(n_grid - 1, bool)
        change = np.flatnonzero((np.sign(ph[:-1]) * np.sign(ph[1:]) < 0) & ~jump)
        if change.size:
            k = change[np.argmin(np.abs(change + 0.5 - centre))]
            best = k
        if best is None:
            continue
        lo[c], hi[c], flo[c], fhi[c] = g[best], g[best + 1], ph[best], ph[best + 1]
    todo = np.flatnonzero(np.isnan(s_out) & ~np.isnan(lo))
    if todo.size:
        vv = v[todo]

        def phi(x, act):
            return (r(x) * vv[act]).sum(axis=1)

        s_out[todo] = _illinois(phi, lo[todo], hi[todo], flo[todo], fhi[todo])
    ok = ~np.isnan(s_out)
    # a short Gauss-Newton polish of |r(s)|^2 removes the error from a curved residual path
    idx = np.flatnonzero(ok)
    if idx.size:
        s = s_out[idx]
        for _ in range(3):
            h = np.maximum(1e-7 * np.maximum(1.0, np.abs(s)), 1e-9)
            rp = (r(np.clip(s + h, branch.s_lo, branch.s_hi)) -
                  r(np.clip(s - h, branch.s_lo, branch.s_hi))) / (2 * h)[:, None]
            rs = r(s)
            den = (rp * rp).sum(axis=1)
            step = np.where(den > 0, (rs * rp).sum(axis=1) / np.where(den > 0, den, 1.0), 0.0)
            trial = np.clip(s - step, branch.s_lo, branch.s_hi)
            better = np.linalg.norm(r(trial), axis=1) < np.linalg.norm(rs, axis=1)
            s = np.where(better, trial, s)
        s_out[idx] = s
    return s_out, ok


def certify_orbit(f: MapSpec, z: np.ndarray, d: int, *, tol: float = ORBIT_TOL,
                  base: int | None = None, found_by: tuple[int, int] | None = None,
                  margin: float = 1e-9) -> SymmetricOrbit:
    """Reduce to the minimal period, measure both certificates and build the record."""
    diff = _periodic_difference(f)
    z = np.asarray(z, dtype=float)
    pts = np.empty((d + 1, 2))
    pts[0] = z
    for k in range(d):
        pts[k + 1] = f(pts[k])
    res = np.linalg.norm(diff(pts, z), axis=1)
    period = None
    for k in range(1, d + 1):
        if d % k == 0 and res[k] <= tol:
            period = k
            break
    if period is None:
        raise RefinementError(f"period residual {res[d]:.3e} exceeds {tol:g}")
    orbit_pts = pts[:period]
    sres = np.linalg.norm(diff(orbit_pts, reflect_xy(z)), axis=1)
    hits = np.flatnonzero(sres <= tol)
    if hits.size == 0:
        raise RefinementError(f"symmetry residual {sres.min():.3e} exceeds {tol:g}")
    shift = int(hits[0])
    if base is None:
        base = 0 if shift == 0 else (1 if shift == period - 1 else 0)
    interior = bool(f.domain.contains_array(orbit_pts, interior=True, margin=margin).all())
    comps = set()
    for p in orbit_pts:
        c = f.domain.component_of(_reduce_point(f, p), tol=1e-7)
        if c is not None:
            comps.add(c)
    return SymmetricOrbit(
        seed=Point.of(_reduce_point(f, z)),
        period=period,
        witness=(base + period, base),
        found_by=found_by or (base + d, base),
        residual=float(res[period]),
        symmetric_residual=float(sres[shift]),
        symmetric_shift=shift,
        interior=interior,
        orbit_points=np.array([_reduce_point(f, p) for p in orbit_pts]),
        components=tuple(sorted(comps)),
    )


def _reduce_point(f: MapSpec, p: np.ndarray) -> np.ndarray:
    p = np.array(p, dtype=float)
    px, py = f.lattice
    if px is not None:
        p[0] = np.mod(p[0], px)
        if p[0] >= px - 1e-13:
            p[0] = 0.0
    if py is not None and f.window is not None:
        lo = f.window[0]
        p[1] = lo + np.mod(p[1] - lo, py)
    return p


def _locate_on_base(base: BaseLines, i: int, p: np.ndarray, lattice) -> tuple[int, float, float]:
    """Nearest branch and parameter on ``Gamma_i`` to ``p`` (modulo the lattice)."""
    best = (None, None, np.inf)
    for piece in base.line(i).pieces:
        d = np.linalg.norm(lattice_difference(piece.points, p, lattice), axis=1)
        k = int(np.argmin(d))
        if d[k] < best[2]:
            best = (piece.branch, float(piece.s[k]), float(d[k]))
    return best


def refine_symmetric_orbit(f: MapSpec, candidate, witness: tuple[int, int], *,
                           base: BaseLines | None = None, tol: float = ORBIT_TOL,
                           resolution: int = 400) -> SymmetricOrbit:
    """Refine a candidate near ``Gamma_k`` and ``Gamma_l`` into a certified symmetric orbit.

    The candidate is moved back to a base line by ``f^-j'`` (``l = 2j' + i``),
    then solved along that line's exact parametrization.
    """
    k, l = witness
    if k <= l:
        raise ValueError("witness must satisfy k > l")
    f = f.on_quotient()
    base = base or safe_base_lines(f, resolution)
    jl, i = divmod(l, 2)
    w = f.power(np.asarray(candidate, dtype=float), -jl)
    branch_id, s0, dist = _locate_on_base(base, i, w, f.lattice)
    if branch_id is None:
        raise RefinementError("no base line to refine along")
    br = base.branches[i][branch_id]
    ds = (br.s_hi - br.s_lo) / max(resolution - 1, 1)
    d = k - l
    s, ok = refine_candidates(f, br, i, d, np.array([s0]), ds * 2, tol=tol)
    if not ok[0]:
        raise RefinementError(f"no root of the half-orbit condition near s={s0:.6g}")
    z = br.fn(np.array([s[0]]))[0]
    return certify_orbit(f, z, d, tol=tol, base=i, found_by=(k, l))


# ---------------------------------------------------------------------------
# catalog

def _orbit_key_distance(a: SymmetricOrbit, b: SymmetricOrbit, lattice) -> float:
    d = lattice_difference(a.orbit_points[:, None, :], b.seed, lattice)
    return float(np.linalg.norm(d, axis=-1).min())


def dedupe_orbits(orbits: list[SymmetricOrbit], lattice=(None, None),
                  eps: float = DEDUPE_EPS) -> list[SymmetricOrbit]:
    """Merge records describing the same orbit set (or mirror images of one another)."""
    ranked = sorted(orbits, key=lambda o: (o.period, o.witness[1], o.seed.y, o.seed.x))
    kept: list[SymmetricOrbit] = []
    for o in ranked:
        dup = False
        for k in kept:
            if k.period != o.period:
                continue
            if _orbit_key_distance(k, o, lattice) <= eps:
                dup = True
            else:
                mirrored = reflect_xy(np.array(o.seed))
                d = lattice_difference(k.orbit_points, mirrored, lattice)
                dup = float(np.linalg.norm(d, axis=-1).min()) <= eps
            if dup:
                break
        if not dup:
            kept.append(o)
    return sorted(kept, key=lambda o: (o.period, o.seed.y, o.seed.x))


def _is_degenerate(f: MapSpec, base: BaseLines) -> bool:
    """True when the whole reflection axis is fixed, so every line coincides."""
    pts = np.vstack([p.points for p in base.gamma0.pieces])
    return bool(line_residual(f, 1, pts).max() <= LINE_TOL)


def find_symmetric_periodic_points(f: MapSpec, max_period: int, *, resolution: int = 400,
                                   all_pairs: bool = False, tol: float = ORBIT_TOL,
                                   max_edge: float | None = None,
                                   keep_lines: bool = False) -> OrbitCatalog:
    """Catalog the symmetric periodic orbits of period ``<= max_period``.

    Lines ``Gamma_m`` for ``m <= max_period + 1`` are intersected with
    ``Gamma_0`` (``m <= max_period``) and ``Gamma_1`` (``2 <= m``); with
    ``all_pairs`` every pair with index gap at most ``max_period`` is used.
    """
    N = int(max_period)
    if N < 1:
        raise ValueError("max_period must be at least 1")
    f = f.on_quotient()
    if not f.flags.orientation_preserving:
        raise ValueError("symmetry lines are curves only for orientation-preserving maps; "
                         "search the square of the map instead")
    base = safe_base_lines(f, resolution)
    warnings = list(base.warnings)
    catalog = OrbitCatalog([], warnings, max_period=N)
    if base.gamma1 is not None and _is_degenerate(f, base):
        catalog.degenerate = True
        warnings.append("f fixes the reflection axis pointwise: every symmetry line coincides")
        return catalog

    top = N + 1 if base.gamma1 is not None else N
    lines: dict[int, SymmetryLine] = {0: base.gamma0}
    if base.gamma1 is not None:
        lines[1] = base.gamma1
    for m in range(2, top + 1):
        if m % 2 == 1 and base.gamma1 is None:
            continue
        try:
            lines[m] = symmetry_line(f, m, base, max_edge=max_edge)
        except (RefinementBudgetError, RefinementError) as exc:
            warnings.append(str(exc))
            break
    if keep_lines:
        catalog.lines = lines

    pairs = []
    for m in sorted(lines):
        for low in sorted(lines):
            if low >= m or m - low > N:
                continue
            if all_pairs or low in (0, 1):
                pairs.append((m, low))

    lattice = f.lattice
    # candidates grouped by (base i, branch, d) so that refinement runs batched
    groups: dict[tuple[int, int, int], list[tuple[float, tuple[int, int]]]] = {}
    for m, low in pairs:
        crossings = intersect_lines(lines[m], lines[low], lattice)
        jl, i = divmod(low, 2)
        for c in crossings:
            if c.tangent:
                warnings.append(f"tangential crossing of lines {m} and {low} near "
                                f"({c.point.x:.6g}, {c.point.y:.6g}) skipped")
                continue
            if jl == 0:
                branch, s = c.branch, c.s
            else:
                w = f.power(np.array(c.point), -jl)
                branch, s, _ = _locate_on_base(base, i, w, lattice)
            groups.setdefault((i, branch, m - low), []).append((s, (m, low)))

    found = []
    for (i, branch_id, d), items in sorted(groups.items()):
        br = base.branches[i][branch_id]
        ds = (br.s_hi - br.s_lo) / max(resolution - 1, 1)
        s0 = np.array([s for s, _ in items])
        order = np.argsort(s0)
        s0 = s0[order]
        wit = [items[k][1] for k in order]
        # candidates closer than a tenth of a base step are one candidate
        keep = np.concatenate([[True], np.diff(s0) > 0.1 * ds])
        s0 = s0[keep]
        wit = [w for w, k in zip(wit, keep) if k]
        s, ok = refine_candidates(f, br, i, d, s0, ds, tol=tol)
        for sv, good, w in zip(s, ok, wit):
            if not good:
                warnings.append(f"no root near s={float(sv) if np.isfinite(sv) else float('nan'):.6g} "
                                f"on base {i} for lines {w}")
                continue
            z = br.fn(np.array([sv]))[0]
            try:
                found.append(certify_orbit(f, z, d, tol=tol, base=i, found_by=w))
            except RefinementError as exc:
                warnings.append(f"lines {w}: {exc}")
    catalog.orbits = [o for o in dedupe_orbits(found, lattice) if o.period <= N]
    return catalog


def hausdorff(a: np.ndarray, b: np.ndarray, lattice=(None, None)) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    def one_way(p, q):
        worst = 0.0
        for chunk in np.array_split(p, max(1, len(p) // 2000)):
            d = np.linalg.norm(lattice_difference(chunk[:, None, :], q[None, :, :], lattice), axis=-1)
            worst = max(worst, float(d.min(axis=1).max()))
        return worst
    return max(one_way(a, b), one_way(b, a))
