"""Reversible planar maps: container, iteration, validators and a small zoo.

Every evaluator acts on arrays of shape ``(n, 2)`` and returns lifted
coordinates: on periodic domains the angle is *not* reduced, so that
``f(p) - p`` is the displacement of the natural lift.  Comparisons go
through :meth:`InvariantDomain.difference`, which wraps the angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import expr
from .domains import TWO_PI, DomainError, InvariantDomain, Kind, Point, reflect_xy

Evaluator = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-6


class MapError(ValueError):
    """Unknown family, bad parameter, or a construction that fails validation."""


@dataclass(frozen=True)
class MapFlags:
    isotopic_to_identity: bool = True
    area_preserving: bool = True
    orientation_preserving: bool = True


@dataclass(frozen=True)
class Branch:
    """A parametrized piece of a curve: ``fn(s)`` maps an array of parameters
    in ``[s_lo, s_hi]`` to points of shape ``(len(s), 2)``."""

    fn: Callable[[np.ndarray], np.ndarray]
    s_lo: float
    s_hi: float
    label: str = ""

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        s = np.linspace(self.s_lo, self.s_hi, n)
        return s, self.fn(s)


@dataclass(frozen=True)
class ValidationReport:
    check: str
    max_residual: float
    n_samples: int
    tolerance: float
    worst_point: Point | None

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "max_residual": self.max_residual,
            "n_samples": self.n_samples,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_point": None if self.worst_point is None else list(self.worst_point),
        }


def _as_batch(pts) -> tuple[np.ndarray, bool]:
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        return arr.reshape(1, 2), True
    return arr.reshape(-1, 2), False


@dataclass(frozen=True)
class MapSpec:
    """A reversible map together with what is known about it in closed form.

    ``x_period``/``y_period`` record translation symmetries of the lift
    (``f(p + t) = f(p) + t``); ``window`` is the y-range over which base
    symmetry lines are generated when the domain is unbounded.
    """

    name: str
    forward: Evaluator
    domain: InvariantDomain
    inverse: Evaluator | None = None
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    flags: MapFlags = MapFlags()
    base_line_formula: Callable[[tuple[float, float]], list[Branch]] | None = None
    params: dict = field(default_factory=dict)
    x_period: float | None = None
    y_period: float | None = None
    window: tuple[float, float] | None = None

    def __call__(self, pts):
        arr, single = _as_batch(pts)
        out = self.forward(arr)
        return out[0] if single else out

    def inv(self, pts):
        arr, single = _as_batch(pts)
        out = self.inverse(arr) if self.inverse is not None else newton_inverse(self, arr)
        return out[0] if single else out

    def jac(self, pts) -> np.ndarray:
        arr, single = _as_batch(pts)
        out = self.jacobian(arr) if self.jacobian is not None else fd_jacobian(self.forward, arr)
        return out[0] if single else out

    def power(self, pts, n: int) -> np.ndarray:
        """``f^n`` on a batch, with negative ``n`` using the inverse."""
        arr, single = _as_batch(pts)
        step = self.forward if n >= 0 else (lambda q: self.inv(q))
        for _ in range(abs(n)):
            arr = step(arr)
        return arr[0] if single else arr

    def involution(self) -> Evaluator:
        """``f o I``, an involution when ``f`` is reversible."""
        return lambda pts: self(reflect_xy(pts))

    @property
    def lattice(self) -> tuple[float | None, float | None]:
        px = self.x_period if self.x_period is not None else self.domain.x_period
        return px, self.y_period

    def base_window(self) -> tuple[float, float]:
        """The y-range over which the base symmetry lines are generated."""
        if self.window is not None:
            return self.window
        d = self.domain
        if d.is_disk:
            return (-d.radius, d.radius)
        lo, hi = d.sample_window()[2:]
        return (lo, hi)

    def on_quotient(self) -> "MapSpec":
        """The same map viewed on the cylinder covered by its strip domain."""
        if self.domain.kind is not Kind.STRIP:
            return self
        if self.x_period is None:
            raise MapError(f"{self.name} has no 2pi translation symmetry to descend along")
        return replace(self, domain=self.domain.quotient(), x_period=None)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "params": {k: (v if isinstance(v, (int, float, str)) else repr(v))
                       for k, v in self.params.items()},
            "flags": {
                "isotopic_to_identity": self.flags.isotopic_to_identity,
                "area_preserving": self.flags.area_preserving,
                "orientation_preserving": self.flags.orientation_preserving,
            },
            "domain": self.domain.describe(),
        }


@dataclass(frozen=True)
class InvolutionSpec:
    evaluator: Evaluator
    domain: InvariantDomain
    orientation_reversing: bool = True
    fixed_set_formula: Callable[[tuple[float, float]], list[Branch]] | None = None
    name: str = "J"

    def __call__(self, pts):
        arr, single = _as_batch(pts)
        out = self.evaluator(arr)
        return out[0] if single else out


# ---------------------------------------------------------------------------
# numerics shared by validators and fallbacks

def fd_jacobian(fn: Evaluator, pts: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobians, shape ``(n, 2, 2)``."""
    pts = np.asarray(pts, dtype=float)
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    dx = (fn(pts + ex) - fn(pts - ex)) / (2 * h)
    dy = (fn(pts + ey) - fn(pts - ey)) / (2 * h)
    return np.stack([dx, dy], axis=-1)


def newton_inverse(f: MapSpec, targets: np.ndarray, tol: float = 1e-12,
                   max_iter: int = 50) -> np.ndarray:
    """Solve ``f(q) = p`` by damped Newton seeded at ``p``."""
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    q = targets.copy()
    resid = f.domain.difference(f.forward(q), targets)
    norm = np.linalg.norm(resid, axis=1)
    for _ in range(max_iter):
        active = norm > tol
        if not active.any():
            break
        jac = fd_jacobian(f.forward, q[active])
        try:
            step = np.linalg.solve(jac, resid[active][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = (np.linalg.pinv(jac) @ resid[active][..., None])[..., 0]
        lam = np.ones(active.sum())
        base = q[active]
        for _ in range(30):
            trial = base - lam[:, None] * step
            r_trial = f.domain.difference(f.forward(trial), targets[active])
            n_trial = np.linalg.norm(r_trial, axis=1)
            worse = n_trial > norm[active] * (1 - 1e-4 * lam) + 1e-15
            if not worse.any():
                break
            lam = np.where(worse, lam / 2, lam)
        q[active] = trial
        resid[active] = r_trial
        norm[active] = n_trial
    if (norm > 1e3 * tol).any():
        raise MapError(f"inverse of {f.name} did not converge (residual {norm.max():.3e})")
    return q


def iterate(f: MapSpec, p, n: int) -> Point:
    """``f^n(p)``; negative ``n`` iterates the inverse."""
    return Point.of(orbit(f, p, n)[-1])


def orbit(f: MapSpec, p, n: int) -> np.ndarray:
    """The points ``p, f(p), ..., f^n(p)`` (or the backward orbit for ``n < 0``)."""
    p = Point.of(p)
    pts = np.empty((abs(n) + 1, 2))
    pts[0] = p
    bounded = f.domain.is_disk or (f.domain.kind is not Kind.PLANE and f.domain.bounded_y)
    for k in range(abs(n)):
        pts[k + 1] = f(pts[k]) if n > 0 else f.inv(pts[k])
        if bounded and not _inside(f.domain, pts[k + 1]):
            raise DomainError(f"orbit of {tuple(p)} left the domain at step {k + 1}")
    return pts


def _inside(domain: InvariantDomain, p: np.ndarray, slack: float = 1e-12) -> bool:
    # closed domains are judged with a rounding allowance at the boundary
    if domain.is_disk:
        return bool(math.hypot(*p) <= domain.radius + slack)
    return bool(domain.y_min - slack <= p[1] <= domain.y_max + slack)


# ---------------------------------------------------------------------------
# validators

def _report(check: str, residuals: np.ndarray, pts: np.ndarray, tol: float) -> ValidationReport:
    residuals = np.where(np.isfinite(residuals), residuals, np.inf)
    worst = int(np.argmax(residuals))
    return ValidationReport(check, float(residuals[worst]), len(residuals), tol, Point.of(pts[worst]))


def validate_reversibility(f: MapSpec, n_samples: int = 10_000, tol: float = 1e-10,
                           power: int = 1) -> ValidationReport:
    """max ``|f^k(I p) - I(f^-k(p))|`` over Halton samples."""
    pts = f.domain.halton(n_samples)
    lhs = f.power(reflect_xy(pts), power)
    rhs = reflect_xy(f.power(pts, -power))
    res = np.linalg.norm(f.domain.difference(lhs, rhs), axis=1)
    return _report(f"reversibility(power={power})", res, pts, tol)


def validate_involution(J, n_samples: int = 10_000, tol: float = 1e-10,
                        domain: InvariantDomain | None = None) -> ValidationReport:
    """max ``|J(J p) - p|``; ``J`` is an :class:`InvolutionSpec` or a :class:`MapSpec`
    (in which case ``f o I`` is checked)."""
    if isinstance(J, MapSpec):
        domain = domain or J.domain
        fn = J.involution()
    else:
        domain = domain or J.domain
        fn = J.evaluator
    pts = domain.halton(n_samples)
    res = np.linalg.norm(domain.difference(fn(fn(pts)), pts), axis=1)
    return _report("involution", res, pts, tol)


def validate_inverse(f: MapSpec, n_samples: int = 10_000, tol: float = 1e-10) -> ValidationReport:
    pts = f.domain.halton(n_samples)
    res = np.linalg.norm(f.domain.difference(f(f.inv(pts)), pts), axis=1)
    return _report("inverse", res, pts, tol)


def validate_area(f: MapSpec, n_samples: int = 10_000, tol: float = 1e-8) -> ValidationReport:
    """max ``||det Df| - 1|``; the absolute value admits orientation-reversing maps."""
    pts = f.domain.halton(n_samples)
    jac = f.jacobian(pts) if f.jacobian is not None else fd_jacobian(f.forward, pts)
    res = np.abs(np.abs(np.linalg.det(jac)) - 1.0)
    return _report("area", res, pts, tol)


# ---------------------------------------------------------------------------
# constructions

def build_from_involution(J: InvolutionSpec, *, name: str = "J o I",
                          isotopic_to_identity: bool | None = None,
                          area_preserving: bool | None = None,
                          n_samples: int = 2_000, tol: float = 1e-10,
                          x_period: float | None = None,
                          window: tuple[float, float] | None = None) -> MapSpec:
    """``f = J o I`` with ``f^-1 = I o J``; ``Fix(f o I) = Fix J``."""
    report = validate_involution(J, n_samples=n_samples, tol=tol)
    if not report.passed:
        raise MapError(f"{J.name} is not an involution: residual {report.max_residual:.3e} "
                       f"at {tuple(report.worst_point)}")
    orientation_preserving = J.orientation_reversing
    f = MapSpec(
        name=name,
        forward=lambda pts: J.evaluator(reflect_xy(pts)),
        inverse=lambda pts: reflect_xy(J.evaluator(pts)),
        domain=J.domain,
        base_line_formula=J.fixed_set_formula,
        flags=MapFlags(
            isotopic_to_identity=orientation_preserving if isotopic_to_identity is None
            else isotopic_to_identity,
            area_preserving=True,
            orientation_preserving=orientation_preserving,
        ),
        x_period=x_period,
        window=window,
    )
    if area_preserving is None:
        area_preserving = validate_area(f, n_samples=n_samples, tol=1e-7).passed
    f = replace(f, flags=replace(f.flags, area_preserving=area_preserving))
    rev = validate_reversibility(f, n_samples=n_samples, tol=tol)
    if not rev.passed:
        raise MapError(f"J o I failed reversibility: residual {rev.max_residual:.3e}")
    return f


def map_power(f: MapSpec, k: int) -> MapSpec:
    """``f^k`` as a map in its own right (reversible whenever ``f`` is)."""
    return replace(
        f,
        name=f"{f.name}^{k}",
        forward=lambda pts: f.power(pts, k),
        inverse=lambda pts: f.power(pts, -k),
        jacobian=None,
        base_line_formula=None,
        flags=replace(f.flags, orientation_preserving=f.flags.orientation_preserving or k % 2 == 0),
    )


def _scalar_fn(a, var: str, default: Callable | None = None) -> tuple[Callable, str]:
    if a is None:
        return default, "default"
    if isinstance(a, str):
        return expr.parse(a, (var,)), a
    if callable(a):
        return a, getattr(a, "__name__", "callable")
    value = float(a)
    return (lambda t: np.full_like(np.asarray(t, dtype=float), value)), repr(value)


def twist(a=None, *, slope: float = TWO_PI, offset: float = 0.0,
          domain: InvariantDomain | None = None) -> MapSpec:
    """``(x, y) -> (x + a(y), y)``; by default ``a(y) = slope * y + offset``."""
    if a is None:
        fn = lambda y: slope * np.asarray(y, dtype=float) + offset  # noqa: E731
        label = f"{slope!r}*y + {offset!r}"
        a_prime = lambda y: np.full_like(np.asarray(y, dtype=float), slope)  # noqa: E731
    else:
        fn, label = _scalar_fn(a, "y")
        a_prime = None
    domain = domain or InvariantDomain.cylinder(0.0, 1.0)
    if domain.kind not in (Kind.CYLINDER, Kind.STRIP, Kind.CLOSED_ANNULUS, Kind.OPEN_ANNULUS):
        raise MapError("twist lives on a strip, cylinder or annulus")

    def forward(pts):
        return np.column_stack([pts[:, 0] + fn(pts[:, 1]), pts[:, 1]])

    def inverse(pts):
        return np.column_stack([pts[:, 0] - fn(pts[:, 1]), pts[:, 1]])

    def jacobian(pts):
        y = pts[:, 1]
        if a_prime is not None:
            da = a_prime(y)
        else:
            da = (fn(y + FD_STEP) - fn(y - FD_STEP)) / (2 * FD_STEP)
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = out[:, 1, 1] = 1.0
        out[:, 0, 1] = da
        return out

    def base_lines(window):
        lo, hi = window
        branches = [Branch(lambda s: np.column_stack([0.5 * fn(s), s]), lo, hi, "x=a(y)/2")]
        branches.append(Branch(lambda s: np.column_stack([0.5 * fn(s) + math.pi, s]), lo, hi,
                               "x=a(y)/2+pi"))
        return branches

    return MapSpec("twist", forward, domain, inverse, jacobian, MapFlags(), base_lines,
                   {"a": label}, x_period=TWO_PI)


def rigid_disk_rotation(alpha: float, radius: float = 1.0) -> MapSpec:
    """Rotation of the disk by ``alpha`` about its center."""
    c, s = math.cos(alpha), math.sin(alpha)
    rot = np.array([[c, -s], [s, c]])

    def base_lines(window):
        phi = 0.5 * math.pi + 0.5 * alpha
        e = np.array([math.cos(phi), math.sin(phi)])
        return [Branch(lambda t: np.outer(t, e), -radius, radius, "diameter")]

    return MapSpec(
        "rigid_disk_rotation",
        lambda pts: pts @ rot.T,
        InvariantDomain.closed_disk(radius),
        lambda pts: pts @ rot,
        lambda pts: np.broadcast_to(rot, (len(pts), 2, 2)).copy(),
        MapFlags(),
        base_lines,
        {"alpha": alpha},
    )


def rigid_annulus_rotation(alpha: float, open_: bool = False) -> MapSpec:
    """``(angle, radius) -> (angle + alpha, radius)`` on the annulus."""
    domain = InvariantDomain.open_annulus() if open_ else InvariantDomain.closed_annulus()

    def base_lines(window):
        lo, hi = window
        return [Branch(lambda s, c=c: np.column_stack([np.full_like(s, c), s]), lo, hi)
                for c in (0.5 * alpha, 0.5 * alpha + math.pi)]

    return MapSpec(
        "rigid_annulus_rotation",
        lambda pts: pts + np.array([alpha, 0.0]),
        domain,
        lambda pts: pts - np.array([alpha, 0.0]),
        lambda pts: np.broadcast_to(np.eye(2), (len(pts), 2, 2)).copy(),
        MapFlags(),
        base_lines,
        {"alpha": alpha},
    )


def _solve_monotone(g: Callable, dg: Callable, targets: np.ndarray, x0: np.ndarray) -> np.ndarray:
    x = np.array(x0, dtype=float)
    for _ in range(60):
        step = (g(x) - targets) / dg(x)
        x = x - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, float(np.max(np.abs(x)))):
            break
    return x


def normalized_standard(K: float) -> MapSpec:
    """The standard map conjugated so that its reversor is the plain reflection.

    With ``f_K(x, y) = (x + y + K sin x, y + K sin x)`` and
    ``h(x, y) = (x, y + K/2 sin x)`` this is ``g = h f_K h^-1``:
    ``x1 = x + y + K/2 sin x``, ``y1 = y + K/2 (sin x + sin x1)``.
    """
    if not abs(K) < 4.0:
        raise MapError("normalized_standard needs |K| < 4 so that its symmetry line is a graph")
    k2 = 0.5 * K

    def forward(pts):
        x, y = pts[:, 0], pts[:, 1]
        sx = np.sin(x)
        x1 = x + y + k2 * sx
        return np.column_stack([x1, y + k2 * (sx + np.sin(x1))])

    def inverse(pts):
        x, y = pts[:, 0], pts[:, 1]
        sx = np.sin(x)
        x0 = x - y + k2 * sx
        return np.column_stack([x0, y - k2 * (sx + np.sin(x0))])

    def jacobian(pts):
        x, y = pts[:, 0], pts[:, 1]
        x1 = x + y + k2 * np.sin(x)
        c0, c1 = k2 * np.cos(x), k2 * np.cos(x1)
        out = np.empty((len(pts), 2, 2))
        out[:, 0, 0] = 1 + c0
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = c0 + c1 * (1 + c0)
        out[:, 1, 1] = 1 + c1
        return out

    phi = lambda x: 2 * x + k2 * np.sin(x)  # noqa: E731
    dphi = lambda x: 2 + k2 * np.cos(x)  # noqa: E731

    def graph(shift):
        def fn(s):
            s = np.asarray(s, dtype=float) + shift
            return np.column_stack([_solve_monotone(phi, dphi, s, 0.5 * s), s - shift])
        return fn

    def base_lines(window):
        lo, hi = window
        return [Branch(graph(0.0), lo, hi, "2x+K/2 sin x=y"),
                Branch(graph(TWO_PI), lo, hi, "2x+K/2 sin x=y+2pi")]

    return MapSpec("normalized_standard", forward, InvariantDomain.cylinder(), inverse, jacobian,
                   MapFlags(), base_lines, {"K": K}, y_period=TWO_PI, window=(-math.pi, math.pi))


def wavy_twist(a=None, c: float = 0.3) -> MapSpec:
    """A twist conjugated by the reflection-equivariant bend
    ``h(x, y) = (x, y + c (1 - cos x) y (1 - y))`` of the unit cylinder.

    The result is reversible with curved symmetry lines and is not area
    preserving for ``c != 0``.
    """
    if not abs(c) < 0.5:
        raise MapError("wavy_twist needs |c| < 0.5 for the bend to be a diffeomorphism")
    base = twist(a)
    a_fn = (lambda y: TWO_PI * np.asarray(y, dtype=float)) if a is None else _scalar_fn(a, "y")[0]

    def bend(pts):
        x, y = pts[:, 0], pts[:, 1]
        return np.column_stack([x, y + c * (1 - np.cos(x)) * y * (1 - y)])

    def unbend(pts):
        x, yp = pts[:, 0], pts[:, 1]
        k = c * (1 - np.cos(x))
        b = 1 + k
        return np.column_stack([x, 2 * yp / (b + np.sqrt(b * b - 4 * k * yp))])

    def base_lines(window):
        lo, hi = window
        return [Branch(lambda s, o=o: bend(np.column_stack([0.5 * a_fn(s) + o, s])), lo, hi)
                for o in (0.0, math.pi)]

    return MapSpec(
        "wavy_twist",
        lambda pts: bend(base.forward(unbend(pts))),
        InvariantDomain.cylinder(0.0, 1.0),
        lambda pts: bend(base.inverse(unbend(pts))),
        None,
        MapFlags(area_preserving=c == 0),
        base_lines,
        {"a": base.params["a"], "c": c},
        x_period=TWO_PI,
    )


def disk_twist(tau, radius: float = 1.0) -> MapSpec:
    """Rotate each circle ``|p| = r`` by the angle ``tau(r)``."""
    tau_fn, label = _scalar_fn(tau, "r")

    def rotate(pts, sign):
        r = np.hypot(pts[:, 0], pts[:, 1])
        t = sign * np.broadcast_to(tau_fn(r), r.shape)
        c, s = np.cos(t), np.sin(t)
        return np.column_stack([c * pts[:, 0] - s * pts[:, 1], s * pts[:, 0] + c * pts[:, 1]])

    def base_lines(window):
        def fn(s):
            s = np.asarray(s, dtype=float)
            theta = 0.5 * math.pi + 0.5 * np.broadcast_to(tau_fn(np.abs(s)), s.shape)
            return np.column_stack([s * np.cos(theta), s * np.sin(theta)])
        return [Branch(fn, -radius, radius, "theta=pi/2+tau(r)/2")]

    return MapSpec("disk_twist", lambda p: rotate(p, 1.0), InvariantDomain.closed_disk(radius),
                   lambda p: rotate(p, -1.0), None, MapFlags(), base_lines, {"tau": label})


def disk_flip(radius: float = 1.0) -> MapSpec:
    """``(x, y) -> (x, -y)``: orientation reversing and reversible on the disk."""
    flip = lambda pts: pts * np.array([1.0, -1.0])  # noqa: E731
    jac = np.diag([1.0, -1.0])
    return MapSpec(
        "disk_flip", flip, InvariantDomain.closed_disk(radius), flip,
        lambda pts: np.broadcast_to(jac, (len(pts), 2, 2)).copy(),
        MapFlags(isotopic_to_identity=False, area_preserving=True, orientation_preserving=False),
        None, {},
    )


def reflected_shear(c0: float = 0.5, c2: float = 0.3) -> MapSpec:
    """``(x, y) -> (x + 2 a(y), -y)`` with the even profile ``a(y) = c0 + c2 y^2``.

    Orientation reversing, isotopic to the reflection, reversible.
    """
    a = lambda y: c0 + c2 * y * y  # noqa: E731

    def forward(pts):
        return np.column_stack([pts[:, 0] + 2 * a(pts[:, 1]), -pts[:, 1]])

    def inverse(pts):
        return np.column_stack([pts[:, 0] - 2 * a(pts[:, 1]), -pts[:, 1]])

    def jacobian(pts):
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = 1.0
        out[:, 0, 1] = 4 * c2 * pts[:, 1]
        out[:, 1, 1] = -1.0
        return out

    return MapSpec("reflected_shear", forward, InvariantDomain.plane(), inverse, jacobian,
                   MapFlags(isotopic_to_identity=False, area_preserving=True,
                            orientation_preserving=False),
                   None, {"c0": c0, "c2": c2})


def drift_flip(c: float = 0.5) -> MapSpec:
    """``(x, y) -> (phi(x), -y)`` with ``phi = N g^-1 N g``, ``N(x) = -x``, ``g(x) = x + c cos x``.

    ``phi`` is conjugate to its inverse by ``N``, which makes the map
    reversible.  Its fixed points ``(pi/2 + k pi, 0)`` are isolated, and a
    fixed point and its mirror image have opposite indices.
    """
    if not 0 < abs(c) < 1:
        raise MapError("drift_flip needs 0 < |c| < 1 so that g is an increasing homeomorphism")
    g = lambda x: x + c * np.cos(x)  # noqa: E731
    dg = lambda x: 1 - c * np.sin(x)  # noqa: E731

    def g_inv(t):
        return _solve_monotone(g, dg, t, t)

    def forward(pts):
        x = pts[:, 0]
        return np.column_stack([-g_inv(-g(x)), -pts[:, 1]])

    def inverse(pts):
        x = pts[:, 0]
        return np.column_stack([g_inv(-g(-x)), -pts[:, 1]])

    def jacobian(pts):
        x = pts[:, 0]
        out = np.zeros((len(pts), 2, 2))
        out[:, 0, 0] = dg(x) / dg(g_inv(-g(x)))
        out[:, 1, 1] = -1.0
        return out

    return MapSpec("drift_flip", forward, InvariantDomain.plane(), inverse, jacobian,
                   MapFlags(isotopic_to_identity=False, area_preserving=False,
                            orientation_preserving=False),
                   None, {"c": c})


def linear_map(A) -> MapSpec:
    """``p -> A p`` on the plane; not necessarily reversible."""
    A = np.asarray(A, dtype=float).reshape(2, 2)
    det = float(np.linalg.det(A))
    if det == 0:
        raise MapError("linear map must be invertible")
    Ainv = np.linalg.inv(A)
    return MapSpec(
        "linear", lambda pts: pts @ A.T, InvariantDomain.plane(), lambda pts: pts @ Ainv.T,
        lambda pts: np.broadcast_to(A, (len(pts), 2, 2)).copy(),
        MapFlags(isotopic_to_identity=det > 0, area_preserving=abs(abs(det) - 1) < 1e-12,
                 orientation_preserving=det > 0),
        None, {"A": A.tolist()},
    )


def from_expressions(gx: str, gy: str, domain: InvariantDomain, *, inverse=None,
                     flags: MapFlags = MapFlags(), name: str = "expression",
                     x_period: float | None = None) -> MapSpec:
    """A map typed in the expression language; the inverse falls back to Newton."""
    inv = None if inverse is None else expr.planar_map(*inverse)
    return MapSpec(name, expr.planar_map(gx, gy), domain, inv, None, flags, None,
                   {"x": gx, "y": gy}, x_period=x_period)


BUILTINS: dict[str, Callable[..., MapSpec]] = {
    "twist": twist,
    "rigid_disk_rotation": rigid_disk_rotation,
    "rigid_annulus_rotation": rigid_annulus_rotation,
    "normalized_standard": normalized_standard,
    "wavy_twist": wavy_twist,
    "disk_twist": disk_twist,
    "disk_flip": disk_flip,
    "reflected_shear": reflected_shear,
    "drift_flip": drift_flip,
}


def builtin(family: str, **params) -> MapSpec:
    try:
        factory = BUILTINS[family]
    except KeyError:
        raise MapError(f"unknown map family '{family}'; known: {sorted(BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise MapError(f"bad parameters for {family}: {exc}") from None
