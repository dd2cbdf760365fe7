"""Acceptance criteria, one test per criterion, at the stated tolerances.

A pass/fail line per criterion is printed in the terminal summary.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import cKDTree

from revsym.domains import TWO_PI, InvariantDomain, reflect_xy
from revsym.harness import (LiftedMap, admissible_rationals, boundary_twist, dichotomy_census,
                            disk_symmetric_fixed_point, disk_symmetric_fixed_points,
                            farey_orbit_spectrum, twist_criterion)
from revsym.revmaps import (BUILTINS, Branch, InvolutionSpec, build_from_involution, builtin,
                            disk_flip, disk_twist, drift_flip, linear_map, normalized_standard,
                            reflected_shear, rigid_annulus_rotation, rigid_disk_rotation, twist,
                            validate_involution, validate_reversibility, wavy_twist)
from revsym.symmlines import (NoRootsError, base_lines, find_symmetric_periodic_points,
                              lattice_difference, symmetry_line)
from revsym.winding import (Polyline, WindingError, angle_variation, catenate, fixed_point_index,
                            mirror_index_check)

SHIFTED = "2*pi*(y - 1/4)"
DEFAULT_PARAMS = {
    "twist": {}, "rigid_disk_rotation": {"alpha": math.pi / 3},
    "rigid_annulus_rotation": {"alpha": 0.7}, "normalized_standard": {"K": 0.5},
    "wavy_twist": {"c": 0.3}, "disk_twist": {"tau": "6*(r**2 - 0.04)"}, "disk_flip": {},
    "reflected_shear": {}, "drift_flip": {"c": 0.5},
}


def farey(N):
    return {Fraction(p, q) for q in range(1, N + 1) for p in range(q + 1)}


# ---------------------------------------------------------------------------
# maps built from an involution

def twist_from_involution():
    J = InvolutionSpec(lambda p: np.column_stack([TWO_PI * p[:, 1] - p[:, 0], p[:, 1]]),
                       InvariantDomain.strip(), name="x -> 2 pi y - x")
    return build_from_involution(J, x_period=TWO_PI, name="twist via J")


def shear_from_involution(K=0.7):
    J = InvolutionSpec(lambda p: np.column_stack([-p[:, 0], p[:, 1] + K * np.sin(p[:, 0])]),
                       InvariantDomain.cylinder(-2, 2), name="odd shear")
    return build_from_involution(J, x_period=TWO_PI, name="shear via J")


def disk_from_involution(y_star=0.2):
    """``J`` reflects each circle ``|p| = r`` across the line at angle ``sigma(r)``;
    ``Fix J`` meets the vertical diameter at ``y = y_star`` (and the center)."""
    sigma = lambda r: 0.5 * math.pi + 3.0 * (r * r - y_star * y_star)  # noqa: E731

    def J(p):
        r = np.hypot(p[:, 0], p[:, 1])
        t = 2 * sigma(r)
        c, s = np.cos(t), np.sin(t)
        return np.column_stack([c * p[:, 0] + s * p[:, 1], s * p[:, 0] - c * p[:, 1]])

    def fix(window):
        def fn(s):
            s = np.asarray(s, dtype=float)
            th = sigma(np.abs(s))
            return np.column_stack([s * np.cos(th), s * np.sin(th)])
        return [Branch(fn, -1.0, 1.0, "Fix J")]

    spec = InvolutionSpec(J, InvariantDomain.closed_disk(), fixed_set_formula=fix, name="disk J")
    return build_from_involution(spec, name="disk map via J")


# ---------------------------------------------------------------------------
# 1

@pytest.mark.acceptance(1, "reversibility and involution residuals <= 1e-10 on 1e4 Halton samples")
@pytest.mark.parametrize("make", [lambda n=n: builtin(n, **DEFAULT_PARAMS[n]) for n in BUILTINS]
                         + [twist_from_involution, shear_from_involution, disk_from_involution],
                         ids=list(BUILTINS) + ["twist_via_J", "shear_via_J", "disk_via_J"])
def test_criterion_01_reversibility(make):
    t0 = time.perf_counter()
    f = make()
    rev = validate_reversibility(f, n_samples=10_000, tol=1e-10)
    inv = validate_involution(f, n_samples=10_000, tol=1e-10)
    elapsed = time.perf_counter() - t0
    assert rev.passed, rev.as_dict()
    assert inv.passed, inv.as_dict()
    assert elapsed < 5.0


# ---------------------------------------------------------------------------
# 2

def random_pair(rng, n, closed=False):
    delta = np.cumsum(rng.normal(scale=0.3, size=(n, 2)), axis=0)
    theta = np.cumsum(rng.uniform(-1.2, 1.2, size=n))
    r = rng.uniform(0.5, 2.0, size=n)
    gamma = delta + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return Polyline(delta, closed), Polyline(gamma, closed)


@pytest.mark.acceptance(2, "index calculus on 50 random pairs per property and 10 linear maps")
def test_criterion_02_index_calculus():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    for _ in range(50):
        d, g = random_pair(rng, int(rng.integers(3, 40)))
        assert angle_variation(d, g).value == pytest.approx(angle_variation(g, d).value, abs=1e-12)
    for _ in range(50):
        d, g = random_pair(rng, int(rng.integers(4, 40)))
        k = int(rng.integers(2, len(d) - 1))
        whole = angle_variation(catenate(Polyline(d.points[:k + 1]), Polyline(d.points[k:])),
                                catenate(Polyline(g.points[:k + 1]), Polyline(g.points[k:])))
        parts = (angle_variation(Polyline(d.points[:k + 1]), Polyline(g.points[:k + 1])).value
                 + angle_variation(Polyline(d.points[k:]), Polyline(g.points[k:])).value)
        assert whole.value == pytest.approx(parts, abs=1e-9)
    for _ in range(50):
        d, g = random_pair(rng, int(rng.integers(3, 40)), closed=True)
        v = angle_variation(d, g)
        assert v.is_integer_certified and abs(v.value - round(v.value)) <= 1e-6
    for k in range(50):
        d, g = random_pair(rng, int(rng.integers(3, 40)), closed=bool(k % 2))
        v = angle_variation(d, g).value
        assert angle_variation(d.reversed(), g.reversed()).value == pytest.approx(-v, abs=1e-12)
    for k in range(50):
        d, g = random_pair(rng, int(rng.integers(3, 40)), closed=bool(k % 2))
        v = angle_variation(d, g).value
        assert angle_variation(d.reflected(), g.reflected()).value == pytest.approx(-v, abs=1e-12)
    for _ in range(50):
        # gamma_s - delta_s keeps length >= 0.5 for every s, so the index is constant
        n = int(rng.integers(3, 40))
        d0 = np.cumsum(rng.normal(scale=0.3, size=(n, 2)), axis=0)
        d1 = np.cumsum(rng.normal(scale=0.3, size=(n, 2)), axis=0)
        theta = np.cumsum(rng.uniform(-1.2, 1.2, size=n))
        r0, r1 = rng.uniform(0.5, 2.0, size=n), rng.uniform(0.5, 2.0, size=n)
        u = np.column_stack([np.cos(theta), np.sin(theta)])
        values = set()
        for s in np.linspace(0, 1, 7):
            d = (1 - s) * d0 + s * d1
            g = d + ((1 - s) * r0 + s * r1)[:, None] * u
            values.add(angle_variation(Polyline(d, True), Polyline(g, True)).integer)
        assert len(values) == 1
    checked = 0
    while checked < 10:
        A = rng.normal(size=(2, 2)) * 1.5
        if abs(np.linalg.det(A - np.eye(2))) < 0.1 or abs(np.linalg.det(A)) < 0.1:
            continue
        v = fixed_point_index(linear_map(A), (0.0, 0.0), radius=0.5)
        assert v.integer == int(np.sign(np.linalg.det(A - np.eye(2))))
        checked += 1
    assert time.perf_counter() - t0 < 10.0


# ---------------------------------------------------------------------------
# 3

def star_loop(rng, center, r_lo, r_hi, n=24):
    t = np.sort(rng.uniform(0, TWO_PI, n))
    r = rng.uniform(r_lo, r_hi, n)
    return Polyline(np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)]), True)


def mirror_pairs(f, rng, centers, r_lo, r_hi, count=20):
    out = []
    for _ in range(2000):
        loop = star_loop(rng, centers(rng), r_lo, r_hi)
        try:
            a, b = mirror_index_check(f, loop)
        except WindingError:
            continue
        assert a.is_integer_certified and b.is_integer_certified
        out.append((a.integer, b.integer))
        if len(out) == count:
            return out
    raise AssertionError(f"could not draw {count} loops missing the fixed set of {f.name}")


IDENTITY_ISOTOPIC = [
    (lambda: normalized_standard(0.5), lambda g: g.uniform([-4, -1.5], [4, 1.5]), 0.2, 1.5),
    (lambda: rigid_disk_rotation(math.pi / 3), lambda g: g.uniform(-0.4, 0.4, 2), 0.05, 0.5),
    (lambda: disk_twist("1 + r**2"), lambda g: g.uniform(-0.4, 0.4, 2), 0.05, 0.5),
    (lambda: twist(SHIFTED), lambda g: g.uniform([-4, 0.0], [4, 1.0]), 0.05, 0.3),
    (lambda: wavy_twist(c=0.3), lambda g: g.uniform([-4, 0.35], [4, 0.65]), 0.05, 0.3),
]
REFLECTION_ISOTOPIC = [
    (lambda: drift_flip(0.5), lambda g: g.uniform([-2.5, -0.5], [2.5, 0.5]), 0.2, 1.5),
    (lambda: reflected_shear(), lambda g: g.uniform(-1, 1, 2), 0.2, 1.5),
]


@pytest.mark.acceptance(3, "mirror index: equal for identity-isotopic maps, opposite otherwise")
def test_criterion_03_mirror_index():
    rng = np.random.default_rng(3)
    nonzero = 0
    for make, centers, r_lo, r_hi in IDENTITY_ISOTOPIC:
        f = make()
        assert f.flags.isotopic_to_identity
        for a, b in mirror_pairs(f, rng, centers, r_lo, r_hi):
            assert a == b
            nonzero += a != 0
    negated_nonzero = 0
    for make, centers, r_lo, r_hi in REFLECTION_ISOTOPIC:
        f = make()
        assert not f.flags.isotopic_to_identity
        for a, b in mirror_pairs(f, rng, centers, r_lo, r_hi):
            assert a == -b
            negated_nonzero += a != 0
    # the checks must see loops that actually enclose fixed points
    assert nonzero > 0 and negated_nonzero > 0
    # at fixed points of the standard map and their mirror images
    g = normalized_standard(0.5)
    for z in ((0.0, 0.0), (math.pi, 0.0), (1.0 * math.pi, 0.0)):
        iz = reflect_xy(np.array(z))
        assert fixed_point_index(g, z).integer == fixed_point_index(g, iz).integer


# ---------------------------------------------------------------------------
# 4

def gauss_newton_fix(f, m, pts, iters=12):
    """Project points onto ``{p : f^m(I p) = p}`` with rank-one Gauss-Newton steps
    and a Jacobian chained from ``Df``; independent of the line tracer."""
    p = np.array(pts, dtype=float)
    flipI = np.diag([-1.0, 1.0])
    for _ in range(iters):
        q = reflect_xy(p)
        J = np.broadcast_to(flipI, (len(p), 2, 2)).copy()
        for _ in range(m):
            J = f.jac(q) @ J
            q = f(q)
        r = q - p
        r[:, 0] = np.mod(r[:, 0] + math.pi, TWO_PI) - math.pi
        if np.abs(r).max() < 1e-14:
            break
        # the solution set is a curve, so only the dominant singular direction is inverted
        u, sv, vt = np.linalg.svd(J - np.eye(2))
        p = p - (np.einsum("ni,ni->n", u[:, :, 0], r) / sv[:, 0])[:, None] * vt[:, 0, :]
    q = f.power(reflect_xy(p), m)
    r = q - p
    r[:, 0] = np.mod(r[:, 0] + math.pi, TWO_PI) - math.pi
    return p, np.linalg.norm(r, axis=1)


def line_normals(f, m, pts):
    """Unit normals to ``{f^m(I p) = p}``: the dominant right singular vector of
    ``D(f^m o I) - Id``, whose null direction is the tangent."""
    q = reflect_xy(pts)
    J = np.broadcast_to(np.diag([-1.0, 1.0]), (len(pts), 2, 2)).copy()
    for _ in range(m):
        J = f.jac(q) @ J
        q = f(q)
    _, _, vt = np.linalg.svd(J - np.eye(2))
    return vt[:, 0, :]


@pytest.mark.acceptance(4, "symmetry lines of the standard map, m <= 8: residual and Hausdorff")
def test_criterion_04_pushforward_lines():
    t0 = time.perf_counter()
    f = normalized_standard(0.5)
    base = base_lines(f)
    lines = [symmetry_line(f, m, base) for m in range(9)]
    elapsed = time.perf_counter() - t0
    rng = np.random.default_rng(4)
    for L in lines:
        for piece in L.pieces:
            pts = piece.points
            res = f.power(reflect_xy(pts), L.m) - pts
            res[:, 0] = np.mod(res[:, 0] + math.pi, TWO_PI) - math.pi
            assert np.linalg.norm(res, axis=1).max() <= 1e-8
            normal = line_normals(f, L.m, pts)
            start = pts + 1e-6 * rng.choice([-1.0, 1.0], len(pts))[:, None] * normal
            oracle, ores = gauss_newton_fix(f, L.m, start)
            assert ores.max() <= 1e-9
            d_ab, _ = cKDTree(oracle).query(pts)
            d_ba, _ = cKDTree(pts).query(oracle)
            assert max(d_ab.max(), d_ba.max()) <= 1e-7
    assert elapsed < 60.0


# ---------------------------------------------------------------------------
# 5

@pytest.mark.acceptance(5, "twist 2 pi y, N=12: catalog equals the Farey set on each component")
def test_criterion_05_farey_completeness():
    f = twist()
    cat = find_symmetric_periodic_points(f, 12)
    F = farey(12)
    assert len(cat.orbits) == 2 * len(F)
    for comp in (0, 1):
        ys = [o.seed.y for o in cat.orbits if comp in o.components]
        fracs = [Fraction(y).limit_denominator(12) for y in ys]
        assert all(abs(y - float(q)) <= 1e-10 for y, q in zip(ys, fracs))
        assert len(fracs) == len(set(fracs))
        assert set(fracs) == F
    for o in cat.orbits:
        assert o.residual <= 1e-10 and o.symmetric_residual <= 1e-10
        assert o.period == Fraction(o.seed.y).limit_denominator(12).denominator


# ---------------------------------------------------------------------------
# 6

def recheck(f, o, tol=1e-10):
    """Recompute both certificates and the lines the orbit meets, from the seed alone."""
    g = f.on_quotient()
    px = g.lattice[0]

    def dist(a, b):
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if px is not None:
            d[..., 0] = np.mod(d[..., 0] + 0.5 * px, px) - 0.5 * px
        return np.linalg.norm(d, axis=-1)

    z = np.array(o.seed)
    pts = [z]
    for _ in range(o.period):
        pts.append(g(pts[-1]))
    pts = np.array(pts)
    assert dist(pts[o.period], z) <= tol
    assert all(dist(pts[k], z) > tol for k in range(1, o.period))
    assert min(dist(pts[l], reflect_xy(z)) for l in range(o.period)) <= tol
    orbit = pts[:o.period]
    on0 = np.linalg.norm(lattice_difference(reflect_xy(orbit), orbit, g.lattice), axis=1) <= 1e-8
    on1 = np.linalg.norm(lattice_difference(g(reflect_xy(orbit)), orbit, g.lattice), axis=1) <= 1e-8
    return int(on0.sum()), int(on1.sum())


SOUNDNESS_MAPS = [
    ("twist", lambda: twist(), 12),
    ("shifted twist", lambda: twist(SHIFTED), 8),
    ("standard 0.5", lambda: normalized_standard(0.5), 14),
    ("standard 1.2", lambda: normalized_standard(1.2), 8),
    ("wavy twist", lambda: wavy_twist(c=0.3), 8),
    ("disk twist", lambda: disk_twist("1 + r**2"), 6),
    ("twist via J", twist_from_involution, 6),
]


@pytest.mark.acceptance(6, "every refined orbit passes both certificates and the parity rule")
@pytest.mark.parametrize("label,make,N", SOUNDNESS_MAPS, ids=[m[0] for m in SOUNDNESS_MAPS])
def test_criterion_06_soundness(label, make, N):
    f = make()
    cat = find_symmetric_periodic_points(f, N)
    assert cat.orbits
    for o in cat.orbits:
        hits0, hits1 = recheck(f, o)
        k, l = o.witness
        assert k - l == o.period
        assert ((k - l) % 2 == 1) == (k % 2 != l % 2)
        m, low = o.found_by
        assert (m - low) % o.period == 0
        # odd orbits meet both base lines once; even orbits meet one base line twice
        if o.period % 2:
            assert (hits0, hits1) == (1, 1), (o.as_dict()["seed"], o.period, hits0, hits1)
        else:
            assert (hits0, hits1) in ((2, 0), (0, 2)), (o.as_dict()["seed"], o.period, hits0, hits1)


@pytest.mark.acceptance(6, "every refined orbit passes both certificates and the parity rule")
def test_criterion_06_spectrum_and_disk_orbits():
    res = farey_orbit_spectrum(twist(SHIFTED), 6)
    for e in res.entries:
        recheck(twist(SHIFTED), e.orbit)
    for f in (rigid_disk_rotation(2.0), disk_from_involution()):
        for o in disk_symmetric_fixed_points(f):
            recheck(f, o)


# ---------------------------------------------------------------------------
# 7

@pytest.mark.acceptance(7, "boundary twist endpoints and the rational spectrum for q_max=6")
def test_criterion_07_twist_theorems():
    f = twist(SHIFTED)
    bt = boundary_twist(LiftedMap.of(f))
    assert bt.satisfied
    assert abs(bt.lower - (-math.pi / 2)) <= 1e-12
    assert abs(bt.upper - 3 * math.pi / 2) <= 1e-12
    res = farey_orbit_spectrum(f, 6)
    brute = sorted({Fraction(p, q) for q in range(1, 7) for p in range(-q, q + 1)
                    if Fraction(-1, 4) < Fraction(p, q) < Fraction(3, 4)})
    assert res.rationals == brute == admissible_rationals(-math.pi / 2, 3 * math.pi / 2, 6)
    assert not res.missing
    for pq in res.rationals:
        entries = [e for e in res.entries if e.rational == pq]
        assert sorted(e.component for e in entries) == [0, 1]
        for e in entries:
            assert e.orbit.period == pq.denominator
            assert e.orbit.residual <= 1e-10 and e.orbit.symmetric_residual <= 1e-10
            assert abs(e.rotation - float(pq)) <= 1e-10


# ---------------------------------------------------------------------------
# 8

@pytest.mark.acceptance(8, "census: zero for irrational rotation, strict growth for the standard map")
def test_criterion_08_census():
    t0 = time.perf_counter()
    empty = dichotomy_census(rigid_annulus_rotation(math.sqrt(2)), 20)
    assert [r.max_period for r in empty.rows] == list(range(2, 21))
    assert all(r.count_all == r.count_odd == r.count_interior == 0 for r in empty.rows)
    res = dichotomy_census(normalized_standard(0.5), 14)
    counts = res.column("count_all")
    assert [r.max_period for r in res.rows] == list(range(2, 15))
    assert all(b > a for a, b in zip(counts, counts[1:])), counts
    assert max(res.column("count_odd")) >= 1
    assert time.perf_counter() - t0 < 300.0


# ---------------------------------------------------------------------------
# 9

DISK_MAPS = [
    ("rotation pi/3", lambda: rigid_disk_rotation(math.pi / 3)),
    ("rotation 2.0", lambda: rigid_disk_rotation(2.0)),
    ("map via J", disk_from_involution),
    ("twist 1+r^2", lambda: disk_twist("1 + r**2")),
    ("flip", disk_flip),
]


@pytest.mark.acceptance(9, "disk maps: an interior symmetric fixed point with residual <= 1e-10")
@pytest.mark.parametrize("label,make", DISK_MAPS, ids=[m[0] for m in DISK_MAPS])
def test_criterion_09_disk(label, make):
    f = make()
    assert f.flags.area_preserving
    o = disk_symmetric_fixed_point(f)
    assert o.interior and o.residual <= 1e-10 and o.period == 1
    assert np.linalg.norm(f(np.array(o.seed)) - np.array(o.seed)) <= 1e-10
    assert abs(o.seed.x) <= 1e-12
    if not f.flags.orientation_preserving:
        assert o.found_by == (2, 0)
    if label == "map via J":
        ys = [p.seed.y for p in disk_symmetric_fixed_points(f)]
        assert any(abs(y - 0.2) <= 1e-10 for y in ys)


# ---------------------------------------------------------------------------
# 10

@pytest.mark.acceptance(10, "negative controls: free involution and rigid annulus rotation")
def test_criterion_10_negative_controls():
    J = InvolutionSpec(lambda p: np.column_stack([p[:, 0] + math.pi, 3.0 - p[:, 1]]),
                       InvariantDomain.closed_annulus(), name="free")
    assert not validate_involution(J).max_residual > 1e-10
    with pytest.raises(NoRootsError):
        base_lines(build_from_involution(J))
    f = rigid_annulus_rotation(math.pi / 7)
    rep = twist_criterion(f)
    assert len(rep.components) == 2
    assert not any(c.intersects for c in rep.components)
    assert all(c.witness is None and not c.fixed_points for c in rep.components)
    assert not find_symmetric_periodic_points(f, 1).orbits
