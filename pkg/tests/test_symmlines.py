import math
from fractions import Fraction

import numpy as np
import pytest

from revsym.domains import TWO_PI, InvariantDomain, reflect_xy
from revsym.revmaps import (InvolutionSpec, build_from_involution, from_expressions,
                            normalized_standard, rigid_disk_rotation, twist, wavy_twist)
from revsym.symmlines import (NoRootsError, RefinementBudgetError, base_lines, dedupe_orbits,
                              find_symmetric_periodic_points, hausdorff, intersect_lines,
                              line_residual, refine_symmetric_orbit, symmetry_line)


def farey(N):
    return sorted({Fraction(p, q) for q in range(1, N + 1) for p in range(0, q + 1)})


def test_twist_base_lines():
    f = twist()
    base = base_lines(f)
    for piece in base.gamma1.pieces:
        x, y = piece.points[:, 0], piece.points[:, 1]
        d = np.mod(x - math.pi * y, math.pi)
        assert np.all((d < 1e-12) | (d > math.pi - 1e-12))
    assert base.gamma0.m == 0 and base.gamma1.m == 1
    assert base.gamma1.provenance == "base_fix_fI"


def test_identity_base_line_is_the_axis():
    ident = from_expressions("x", "y", InvariantDomain.cylinder(0, 1), x_period=TWO_PI)
    base = base_lines(ident)
    g0 = np.vstack([p.points for p in base.gamma0.pieces])
    g1 = np.vstack([p.points for p in base.gamma1.pieces])
    assert hausdorff(g0, g1, (TWO_PI, None)) < 1e-2
    assert line_residual(ident, 1, g1).max() < 1e-10
    cat = find_symmetric_periodic_points(ident, 4)
    assert cat.degenerate and not cat.orbits


def test_free_involution_has_no_roots():
    ann = InvariantDomain.closed_annulus()
    J = InvolutionSpec(lambda p: np.column_stack([p[:, 0] + math.pi, 3.0 - p[:, 1]]), ann,
                       orientation_reversing=True, name="free")
    f = build_from_involution(J)
    with pytest.raises(NoRootsError):
        base_lines(f)


def test_symmetry_line_zero_is_base():
    f = twist()
    base = base_lines(f)
    assert symmetry_line(f, 0, base) is base.gamma0


def test_twist_line_two():
    f = twist()
    L = symmetry_line(f, 2, base_lines(f))
    for piece in L.pieces:
        x, y = piece.points[:, 0], piece.points[:, 1]
        d = np.mod(x - TWO_PI * y, math.pi)
        assert np.all((d < 1e-12) | (d > math.pi - 1e-12))
    assert L.provenance == "pushforward(1,0)"
    assert L.max_residual <= 1e-8


@pytest.mark.parametrize("m", range(0, 9))
def test_standard_map_line_certified(m):
    g = normalized_standard(0.5)
    L = symmetry_line(g, m, base_lines(g))
    for piece in L.pieces:
        assert line_residual(g, m, piece.points).max() <= 1e-8


def test_pushforward_consistency():
    g = normalized_standard(0.5)
    base = base_lines(g)
    for m in (2, 3, 4, 5):
        j, i = divmod(m, 2)
        L = symmetry_line(g, m, base)
        for piece in L.pieces:
            br = base.branches[i][piece.branch]
            assert np.allclose(piece.points, g.power(br.fn(piece.s), j), atol=1e-14)


def test_refinement_budget():
    g = normalized_standard(3.5)
    with pytest.raises(RefinementBudgetError) as info:
        symmetry_line(g, 14, base_lines(g), budget=20_000)
    assert info.value.m == 14


def test_intersections_of_twist_lines():
    f = twist()
    base = base_lines(f)
    L2 = symmetry_line(f, 2, base)
    ys = sorted({round(c.point.y, 9) for c in intersect_lines(L2, base.gamma0, f.lattice)
                 if abs(math.remainder(c.point.x, TWO_PI)) < 1e-9})
    assert 0.0 in ys and 1.0 in ys
    fixed = [c for c in intersect_lines(base.gamma1, base.gamma0, f.lattice)
             if abs(c.point.x) < 1e-9 and abs(c.point.y) < 1e-9]
    assert fixed and fixed[0].period == 1 and fixed[0].parity == "odd"
    with pytest.raises(ValueError):
        intersect_lines(base.gamma0, base.gamma0)


def test_refine_examples():
    f = twist()
    o = refine_symmetric_orbit(f, (0.0, 0.5), (2, 0))
    assert o.period == 2 and o.residual < 1e-12 and o.parity == "even"
    assert np.allclose(o.orbit_points, [[0.0, 0.5], [math.pi, 0.5]])
    o3 = refine_symmetric_orbit(f, (0.0, 1 / 3 + 1e-4), (3, 0))
    assert o3.period == 3 and abs(o3.seed.y - 1 / 3) < 1e-12
    r = rigid_disk_rotation(math.pi / 3)
    c = refine_symmetric_orbit(r, (0.0, 0.01), (1, 0))
    assert c.period == 1 and c.symmetric_residual == 0 and np.allclose(c.seed, (0, 0))


def test_refined_orbit_is_certified_and_minimal():
    g = normalized_standard(0.5)
    cat = find_symmetric_periodic_points(g, 10)
    assert cat.orbits
    for o in cat.orbits:
        assert o.residual <= 1e-10 and o.symmetric_residual <= 1e-10
        z = np.array(o.seed)
        for d in range(1, o.period):
            if o.period % d == 0:
                gap = g.domain.difference(g.power(z, d), z)
                assert np.linalg.norm(gap) > 1e-10
        assert (o.period % 2 == 1) == ((o.witness[0] - o.witness[1]) % 2 == 1)


def test_twist_catalog_matches_farey_n5():
    f = twist()
    cat = find_symmetric_periodic_points(f, 5)
    levels = {}
    for o in cat.orbits:
        q = Fraction(o.seed.y).limit_denominator(5)
        assert abs(o.seed.y - q) < 1e-12
        assert o.period == q.denominator or (q in (0, 1) and o.period == 1)
        levels.setdefault(q, []).append(o)
    assert sorted(levels) == farey(5)
    assert all(len(v) == 2 for v in levels.values())


def test_catalog_sorted_by_period_then_height():
    cat = find_symmetric_periodic_points(normalized_standard(0.5), 6)
    keys = [(o.period, o.seed.y) for o in cat.orbits]
    assert keys == sorted(keys)


def test_dedupe_examples():
    f = twist()
    a = refine_symmetric_orbit(f, (0.0, 0.5), (2, 0))
    b = refine_symmetric_orbit(f, (math.pi, 0.5), (2, 0))
    assert len(dedupe_orbits([a, b], f.lattice)) == 1
    third = refine_symmetric_orbit(f, (0.0, 1 / 3), (3, 0))
    two_thirds = refine_symmetric_orbit(f, (0.0, 2 / 3), (3, 0))
    assert len(dedupe_orbits([third, two_thirds], f.lattice)) == 2
    g = normalized_standard(0.5)
    cat = find_symmetric_periodic_points(g, 5)
    o = next(o for o in cat.orbits if o.period == 5)
    mirrored = type(o)(**{**o.__dict__, "seed": type(o.seed)(*reflect_xy(np.array(o.seed))),
                          "orbit_points": reflect_xy(o.orbit_points)})
    assert len(dedupe_orbits([o, mirrored], g.lattice)) == 1


def test_curved_lines_of_wavy_twist():
    f = wavy_twist(c=0.3)
    cat = find_symmetric_periodic_points(f, 4)
    # conjugate to the twist, and the bend fixes heights on the axis x = 0
    assert len(cat.orbits) == 2 * len(farey(4))
    on_axis = sorted(Fraction(o.seed.y).limit_denominator(4) for o in cat.orbits
                     if abs(o.seed.x) < 1e-12)
    assert sorted(set(on_axis)) == farey(4)
    for o in cat.orbits:
        assert o.residual <= 1e-10 and o.symmetric_residual <= 1e-10


def test_orientation_reversing_maps_are_refused():
    from revsym.revmaps import disk_flip
    with pytest.raises(ValueError):
        find_symmetric_periodic_points(disk_flip(), 3)
