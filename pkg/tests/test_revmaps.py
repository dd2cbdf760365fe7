import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revsym.domains import TWO_PI, DomainError, InvariantDomain, reflect_xy
from revsym.revmaps import (BUILTINS, InvolutionSpec, MapError, MapFlags, build_from_involution,
                            builtin, from_expressions, iterate, map_power, newton_inverse,
                            normalized_standard, orbit, rigid_disk_rotation, twist,
                            validate_area, validate_involution, validate_inverse,
                            validate_reversibility, wavy_twist)

DEFAULT_PARAMS = {
    "twist": {}, "rigid_disk_rotation": {"alpha": math.pi / 3},
    "rigid_annulus_rotation": {"alpha": 0.7}, "normalized_standard": {"K": 0.5},
    "wavy_twist": {"c": 0.3}, "disk_twist": {"tau": "6*(r**2 - 0.04)"}, "disk_flip": {},
    "reflected_shear": {}, "drift_flip": {"c": 0.5},
}


def all_builtins():
    return [builtin(name, **DEFAULT_PARAMS[name]) for name in BUILTINS]


def test_twist_from_involution():
    strip = InvariantDomain.strip()
    J = InvolutionSpec(lambda p: np.column_stack([TWO_PI * p[:, 1] - p[:, 0], p[:, 1]]), strip)
    f = build_from_involution(J, x_period=TWO_PI)
    pts = strip.halton(200)
    assert np.allclose(f(pts), np.column_stack([pts[:, 0] + TWO_PI * pts[:, 1], pts[:, 1]]))
    # Fix J is the line x = pi y
    line = np.column_stack([math.pi * pts[:, 1], pts[:, 1]])
    assert np.allclose(J(line), line)
    assert f.flags.area_preserving and f.flags.orientation_preserving


def test_reflection_as_involution_gives_identity():
    d = InvariantDomain.cylinder(0, 1)
    f = build_from_involution(InvolutionSpec(reflect_xy, d))
    pts = d.halton(100)
    assert np.array_equal(f(pts), pts)


def test_shear_from_odd_involution():
    K = 0.7
    d = InvariantDomain.cylinder(-2, 2)
    J = InvolutionSpec(lambda p: np.column_stack([-p[:, 0], p[:, 1] + K * np.sin(p[:, 0])]), d)
    f = build_from_involution(J, x_period=TWO_PI)
    pts = d.halton(500)
    assert np.allclose(f(pts), np.column_stack([pts[:, 0], pts[:, 1] - K * np.sin(pts[:, 0])]))
    assert validate_reversibility(f, 2000, 1e-12).passed


def test_even_perturbation_is_not_an_involution():
    d = InvariantDomain.cylinder(-2, 2)
    J = InvolutionSpec(lambda p: np.column_stack([-p[:, 0], p[:, 1] + np.cos(p[:, 0])]), d)
    assert not validate_involution(J, 1000).passed
    with pytest.raises(MapError):
        build_from_involution(J)


def test_normalized_standard_zero_is_unit_twist():
    g = normalized_standard(0.0)
    f = twist(lambda y: y, domain=InvariantDomain.cylinder())
    pts = InvariantDomain.cylinder().halton(300)
    assert np.allclose(g(pts), f(pts), atol=1e-15)


def test_normalized_standard_is_the_conjugated_standard_map():
    K = 0.5
    g = normalized_standard(K)
    pts = InvariantDomain.cylinder(-3, 3).halton(500)

    def f_K(p):
        s = K * np.sin(p[:, 0])
        return np.column_stack([p[:, 0] + p[:, 1] + s, p[:, 1] + s])

    def h(p):
        return np.column_stack([p[:, 0], p[:, 1] + 0.5 * K * np.sin(p[:, 0])])

    def h_inv(p):
        return np.column_stack([p[:, 0], p[:, 1] - 0.5 * K * np.sin(p[:, 0])])

    def R(p):
        return np.column_stack([-p[:, 0], p[:, 1] + K * np.sin(p[:, 0])])

    assert np.allclose(g(pts), h(f_K(h_inv(pts))), atol=1e-13)
    # h conjugates the classical reversor R to the plain reflection
    assert np.allclose(h(R(pts)), reflect_xy(h(pts)), atol=1e-14)
    assert np.allclose(g.inv(g(pts)), pts, atol=1e-13)
    assert np.allclose(np.linalg.det(g.jac(pts)), 1.0, atol=1e-14)


def test_rigid_disk_rotation_order_six():
    f = rigid_disk_rotation(math.pi / 3)
    pts = f.domain.halton(300)
    assert np.abs(f.power(pts, 6) - pts).max() < 1e-12


def test_iterate_examples():
    f = twist()
    p = iterate(f, (0.0, 0.5), 2)
    assert p.x == pytest.approx(TWO_PI) and p.y == 0.5
    assert iterate(f, (0.3, 0.2), 0) == (0.3, 0.2)
    g = normalized_standard(0.5)
    q = (1.0, 0.4)
    assert np.allclose(iterate(g, iterate(g, q, 1), -1), q, atol=1e-10)
    assert orbit(g, q, 5).shape == (6, 2)


def test_orbit_leaving_bounded_domain():
    f = from_expressions("x + 0.5", "y", InvariantDomain.closed_disk())
    with pytest.raises(DomainError):
        orbit(f, (0.0, 0.0), 3)


@pytest.mark.parametrize("k", range(1, 9))
def test_iterates_stay_reversible(k):
    g = normalized_standard(0.5)
    assert validate_reversibility(g, 2000, 1e-10, power=k).passed
    assert validate_reversibility(map_power(twist(), k), 2000, 1e-10).passed


@pytest.mark.parametrize("f", all_builtins(), ids=lambda f: f.name)
def test_builtins_validate(f):
    assert validate_reversibility(f, 2000).passed
    assert validate_inverse(f, 2000).passed
    # f o I is an involution whenever f is reversible
    assert validate_involution(f, 2000).passed
    area = validate_area(f, 2000, tol=1e-7)
    assert area.passed == f.flags.area_preserving


def test_wavy_twist_is_reversible_but_not_symplectic():
    f = wavy_twist(c=0.3)
    assert validate_reversibility(f).passed
    assert not validate_area(f).passed
    assert validate_area(wavy_twist(c=0.0)).passed


def test_validation_report_pass_rule():
    rep = validate_reversibility(twist(), 100, tol=1e-10)
    assert rep.passed == (rep.max_residual <= rep.tolerance)
    assert rep.n_samples == 100 and rep.as_dict()["passed"] == rep.passed


def test_builtin_errors():
    with pytest.raises(MapError):
        builtin("henon")
    with pytest.raises(MapError):
        builtin("normalized_standard", K=5.0)
    with pytest.raises(MapError):
        builtin("twist", bogus=1)
    with pytest.raises(MapError):
        wavy_twist(c=0.7)


def test_newton_inverse_matches_closed_form():
    g = normalized_standard(0.9)
    h = from_expressions("x + y + 0.45*sin(x)", "y + 0.45*(sin(x) + sin(x + y + 0.45*sin(x)))",
                         InvariantDomain.cylinder(), x_period=TWO_PI)
    pts = InvariantDomain.cylinder(-2, 2).halton(200)
    assert np.allclose(h(pts), g(pts), atol=1e-14)
    assert np.allclose(newton_inverse(h, pts), g.inv(pts), atol=1e-10)


def test_reflection_of_fixed_point_is_fixed():
    # f(z) = z  implies  f(I z) = I z, checked on the standard-map fixed points
    g = normalized_standard(0.5)
    for z in ((0.0, 0.0), (math.pi, 0.0)):
        z = np.array(z)
        assert np.linalg.norm(g.domain.difference(g(z), z)) < 1e-14
        iz = reflect_xy(z)
        assert np.linalg.norm(g.domain.difference(g(iz), iz)) < 1e-14


def test_flags_and_describe():
    f = builtin("reflected_shear")
    assert f.flags == MapFlags(False, True, False)
    d = builtin("twist").describe()
    assert d["name"] == "twist" and d["domain"]["kind"] == "cylinder"


def test_strip_twist_descends_to_cylinder():
    f = twist(domain=InvariantDomain.strip())
    g = f.on_quotient()
    assert g.domain.kind.value == "cylinder"


@given(st.floats(-3.5, 3.5), st.floats(-10, 10), st.floats(-10, 10))
def test_standard_map_reversible_pointwise(K, x, y):
    g = normalized_standard(K)
    p = np.array([x, y])
    assert np.allclose(g(reflect_xy(p)), reflect_xy(g.inv(p)), atol=1e-12)
