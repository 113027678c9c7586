import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eigencrit.asymptotics import StripReference
from eigencrit.discretization import build_grid
from eigencrit.fields import (FieldError, ScalarField, boundary_saddle_check, classify,
                              directional_field, find_critical_points, level_curvature)
from eigencrit.contours import extract_level_curve
from eigencrit.geometry import DomainSpec, make_family

from conftest import mode_field

H = 1 / 64


@pytest.fixture(scope="module")
def rect_grid():
    return build_grid(make_family(DomainSpec("rectangle", N=4)), H)


@pytest.fixture(scope="module")
def ellipse_grid():
    return build_grid(make_family(DomainSpec("ellipse", N=4)), 1 / 32)


# classify ---------------------------------------------------------------------


def test_classify_examples():
    assert classify(np.diag([-1.0, -2.0])) == ("max", 1)
    assert classify(np.diag([1.0, 2.0])) == ("min", 1)
    assert classify(np.diag([1.0, -1.0])) == ("saddle", -1)
    assert classify(np.diag([1.0, 1e-14]))[0] == "degenerate"
    assert classify(np.zeros((2, 2)))[0] == "degenerate"


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), c=st.floats(-10, 10),
       s=st.floats(0.01, 100))
def test_classify_scale_invariant(a, b, c, s):
    H = np.array([[a, b], [b, c]])
    assert classify(H) == classify(s * H)


# interpolation -----------------------------------------------------------------


def test_polynomial_derivatives_near_boundary(ellipse_grid):
    f = lambda x, y: x ** 2 * y - 3 * x * y ** 2 + y
    fld = ScalarField.from_function(ellipse_grid, f)
    dom = ellipse_grid.domain
    xs = np.linspace(-1.5, 1.5, 13)
    ys = 0.5 * (dom.f1(xs) + dom.f2(xs))
    v, ux, uy, uxx, uxy, uyy = fld.derivatives(xs, ys)
    assert np.allclose(v, f(xs, ys), atol=1e-6)
    assert np.allclose(ux, 2 * xs * ys - 3 * ys ** 2, atol=1e-4)
    assert np.allclose(uy, xs ** 2 - 6 * xs * ys + 1, atol=1e-4)
    assert np.allclose(uxy, 2 * xs - 6 * ys, atol=1e-2)


def test_nodal_derivatives_of_mode(rect4_field):
    nd = rect4_field.nodal_derivatives()
    g = rect4_field.grid
    X, Y = np.meshgrid(g.xs, g.ys, indexing="ij")
    ux = -4 * (math.pi / 2) * np.cos(math.pi * X / 2) * np.sin(math.pi * Y)
    sel = g.unknown
    assert np.abs(nd["ux"][sel] - ux[sel]).max() <= 2e-2 * np.abs(ux).max()


def test_shape_mismatch(rect_grid):
    with pytest.raises(FieldError):
        ScalarField(rect_grid, np.zeros(5))


# critical points --------------------------------------------------------------------


def test_rectangle_mode_two_critical_points(rect4_field):
    cps = find_critical_points(rect4_field)
    assert [c.kind for c in cps] == ["min", "max"]
    assert np.allclose([[c.x, c.y] for c in cps], [[1.0, 0.5], [3.0, 0.5]], atol=H)
    assert cps[0].value == pytest.approx(-cps[1].value, rel=1e-6)


def test_rectangle_mode_three_critical_points():
    f = mode_field("rectangle", 4, H, 3)
    cps = find_critical_points(f)
    assert len(cps) == 3
    assert np.allclose([c.x for c in cps], [2 / 3, 2.0, 10 / 3], atol=H)
    kinds = [c.kind for c in cps]
    assert kinds in (["max", "min", "max"], ["min", "max", "min"])


def test_saddle_field(rect_grid):
    f = ScalarField.from_function(rect_grid, lambda x, y: (x - 2) ** 2 - (y - 0.5) ** 2)
    cps = find_critical_points(f)
    assert len(cps) == 1 and cps[0].kind == "saddle" and cps[0].index == -1
    assert cps[0].location == pytest.approx([2.0, 0.5], abs=1e-8)


def test_margin_too_small(rect4_field):
    with pytest.raises(FieldError):
        find_critical_points(rect4_field, margin=H)


# curvature ----------------------------------------------------------------------------


def test_curvature_of_circles(rect_grid):
    f = ScalarField.from_function(rect_grid, lambda x, y: 1 - (x - 2) ** 2 - (y - 0.5) ** 2)
    for r in (0.2, 0.3, 0.4):
        for t in (0.3, 1.7, 4.0):
            p = (2 + r * math.cos(t), 0.5 + r * math.sin(t))
            assert level_curvature(f, p) == pytest.approx(1 / r, rel=1e-4)


class _Paraboloid:
    """Closed-form 1 - x^2 - y^2."""

    def derivatives(self, x, y):
        return 1 - x * x - y * y, -2 * x, -2 * y, -2.0, 0.0, -2.0


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0.01, 10), t=st.floats(0, 2 * math.pi))
def test_curvature_formula_exact(r, t):
    p = (r * math.cos(t), r * math.sin(t))
    assert level_curvature(_Paraboloid(), p) == pytest.approx(1 / r, rel=1e-12)


def test_curvature_flat_and_strip():
    ref = StripReference(1.0)
    flat = type("Flat", (), {"derivatives": lambda self, x, y: (y, 0.0, 1.0, 0.0, 0.0, 0.0)})()
    assert level_curvature(flat, (0.3, 0.3)) == 0.0
    x, y = 1.0, 0.25
    s, c = math.sin(math.pi * y), math.cos(math.pi * y)
    ux, uy = s, math.pi * x * c
    uxx, uxy, uyy = 0.0, math.pi * c, -math.pi ** 2 * x * s
    K = -(uyy * ux ** 2 - 2 * uxy * ux * uy + uxx * uy ** 2) / math.hypot(ux, uy) ** 3
    assert level_curvature(ref, (x, y)) == pytest.approx(K, rel=1e-12)


def test_curvature_at_critical_point_raises(rect_grid):
    f = ScalarField.from_function(rect_grid, lambda x, y: (x - 2) ** 2 + (y - 0.5) ** 2)
    with pytest.raises(FieldError, match="critical point"):
        level_curvature(f, (2.0, 0.5))


# directional fields ---------------------------------------------------------------


def test_directional_field_values(rect_grid):
    f = ScalarField.from_function(rect_grid, lambda x, y: np.sin(x) * np.sin(math.pi * y))
    t = 0.7
    d = directional_field(f, t)
    nodes = rect_grid.nodes
    x, y = nodes[:, 0], nodes[:, 1]
    expect = (math.cos(t) * np.cos(x) * np.sin(math.pi * y)
              + math.sin(t) * math.pi * np.sin(x) * np.cos(math.pi * y))
    assert np.abs(rect_grid.from_lattice(d.values) - expect).max() < 2e-3
    assert d.theta == t and d.parent is f


def test_directional_theta_range(rect4_field):
    with pytest.raises(FieldError):
        directional_field(rect4_field, -0.1)


def test_directional_rectangle_theta_zero(rect4_field):
    # u_x of the mode vanishes on x = 1 and x = 3; the right region x > 1/2 + 2 sees one line
    d = directional_field(rect4_field, 0.0)
    curves = extract_level_curve(d, side="right", cut=2.5)
    assert len(curves) == 1 and curves[0].hits == 2
    assert np.abs(curves[0].points[:, 0] - 3.0).max() <= H


def test_directional_strip_theta_half_pi(rect_grid):
    A0 = 1.0
    f = ScalarField.from_function(rect_grid, lambda x, y: A0 * (x - 2) * np.sin(math.pi * y))
    # the closed form does not vanish at x = 4, so its boundary data cannot be used
    d = directional_field(f, math.pi / 2, boundary=False)
    curves = extract_level_curve(d, side="right", cut=2.5)
    assert len(curves) == 1
    assert np.abs(curves[0].points[:, 1] - 0.5).max() <= H ** 2


def test_directional_strip_cot_relation(rect_grid):
    # zero of cos(t) sin(pi y) + sin(t) pi x cos(pi y) at x = 1/2 from the centre
    t = math.pi / 4
    f = ScalarField.from_function(rect_grid, lambda x, y: (x - 2) * np.sin(math.pi * y))
    d = directional_field(f, t, boundary=False)
    curves = extract_level_curve(d, side="right", cut=2.1)
    pts = curves[0].points
    y_at = np.interp(2.5, *pts[np.argsort(pts[:, 0])].T)
    from scipy.optimize import brentq
    y_star = brentq(lambda y: math.cos(t) * math.sin(math.pi * y)
                    + math.sin(t) * math.pi * 0.5 * math.cos(math.pi * y), 0.5, 0.99)
    assert y_at == pytest.approx(y_star, abs=5e-3)
    # the relation cot(t) = -(pi x) cot(pi y) at that point
    assert 1 / math.tan(t) == pytest.approx(-math.pi * 0.5 / math.tan(math.pi * y_star))


# boundary saddles -------------------------------------------------------------------


def test_rectangle_boundary_saddles(rect4_field):
    curve = extract_level_curve(rect4_field)[0]
    reps = boundary_saddle_check(rect4_field, curve)
    # u = -4 sin(pi x/2) sin(pi y): u_xy at (2, 0) is 4 (pi/2) pi cos(pi) cos(0) ... = 2 pi^2
    expect = 2 * math.pi ** 2
    assert all(r.is_saddle for r in reps)
    assert sorted(r.uxy for r in reps) == pytest.approx([-expect, expect], rel=1e-2)
    for r in reps:
        assert r.det == pytest.approx(-r.uxy ** 2, rel=1e-2)


def test_strip_boundary_hessian_closed_form():
    ref = StripReference(1.7)
    H0 = ref.hessian((0.0, 0.0))
    assert np.linalg.det(H0) == pytest.approx(-(1.7 * math.pi) ** 2)


def test_boundary_saddle_needs_two_contacts(rect4_field):
    class C:
        contacts = np.zeros((1, 2))
    with pytest.raises(FieldError):
        boundary_saddle_check(rect4_field, C())
