import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eigencrit.asymptotics import (AsymptoticsError, RectangleReference, StripReference,
                                   check_growth_bounds, estimate_A0, fit_a, fourier_coefficient,
                                   golden_section, landmarks, model_eigenvalue, nodal_center,
                                   small_x_bound_check, sup_error_window, verify_strip_uniqueness)
from eigencrit.discretization import build_grid
from eigencrit.fields import ScalarField
from eigencrit.geometry import DomainSpec, make_family

from conftest import mode_field

PI = math.pi


# Fourier coefficients ---------------------------------------------------------------


def test_strip_reference_coefficients():
    ref = StripReference(1.0)
    x = np.array([-1.3, 0.2, 0.7, 2.0])
    assert fourier_coefficient(ref, 1, x) == pytest.approx(x, abs=1e-10)
    assert fourier_coefficient(ref, 2, x) == pytest.approx(0.0, abs=1e-10)
    assert abs(fourier_coefficient(ref, 3, 0.7)) <= 1e-8


def test_rectangle_mode_coefficients(rect4_field):
    x = np.array([0.5, 1.0, 1.7, 2.9, 3.5])
    A1 = fourier_coefficient(rect4_field, 1, x)
    assert A1 == pytest.approx(-4 * np.sin(PI * x / 2), abs=5e-3)
    for j in (2, 3, 4):
        assert np.abs(fourier_coefficient(rect4_field, j, x)).max() <= 5e-3


def test_parseval_on_slices():
    g = build_grid(make_family(DomainSpec("rectangle", N=2)), 1 / 128)
    f = ScalarField.from_function(g, lambda x, y: np.exp(x) * y * (1 - y) * (1 + y))
    for x in (0.5, 1.2):
        A = np.array([fourier_coefficient(f, j, x) for j in range(1, 33)])
        t = np.linspace(0, 1, 20001)
        u = np.exp(x) * t * (1 - t) * (1 + t)
        integral = 2 * np.trapezoid(u * u, t)
        assert np.sum(A ** 2) == pytest.approx(integral, rel=1e-6)


def test_fourier_index_and_range(rect4_field):
    with pytest.raises(AsymptoticsError):
        fourier_coefficient(rect4_field, 0, 1.0)
    with pytest.raises(AsymptoticsError):
        fourier_coefficient(rect4_field, 1, 5.0)


# strip uniqueness ------------------------------------------------------------------------


def test_strip_uniqueness_reference():
    rep = verify_strip_uniqueness(StripReference(2.0), (-2, 2), 5, tol=1e-8)
    assert rep.passed
    assert rep.c1 == pytest.approx(2.0, abs=1e-9) and abs(rep.d1) <= 1e-8


class _Injected:
    """``x sin(pi y) + sin(2 pi y) sinh(sqrt(3) pi x)``: violates A_2 = 0."""

    domain = None

    def __call__(self, x, y):
        return x * np.sin(PI * y) + np.sin(2 * PI * y) * np.sinh(math.sqrt(3) * PI * x)


def test_strip_uniqueness_detects_violation():
    rep = verify_strip_uniqueness(_Injected(), (-2, 2), 5, tol=1e-8)
    assert not rep.passed and 2 in rep.failing
    assert rep.max_abs[2] > 1.0


@pytest.mark.slow
def test_strip_uniqueness_ellipse_16():
    f = mode_field("ellipse", 16, 1 / 64, 2)
    c = nodal_center(f)
    rep = verify_strip_uniqueness(f, (-2, 2), 5, tol=1e-2, center=c, rel_tol=0.1)
    assert rep.passed
    # A_1 bends over the window at this N, so its affine slope matches the
    # one-term window fit rather than the slope at the centre
    plain = estimate_A0(f, 2.0, c, odd_terms=1)
    assert rep.c1 == pytest.approx(plain.A0, rel=0.05)
    assert rep.c1 < estimate_A0(f, 2.0, c).A0


# A0 and window errors -----------------------------------------------------------------


def test_estimate_A0_rectangle(rect4_field):
    est = estimate_A0(rect4_field, k=1.0, center=2.0)
    # u = 4 sin(pi (x - 2)/2) sin(pi y) near the centre: slope 2 pi
    assert est.A0 == pytest.approx(2 * PI, rel=1e-3)


def test_estimate_A0_plain_fit_is_flagged_on_long_window(rect4_field):
    est = estimate_A0(rect4_field, k=2.0, center=2.0, odd_terms=1)
    assert est.A0 < 2 * PI and est.flagged


def test_estimate_A0_strip_self_fit():
    g = build_grid(make_family(DomainSpec("rectangle", N=6)), 1 / 32)
    f = ScalarField.from_function(g, lambda x, y: (x - 3) * np.sin(PI * y))
    est = estimate_A0(f, 2.0, 3.0)
    assert est.A0 == pytest.approx(1.0, rel=1e-9) and not est.flagged


@settings(max_examples=10, deadline=None)
@given(s=st.floats(0.1, 10.0))
def test_estimate_A0_scale_equivariant(s):
    f = mode_field("rectangle", 4, 1 / 64, 2)
    g = f.grid
    base = estimate_A0(f, 1.0, 2.0).A0
    scaled = ScalarField(g, s * f.values)
    assert estimate_A0(scaled, 1.0, 2.0).A0 == pytest.approx(s * base, rel=1e-9)


def test_estimate_A0_rejects_small_window(rect4_field):
    with pytest.raises(AsymptoticsError):
        estimate_A0(rect4_field, k=0.5, center=2.0)


def test_sup_error_reference_vs_itself():
    assert max(sup_error_window(StripReference(1.5), StripReference(1.5)).values()) == 0.0


def test_sup_error_sampled_reference():
    g = build_grid(make_family(DomainSpec("rectangle", N=6)), 1 / 32)
    f = ScalarField.from_function(g, lambda x, y: 1.5 * (x - 3) * np.sin(PI * y))
    err = sup_error_window(f, StripReference(1.5), 2.0, 3.0)
    # node values are exact; derivatives carry the interpolation error
    scale = 1.5 * 2 * PI ** 2
    assert err[0] <= 1e-12 and err[1] <= 1e-3 * scale and err[2] <= 1e-2 * scale


def test_sup_error_invariant_under_shift():
    g1 = build_grid(make_family(DomainSpec("rectangle", N=6)), 1 / 32)
    f1 = ScalarField.from_function(g1, lambda x, y: np.sin(PI * (x - 3) / 6) * np.sin(PI * y))
    dom2 = make_family(DomainSpec("custom_height_functions",
                                  heights=(lambda x: 0 * x, lambda x: 0 * x + 1, 1.0, 7.0)))
    g2 = build_grid(dom2, 1 / 32)
    f2 = ScalarField.from_function(g2, lambda x, y: np.sin(PI * (x - 4) / 6) * np.sin(PI * y))
    e1 = estimate_A0(f1, 2.0, 3.0)
    e2 = estimate_A0(f2, 2.0, 4.0)
    assert e1.A0 == pytest.approx(e2.A0, rel=1e-9)
    s1 = sup_error_window(f1, StripReference(e1.A0), 2.0, 3.0)
    s2 = sup_error_window(f2, StripReference(e2.A0), 2.0, 4.0)
    for k in (0, 1, 2):
        assert s1[k] == pytest.approx(s2[k], rel=1e-6, abs=1e-12)


@pytest.mark.slow
def test_sup_error_rectangles_decrease():
    errs = []
    for N in (8, 16, 32):
        f = mode_field("rectangle", N, 1 / 32, 2)
        c = N / 2
        errs.append(sup_error_window(f, StripReference(estimate_A0(f, 2.0, c).A0), 2.0, c)[0])
    assert errs[0] > errs[1] > errs[2]


# growth bounds --------------------------------------------------------------------------


def test_growth_bounds_strip():
    b = check_growth_bounds(StripReference(1.0))
    assert b.C_upper == pytest.approx(1.0, abs=0.02) and b.C_upper <= 1.0
    assert b.C_lower == pytest.approx(1.0) and b.ok


def test_growth_bounds_rectangle():
    f = mode_field("rectangle", 8, 1 / 32, 2)
    b = check_growth_bounds(f, center=4.0)
    # u = 8 sin(pi (x - 4)/4) sin(pi y): value at x = 5 is 8 sin(pi/4), slope 2 pi at x = 4
    assert b.C_lower == pytest.approx(8 * math.sin(PI / 4), rel=1e-3)
    assert b.C_lower == pytest.approx(2 * PI, rel=0.12)


# eigenvalue expansion ------------------------------------------------------------------


def test_fit_a_rectangle_exact_spectrum():
    from eigencrit.eigensolver import rectangle_spectrum_oracle
    table = {}
    for N in (8, 16, 32):
        # modes (m, 1) for m <= 3 are the three lowest when N >= 8
        for m, lam in zip((1, 2, 3), rectangle_spectrum_oracle(N, 1 / 64, 3)):
            table[(m, N)] = lam
    fit = fit_a(table, 0.125, h=1 / 64)
    assert fit.a == pytest.approx(0.0, abs=1e-9) and fit.boundary_hit
    assert max(abs(r) for r in fit.residuals.values()) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.0, 0.5))
def test_fit_a_synthetic_recovery(a):
    table = {(m, N): float(model_eigenvalue(m, N, a)) for m in (1, 2, 3) for N in (8, 16, 32)}
    assert fit_a(table, 0.5).a == pytest.approx(a, abs=1e-8)


def test_fit_a_clamped():
    table = {(m, N): float(model_eigenvalue(m, N, 0.3)) for m in (1, 2, 3) for N in (8, 16, 32)}
    fit = fit_a(table, 0.125)
    assert fit.a == pytest.approx(0.125) and fit.boundary_hit


def test_fit_a_empty():
    with pytest.raises(AsymptoticsError):
        fit_a({}, 0.1)


def test_golden_section():
    assert golden_section(lambda t: (t - 0.3) ** 2, 0, 1) == pytest.approx(0.3, abs=1e-7)
    assert golden_section(lambda t: t, 0, 1) == 0


# landmarks --------------------------------------------------------------------------------


def test_landmark_examples():
    lm = landmarks(4, 0.0)
    assert (lm.x_N, lm.x_plus, lm.x_minus, lm.x_prime) == pytest.approx((2, 1, 3, 1 / 3))
    assert landmarks(8, 0.125).x_plus == pytest.approx(1.90625)


@settings(max_examples=50, deadline=None)
@given(N=st.floats(1.01, 100), a=st.floats(0, 1))
def test_landmark_order(N, a):
    lm = landmarks(N, a)
    assert lm.x_prime < lm.x_plus < lm.x_N < lm.x_minus


@pytest.mark.parametrize("m", [2, 3, 4])
def test_landmarks_are_extrema_and_zeros_of_v(m):
    N, a = 16, 0.1
    lm = landmarks(N, a, m)
    v = RectangleReference(m, N, a)
    for x in lm.extrema:
        assert abs(v.partial(x, 0.5, dx=1)) <= 1e-12
    for x in lm.zeros:
        assert abs(v(x, 0.5)) <= 1e-12
    assert len(lm.extrema) == m and len(lm.zeros) == m - 1


def test_landmarks_reject_negative_a():
    with pytest.raises(AsymptoticsError):
        landmarks(8, -0.1)


# small-x bound ----------------------------------------------------------------------


def test_small_x_exact_mode():
    for N in (16, 32):
        f = mode_field("rectangle", N, 1 / 32, 1)
        rep = small_x_bound_check(f, N, m=1)
        expect = math.sin(3 * PI * math.log(N) / N)
        assert rep.sup == pytest.approx(expect, rel=2e-2)
        assert rep.ratio <= 3 * PI


def test_small_x_not_applicable_to_strip():
    rep = small_x_bound_check(StripReference(1.0), 16)
    assert not rep.applicable and math.isnan(rep.ratio)
