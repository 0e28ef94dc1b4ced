import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capbound.anisotropic import AnisotropicSummary
from capbound.bounds import (
    BoundInputError,
    BoundReport,
    cap_upper_from_Tp,
    cor1_value,
    old_bound_lx22,
    theta_integral,
    thm1_bound,
    thm2_bound,
    thm3_bound,
    thm3_p2_closed_form,
    thm4_bound,
    thm4_n2_p2_closed_form,
    thm5_bound,
    thm6_bound,
)
from capbound.hyperbolic import ball_volume, quermassintegrals, sphere_area
from capbound.numerics import integrate, integrate_to_infinity
from capbound.oracle import RadialCapacityQuery, radial_capacity
from capbound.surface import geodesic_sphere_summary


def h_cap(n, r, p):
    return radial_capacity(RadialCapacityQuery("hyperbolic", n, r, p))


# ---------------------------------------------------------------------------
# generic foliation bound


def test_cap_upper_from_Tp_examples():
    # T = 8 pi e^{t/2}, p = 2: (int e^{-t/2} / (8 pi))^{-1} = 4 pi
    assert cap_upper_from_Tp(lambda t: 8 * math.pi * np.exp(t / 2), 2.0).value == pytest.approx(4 * math.pi, rel=1e-12)
    assert cap_upper_from_Tp(lambda t: np.exp(2 * t), 3.0).value == pytest.approx(1.0, rel=1e-12)
    flat = cap_upper_from_Tp(lambda t: np.ones_like(np.asarray(t, dtype=float)), 2.0)
    assert flat.degenerate and flat.value == 0.0
    with pytest.raises(BoundInputError):
        cap_upper_from_Tp(lambda t: np.exp(t), 1.0)


# ---------------------------------------------------------------------------
# H^n


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_thm1_n2_sharp(r):
    rep = thm1_bound(2, None, sphere_area(2, r))
    assert rep.value == pytest.approx(h_cap(2, r, 2.0), rel=1e-12)
    assert rep.cross_checks["quadrature"] == pytest.approx(rep.value, rel=1e-10)


@pytest.mark.parametrize("n", [3, 4])
def test_thm1_higher_dim_sharp(n):
    r = 0.8
    s = geodesic_sphere_summary(n, r)
    w2 = quermassintegrals(n, ball_volume(n, r), s.area, s.sigma1_integral).W2
    assert thm1_bound(n, w2, s.area).value == pytest.approx(h_cap(n, r, 2.0), rel=1e-9)


def test_thm1_rejects_bad_input():
    with pytest.raises(BoundInputError):
        thm1_bound(3, 1.0, 10.0, p=3.0)
    with pytest.raises(BoundInputError):
        thm1_bound(3, None, 10.0)


@pytest.mark.parametrize("p", [3.0, 4.0, 5.5])
def test_thm2_circle_sharp(p):
    r = 1.0
    length = sphere_area(2, r)
    k = 1 / math.tanh(r)
    rep = thm2_bound(length, length * k ** (p - 1), p, sigma1_integral=length * k)
    assert rep.value == pytest.approx(h_cap(2, r, p), rel=1e-10)
    # for a circle C = (L coth r)^2 - L^2 = 4 pi^2
    assert rep.inputs["C"] == pytest.approx(4 * math.pi**2, rel=1e-12)
    assert rep.case_label == "C>0"


def test_thm2_negative_C_is_allowed_but_hoelder_is_checked():
    rep = thm2_bound(10.0, 2.0, 3.0)
    assert rep.inputs["C"] < 0 and rep.value > 0
    with pytest.raises(BoundInputError, match="Hoelder"):
        thm2_bound(10.0, 2.0, 3.0, sigma1_integral=7.0)
    with pytest.raises(BoundInputError):
        thm2_bound(10.0, 2.0, 2.5)


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0])
def test_thm3_sphere_sharp(p):
    r = 1.3
    area = sphere_area(3, r)
    rep = thm3_bound(area, (2 / math.tanh(r)) ** 2 * area, p)
    assert rep.value == pytest.approx(h_cap(3, r, p), rel=1e-10)
    assert rep.case_label.startswith("equality")


def test_thm3_p2_branches_cross_checked():
    for area, extra in [(17.0, 40.0), (2.0, 0.3)]:
        rep = thm3_bound(area, 4 * area + 16 * math.pi + extra, 2.0)
        assert rep.cross_checks["quadrature"] == pytest.approx(rep.value, rel=1e-10)
        assert rep.cross_checks["branch_formula"] == pytest.approx(rep.value, rel=1e-10)


def test_thm3_a_limit_continuous():
    b, c = 20.0, 16 * math.pi
    v0, label = thm3_p2_closed_form(0.0, b, c)
    assert label == "a=0 limit"
    for a in (1e-4, 1e-8, 1e-12):
        assert thm3_p2_closed_form(a, b, c)[0] == pytest.approx(v0, rel=10 * a)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e4), st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-2, max_value=1e3))
def test_thm3_closed_form_matches_quadrature(a, b, c):
    f = lambda t: (a * np.exp(-t) + b * np.exp(t) + c) ** -0.5 * np.exp(-0.5 * t)
    quad = integrate_to_infinity(f, 0.0, tol=0.0, rel_tol=1e-13).value
    assert thm3_p2_closed_form(a, b, c)[0] == pytest.approx(quad, rel=1e-9)


def test_thm3_rejects_positive_mass():
    with pytest.raises(BoundInputError, match="Hawking"):
        thm3_bound(10.0, 10.0, 2.0)
    with pytest.raises(BoundInputError):
        thm3_bound(10.0, 200.0, 3.5)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_thm4_sharp(n, p):
    r = 0.9
    s = geodesic_sphere_summary(n, r).sigma_integrals
    assert thm4_bound(s, n, p).value == pytest.approx(h_cap(n, r, p), rel=1e-10)


@pytest.mark.parametrize("length,kappa", [(5.0, 8.0), (8.0, 5.0), (6.0, 6.0)])
def test_thm4_n2_closed_form_branches(length, kappa):
    closed, _ = thm4_n2_p2_closed_form(length, kappa)
    quad = integrate_to_infinity(lambda t: 1 / (length * np.cosh(t) + kappa * np.sinh(t)), 0.0, tol=0.0, rel_tol=1e-13).value
    assert closed == pytest.approx(1 / quad, rel=1e-12)


def test_thm4_needs_all_sigma():
    with pytest.raises(BoundInputError):
        thm4_bound([1.0, 2.0], 3, 2.0)


# ---------------------------------------------------------------------------
# R^3


def test_thm5_equality():
    rep = thm5_bound(4 * math.pi, 16 * math.pi, 2.0)
    assert rep.value == 4 * math.pi
    assert rep.case_label == "equality/round-sphere"
    assert thm5_bound(16 * math.pi, 16 * math.pi, 1.5).value == pytest.approx(
        radial_capacity(RadialCapacityQuery("euclidean", 3, 2.0, 1.5)), rel=1e-12
    )


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5])
def test_thm5_strict_tends_to_equality(p):
    eq = thm5_bound(4 * math.pi, 16 * math.pi, p).value
    near = thm5_bound(4 * math.pi, 16 * math.pi * (1 + 2e-3), p)
    assert near.case_label == "strict"
    assert near.value == pytest.approx(eq, rel=2e-3)


def test_thm5_rejects():
    with pytest.raises(BoundInputError):
        thm5_bound(4 * math.pi, 10.0, 2.0)
    with pytest.raises(BoundInputError):
        thm5_bound(4 * math.pi, 60.0, 3.0)


@pytest.mark.parametrize("s", [1e-2, 1.0, 50.0, 1e5])
@pytest.mark.parametrize("p", [1.2, 1.5, 2.5, 2.9])
def test_theta_integral_substitution(s, p):
    alpha = 2 * (p - 1) / (3 - p)
    top = s ** ((3 - p) / (2 * (p - 1)))
    direct = integrate(lambda r: (1 + np.asarray(r) ** alpha) ** -0.5, 0.0, top, tol=0.0, rel_tol=1e-13).value
    assert theta_integral(s, p) == pytest.approx(direct, rel=1e-10)


def test_theta_p2_is_arsinh():
    assert theta_integral(3.0, 2.0) == pytest.approx(math.asinh(math.sqrt(3.0)), rel=1e-15)


def _summary(wulff_area, area_f, s):
    return AnisotropicSummary(area_F=area_f, HF_sq_integral=4 * wulff_area * (1 + s), min_HF=1.0, mass_F=0.0, wulff_area_F=wulff_area)


def test_thm6_cor1_and_old_bound():
    w = 24 * math.pi
    summ = _summary(w, 40.0, 0.8)
    rep = thm6_bound(summ, w, 2.0)
    assert rep.value == pytest.approx(cor1_value(w, 40.0, 0.8), rel=1e-15)
    assert rep.cross_checks["quadrature"] == pytest.approx(rep.value, rel=1e-10)
    assert rep.value < old_bound_lx22(summ, w)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=2e-3, max_value=1e4), st.floats(min_value=0.1, max_value=1e3))
def test_new_bound_beats_old(s, area):
    w = 4 * math.pi
    summ = _summary(w, area, s)
    assert thm6_bound(summ, w, 2.0).value < old_bound_lx22(summ, w)


def test_thm6_equality_label():
    w = 24 * math.pi
    rep = thm6_bound(_summary(w, w, 0.0), w, 2.0)
    assert rep.case_label == "equality/wulff-shape"
    assert rep.value == pytest.approx(w)


# ---------------------------------------------------------------------------
# report


def test_report_schema():
    rep = thm5_bound(4 * math.pi, 16 * math.pi, 2.0)
    d = json.loads(rep.to_json())
    assert list(d)[:7] == ["schema", "theorem", "case_label", "p", "inputs", "value", "quadrature_error"]
    assert d["schema"] == 1
    with pytest.raises(ValueError):
        BoundReport("thm5", "x", 2.0, {}, -1.0)
