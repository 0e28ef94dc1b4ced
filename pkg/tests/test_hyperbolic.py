import math

import pytest
from hypothesis import given, settings, strategies as st

from capbound.hyperbolic import (
    HyperbolicBall,
    ball_volume,
    isoperimetric_I,
    quermassintegrals,
    sphere_area,
    unit_sphere_area,
)


def test_unit_sphere_areas():
    assert unit_sphere_area(2) == pytest.approx(2 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_sphere_area(4) == pytest.approx(2 * math.pi**2)


def test_sphere_area_values():
    assert sphere_area(2, 1.0) == pytest.approx(2 * math.pi * math.sinh(1.0), rel=1e-15)
    assert sphere_area(3, 1.0) == pytest.approx(4 * math.pi * math.sinh(1.0) ** 2, rel=1e-15)


def test_ball_volume_closed_forms():
    assert ball_volume(2, 1.0) == pytest.approx(2 * math.pi * (math.cosh(1.0) - 1), rel=1e-14)
    assert ball_volume(3, 1.0) == pytest.approx(math.pi * (math.sinh(2.0) - 2.0), rel=1e-12)
    assert ball_volume(3, 0.0) == 0.0


def test_ball_object():
    b = HyperbolicBall(3, 1.0)
    assert b.area == sphere_area(3, 1.0)
    with pytest.raises(ValueError):
        HyperbolicBall(3, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.floats(min_value=1e-3, max_value=5.0))
def test_isoperimetric_inverts_sphere_area(n, r):
    assert isoperimetric_I(n, sphere_area(n, r)) == pytest.approx(ball_volume(n, r), rel=1e-9)


def test_isoperimetric_h2_closed_form():
    s = 3.0
    assert isoperimetric_I(2, s) == pytest.approx(math.sqrt(4 * math.pi**2 + s * s) - 2 * math.pi, rel=1e-14)


def test_quermassintegrals_sphere():
    r = 1.0
    area = sphere_area(3, r)
    q = quermassintegrals(3, ball_volume(3, r), area, 2 / math.tanh(r) * area)
    assert q.W1 == pytest.approx(area / 3)
    assert q.W2 == pytest.approx(5.8924, abs=1e-4)


def test_bad_dimension():
    with pytest.raises(ValueError):
        sphere_area(1, 1.0)
    with pytest.raises(ValueError):
        isoperimetric_I(3, -1.0)
