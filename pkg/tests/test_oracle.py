import math

import pytest
from hypothesis import given, settings, strategies as st

from capbound.numerics import DivergenceError
from capbound.oracle import (
    RadialCapacityQuery,
    radial_capacity,
    radial_capacity_with_error,
    radial_energy_check,
    wulff_capacity,
)


def test_euclidean_closed_form():
    # Cap_p(B_r) in R^n = omega ((n-p)/(p-1))^{p-1} r^{n-p}
    for p in (1.5, 2.0, 2.5):
        r = 2.0
        exact = 4 * math.pi * ((3 - p) / (p - 1)) ** (p - 1) * r ** (3 - p)
        assert radial_capacity(RadialCapacityQuery("euclidean", 3, r, p)) == pytest.approx(exact, rel=1e-12)


def test_h2_p2_closed_form():
    # int_r^inf dt / (2 pi sinh t) = -log tanh(r/2) / (2 pi)
    r = 1.0
    exact = 2 * math.pi / -math.log(math.tanh(r / 2))
    assert radial_capacity(RadialCapacityQuery("hyperbolic", 2, r, 2.0)) == pytest.approx(exact, rel=1e-13)


def test_h3_p2_closed_form():
    # int_r^inf dt / (4 pi sinh^2 t) = (coth r - 1) / (4 pi)
    r = 0.7
    exact = 4 * math.pi / (1 / math.tanh(r) - 1)
    assert radial_capacity(RadialCapacityQuery("hyperbolic", 3, r, 2.0)) == pytest.approx(exact, rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from([("hyperbolic", 2), ("hyperbolic", 3), ("hyperbolic", 4), ("euclidean", 3)]),
    st.floats(min_value=1.2, max_value=2.8),
    st.floats(min_value=0.05, max_value=4.0),
)
def test_energy_check_agrees(amb, p, r):
    ambient, n = amb
    if ambient == "euclidean" and p >= n:
        return
    q = RadialCapacityQuery(ambient, n, r, p)
    assert radial_capacity(q) == pytest.approx(radial_energy_check(q), rel=1e-8)


def test_monotone_in_radius():
    caps = [radial_capacity(RadialCapacityQuery("hyperbolic", 3, r, 1.7)) for r in (0.2, 0.5, 1.0, 2.0)]
    assert caps == sorted(caps)


def test_error_estimate_small():
    cap, err = radial_capacity_with_error(RadialCapacityQuery("hyperbolic", 3, 1.0, 2.5))
    assert 0 <= err < 1e-9 * cap


def test_euclidean_p_ge_n_diverges():
    with pytest.raises(DivergenceError):
        radial_capacity(RadialCapacityQuery("euclidean", 3, 1.0, 3.0))


def test_small_radius_ratio_asymptotics():
    # n=3, p=2: ratio is exactly 1 / (r (coth r - 1)) = 1 + r + O(r^2)
    r = 1e-2
    h = radial_capacity(RadialCapacityQuery("hyperbolic", 3, r, 2.0))
    e = radial_capacity(RadialCapacityQuery("euclidean", 3, r, 2.0))
    assert h / e == pytest.approx(1 / (r * (1 / math.tanh(r) - 1)), rel=1e-12)
    assert h / e > 1.01
    h = radial_capacity(RadialCapacityQuery("hyperbolic", 2, r, 1.5))
    e = radial_capacity(RadialCapacityQuery("euclidean", 2, r, 1.5))
    assert abs(h / e - 1) < 1e-2


def test_bad_queries():
    with pytest.raises(ValueError):
        RadialCapacityQuery("spherical", 3, 1.0, 2.0)
    with pytest.raises(ValueError):
        RadialCapacityQuery("hyperbolic", 3, 1.0, 1.0)
    with pytest.raises(ValueError):
        RadialCapacityQuery("hyperbolic", 3, 0.0, 2.0)


def test_wulff_capacity():
    assert wulff_capacity(4 * math.pi, 1.0, 2.0) == pytest.approx(4 * math.pi)
    assert wulff_capacity(4 * math.pi, 2.0, 1.5) == pytest.approx(
        radial_capacity(RadialCapacityQuery("euclidean", 3, 2.0, 1.5)), rel=1e-12
    )
    with pytest.raises(ValueError):
        wulff_capacity(1.0, 1.0, 3.0)
