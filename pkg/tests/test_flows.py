import math

import numpy as np
import pytest

from capbound.anisotropic import EuclideanNorm, EllipsoidalNorm, wulff_radial_graph, wulff_shape
from capbound.flows import (
    FlowBreakdownError,
    FlowSample,
    FlowTrace,
    SAMPLE_DT,
    _Stepper,
    normal_flow_area,
    rkl2_coefficients,
    run_iamcf_r3,
    run_imcf_h3,
    stages_for,
)
from capbound.surface import RadialGraphSurface, geodesic_sphere_summary

NT, NP = 32, 64


def test_normal_flow_area_examples():
    s = geodesic_sphere_summary(3, 1.0)
    assert normal_flow_area(s, 3, 0.7) == pytest.approx(4 * math.pi * math.sinh(1.7) ** 2, rel=1e-6)
    c = geodesic_sphere_summary(2, 1.0)
    assert normal_flow_area(c, 2, 1.0) == pytest.approx(2 * math.pi * math.sinh(2.0), rel=1e-12)
    assert normal_flow_area(s, 3, 0.0) == s.area
    with pytest.raises(ValueError):
        normal_flow_area(c, 3, 1.0)


def test_rkl2_coefficients_consistent():
    # each stage is an affine combination, so a constant state is preserved
    mu, nu, mu_t, gam_t = rkl2_coefficients(10)
    assert np.all(np.isfinite(mu[2:])) and np.all(np.isfinite(nu[2:]))
    assert mu_t[1] == pytest.approx(4 / (100 + 10 - 2) / 3)
    with pytest.raises(ValueError):
        rkl2_coefficients(1)


def test_stages_for_covers_ratio():
    for ratio in (0.1, 1.0, 7.3, 100.0, 1620.0):
        s = stages_for(ratio)
        assert (s * s + s - 2) / 4 >= ratio
        assert s == 2 or ((s - 1) ** 2 + (s - 1) - 2) / 4 < ratio


def test_rkl2_step_is_second_order_on_linear_ode():
    # y' = -y over one super step, compared with exp(-dt)
    def step(dt, stages):
        mu, nu, mu_t, gam_t = rkl2_coefficients(stages)
        y0 = 1.0
        l0 = -y0
        prev2, prev = y0, y0 + mu_t[1] * dt * l0
        for k in range(2, stages + 1):
            cur = mu[k] * prev + nu[k] * prev2 + (1 - mu[k] - nu[k]) * y0 + mu_t[k] * dt * -prev + gam_t[k] * dt * l0
            prev2, prev = prev, cur
        return prev

    e1 = abs(step(0.1, 5) - math.exp(-0.1))
    e2 = abs(step(0.05, 5) - math.exp(-0.05))
    assert e1 / e2 > 6.0


def test_trace_validation_and_csv(tmp_path):
    tr = FlowTrace("X")
    tr.append(FlowSample(0.0, 1.0, -0.5, 0.1, 0.2))
    tr.append(FlowSample(0.05, 1.1, -0.4, 0.1, 0.2))
    with pytest.raises(ValueError):
        tr.append(FlowSample(0.05, 1.2, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        tr.append(FlowSample(0.1, 0.0, 0.0, 0.0, 0.0))
    text = tr.to_csv(tmp_path / "t.csv")
    lines = text.splitlines()
    assert lines[0] == "t,area,mass,min_curv,max_curv"
    assert lines[1].startswith("0.000000,1.0,-0.5")
    assert (tmp_path / "t.csv").read_text() == text
    assert np.allclose(tr.column("area"), [1.0, 1.1])


def _const_speed(limit):
    sphere = RadialGraphSurface.sphere(1.0, "r3", NT, NP)

    def speed(surface):
        if surface.radius.mean() > limit:
            return None, None, "radius limit reached"
        return np.ones(surface.shape), np.full(surface.shape, 1e-3), None

    def sample(surface, t):
        return FlowSample(t, float(surface.radius.mean()), 0.0, 0.0, 0.0)

    return sphere, speed, sample


def test_stepper_samples_on_grid():
    sphere, speed, sample = _const_speed(math.inf)
    tr = _Stepper("TEST", sphere, 0.23, None, speed, sample).run()
    t = tr.column("t")
    assert np.allclose(t, [0, 0.05, 0.1, 0.15, 0.2, 0.23])
    assert np.allclose(tr.column("area"), 1.0 + t)
    assert tr.dt_policy["scheme"] == "rkl2" and tr.dt_policy["steps"] >= 5


def test_stepper_breakdown_keeps_partial_trace():
    sphere, speed, sample = _const_speed(1.12)
    with pytest.raises(FlowBreakdownError) as info:
        _Stepper("TEST", sphere, 1.0, None, speed, sample).run()
    tr = info.value.trace
    assert np.allclose(tr.column("t"), [0.0, 0.05, 0.1])
    assert tr.dt_policy["rejected"] > 0 and tr.final_surface is not None


def test_stepper_rejects_bad_time():
    sphere, speed, sample = _const_speed(math.inf)
    for bad in (0.0, -1.0, math.inf):
        with pytest.raises(ValueError):
            _Stepper("TEST", sphere, bad, None, speed, sample)


def test_imcf_h3_sphere_area_law():
    s = RadialGraphSurface.sphere(1.0, "h3", NT, NP)
    tr = run_imcf_h3(s, 0.5)
    area = tr.column("area")
    t = tr.column("t")
    assert np.allclose(area, area[0] * np.exp(t), rtol=1e-3)
    assert len(t) == int(round(0.5 / SAMPLE_DT)) + 1
    # radius stays uniform
    assert np.ptp(tr.final_surface.radius) < 1e-8


def test_imcf_h3_rejects_r3_and_concave_start():
    with pytest.raises(ValueError):
        run_imcf_h3(RadialGraphSurface.sphere(1.0, "r3", NT, NP), 0.1)
    dented = RadialGraphSurface.perturbed_sphere(1.0, 0.9, 4, 0, "h3", NT, NP)
    with pytest.raises(FlowBreakdownError) as info:
        run_imcf_h3(dented, 0.1)
    assert info.value.trace.samples == []


def test_imcf_h3_mass_monotone_on_perturbed_sphere():
    s = RadialGraphSurface.perturbed_sphere(1.0, 0.2, 2, 0, "h3", NT, NP)
    tr = run_imcf_h3(s, 0.5)
    mass = tr.column("mass")
    assert np.all(np.diff(mass) > -1e-3 * abs(mass[0]))
    spread = tr.column("max_curv") - tr.column("min_curv")
    assert spread[-1] < spread[0]


@pytest.mark.parametrize("norm", [EuclideanNorm(), EllipsoidalNorm(np.diag([1.0, 4.0, 9.0]))], ids=["euclid", "ellipsoid"])
def test_iamcf_wulff_area_law(norm):
    w = wulff_shape(norm, NT, NP)
    start = wulff_radial_graph(norm, 1.0, NT, NP)
    tr = run_iamcf_r3(start, norm, w, 0.2)
    area = tr.column("area")
    t = tr.column("t")
    assert np.allclose(area, area[0] * np.exp(t), rtol=5e-3)
    assert np.all(np.abs(tr.column("mass")) < 2e-2)
