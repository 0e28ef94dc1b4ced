import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from capbound.anisotropic import (
    CustomNorm,
    EllipsoidalNorm,
    EllipticityError,
    EuclideanNorm,
    SmoothedLqNorm,
    anisotropic_curvature,
    anisotropic_summary,
    dual_norm,
    fibonacci_sphere,
    parse_norm,
    wulff_radial_graph,
    wulff_shape,
)
from capbound.surface import RadialGraphSurface, icosphere, radial_geometry, summarize_mesh, summarize_radial_graph

vectors = st.lists(st.floats(min_value=-5, max_value=5), min_size=3, max_size=3).map(np.array).filter(
    lambda v: np.linalg.norm(v) > 1e-2
)
NORMS = [EuclideanNorm(), EllipsoidalNorm(np.diag([1.0, 4.0, 9.0])), SmoothedLqNorm(4.0, 0.1), SmoothedLqNorm(3.0, 0.3)]


def test_parse_norm():
    assert isinstance(parse_norm("euclidean"), EuclideanNorm)
    assert isinstance(parse_norm("ellipsoid:1,4,9"), EllipsoidalNorm)
    n = parse_norm("lq:4,0.1")
    assert (n.q, n.eps) == (4.0, 0.1)
    with pytest.raises(ValueError):
        parse_norm("cube")
    with pytest.raises(EllipticityError):
        parse_norm("ellipsoid:1,-1,1")


@pytest.mark.parametrize("norm", NORMS, ids=lambda n: n.describe())
@settings(max_examples=25, deadline=None)
@given(xi=vectors, t=st.floats(min_value=0.1, max_value=10))
def test_homogeneity_and_evenness(norm, xi, t):
    assert norm.evaluate(t * xi) == pytest.approx(t * norm.evaluate(xi), rel=1e-12)
    assert norm.evaluate(-xi) == pytest.approx(norm.evaluate(xi), rel=1e-12)
    # Euler: <DF(xi), xi> = F(xi)
    assert norm.gradient(xi) @ xi == pytest.approx(norm.evaluate(xi), rel=1e-10)


@pytest.mark.parametrize("norm", NORMS, ids=lambda n: n.describe())
def test_gradient_matches_finite_differences(norm):
    pts = fibonacci_sphere(20) * 1.7
    fd = CustomNorm(norm.evaluate).gradient(pts)
    assert np.allclose(norm.gradient(pts), fd, atol=1e-7)


@pytest.mark.parametrize("norm", NORMS, ids=lambda n: n.describe())
@settings(max_examples=20, deadline=None)
@given(xi=vectors, x=vectors)
def test_dual_cauchy_schwarz(norm, xi, x):
    assert xi @ x <= norm.evaluate(xi) * dual_norm(norm, x) * (1 + 1e-9) + 1e-12


@pytest.mark.parametrize("norm", NORMS, ids=lambda n: n.describe())
def test_dual_of_gradient_is_one(norm):
    # DF maps the sphere onto the Wulff shape {F0 = 1}
    g = norm.gradient(fibonacci_sphere(50))
    assert np.allclose(dual_norm(norm, g), 1.0, atol=1e-9)


def test_dual_closed_forms():
    assert dual_norm(EuclideanNorm(), np.array([3.0, 4.0, 0.0])) == pytest.approx(5.0)
    assert dual_norm(parse_norm("ellipsoid:1,4,9"), np.array([0.0, 0.0, 1.0])) == pytest.approx(1 / 3)


def test_dual_newton_matches_grid_search():
    norm = SmoothedLqNorm(4.0, 0.1)
    custom = CustomNorm(norm.evaluate, norm.gradient, "lq-copy")
    x = np.array([0.3, -1.2, 0.7])
    dense = fibonacci_sphere(200000)
    brute = float(np.max(dense @ x / custom.evaluate(dense)))
    # the grid spacing (about 8e-3 rad) limits the brute force to ~1e-5
    assert dual_norm(custom, x) == pytest.approx(brute, rel=5e-5)
    assert dual_norm(custom, x) >= brute


def test_ellipticity():
    assert parse_norm("ellipsoid:1,4,9").check_ellipticity() > 0.3
    flat = CustomNorm(lambda xi: np.abs(xi).sum(-1) + 0 * xi[..., 0], name="l1")
    with pytest.raises(EllipticityError):
        flat.check_ellipticity(fibonacci_sphere(200))


def test_wulff_shapes():
    w = wulff_shape(EuclideanNorm(), 64, 128)
    assert w.anisotropic_area == pytest.approx(4 * math.pi, rel=2e-4)
    assert w.identity_residual < 1e-6
    e = wulff_shape(parse_norm("ellipsoid:1,4,9"), 64, 128)
    assert e.volume == pytest.approx(8 * math.pi, rel=1e-3)
    assert e.identity_residual < 1e-6
    extent = np.abs(e.samples).max(axis=(0, 1))
    assert np.allclose(extent, [1, 2, 3], rtol=1e-2)


def test_wulff_mesh_is_closed():
    mesh = wulff_shape(parse_norm("lq:4,0.1"), 16, 32).mesh()
    mesh.validate()
    assert summarize_mesh(mesh).euler_char == 2


def test_isotropic_reduction():
    norm = EuclideanNorm()
    w = wulff_shape(norm, 64, 128)
    surf = RadialGraphSurface.ellipsoid(1.0, 1.2, 0.9, 64, 128)
    fnu, hf, _ = anisotropic_curvature(radial_geometry(surf), norm)
    assert np.allclose(hf, radial_geometry(surf).sigma1, atol=1e-12)
    assert np.allclose(fnu, 1.0)
    a = anisotropic_summary(surf, norm, w)
    s = summarize_radial_graph(surf)
    assert a.area_F == pytest.approx(s.area, rel=1e-12)
    assert a.HF_sq_integral == pytest.approx(s.sigma1_sq_integral, rel=1e-12)
    m = anisotropic_summary(icosphere(3), norm, w)
    ms = summarize_mesh(icosphere(3))
    assert m.HF_sq_integral == pytest.approx(ms.sigma1_sq_integral, rel=1e-9)


def test_wulff_graph_is_equality_case():
    norm = parse_norm("ellipsoid:1,4,9")
    w = wulff_shape(norm)
    a = anisotropic_summary(wulff_radial_graph(norm, 1.0), norm, w)
    assert abs(a.s) < 1e-4
    assert abs(a.mass_F) < 1e-4
    assert a.min_HF == pytest.approx(2.0, rel=2e-2)
    sphere = anisotropic_summary(RadialGraphSurface.sphere(1.0, "r3"), norm, w)
    assert sphere.s > 0 and sphere.mass_F < 0
