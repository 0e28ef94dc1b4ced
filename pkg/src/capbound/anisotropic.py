"""Minkowski norms, Wulff shapes and anisotropic curvature in R^3.

A Minkowski norm ``F`` is smooth, even, 1-homogeneous and uniformly elliptic.
Its Wulff ball is the unit ball of the dual norm ``F0``; the Wulff shape is
the image of the unit sphere under ``DF``.

All norm methods act on the last axis, so arrays of shape (..., 3) work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .surface import (
    RadialGraphSurface,
    TriangleMesh,
    mesh_corners,
    radial_geometry,
)

__all__ = [
    "EllipticityError",
    "MinkowskiNorm",
    "EuclideanNorm",
    "EllipsoidalNorm",
    "SmoothedLqNorm",
    "CustomNorm",
    "parse_norm",
    "dual_norm",
    "fibonacci_sphere",
    "WulffShape",
    "wulff_shape",
    "wulff_radial_graph",
    "AnisotropicSummary",
    "anisotropic_curvature",
    "anisotropic_fields",
    "inverse_2x2",
    "anisotropic_summary",
]

ELLIPTICITY_FLOOR = 1e-8


class EllipticityError(ValueError):
    """A_F fails to be positive definite somewhere on the sampled sphere."""


def _tangent_frame(xi: np.ndarray) -> np.ndarray:
    """Orthonormal tangent frame of S^2 at unit vectors ``xi``; shape (..., 3, 2)."""
    xi = np.asarray(xi, dtype=float)
    helper = np.zeros_like(xi)
    use_z = np.abs(xi[..., 2]) < 0.9
    helper[..., 2] = use_z
    helper[..., 0] = ~use_z
    e1 = np.cross(helper, xi)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(xi, e1)
    return np.stack([e1, e2], axis=-1)


class MinkowskiNorm:
    """Base class. Subclasses provide ``evaluate`` and ``gradient``.

    The Euclidean Hessian defaults to central differences of the gradient.
    """

    family: str = "custom"

    def evaluate(self, xi):
        raise NotImplementedError

    def gradient(self, xi):
        raise NotImplementedError

    def __call__(self, xi):
        return self.evaluate(xi)

    def params(self) -> dict:
        return {}

    def describe(self) -> str:
        p = self.params()
        if not p:
            return self.family
        return self.family + "(" + ", ".join(f"{k}={v}" for k, v in p.items()) + ")"

    def hessian(self, xi, h: float = 1e-5):
        """D^2 F, shape (..., 3, 3)."""
        xi = np.asarray(xi, dtype=float)
        scale = np.linalg.norm(xi, axis=-1, keepdims=True)
        cols = []
        for k in range(3):
            step = np.zeros(3)
            step[k] = 1.0
            d = h * scale * step
            cols.append((self.gradient(xi + d) - self.gradient(xi - d)) / (2.0 * h * scale))
        hess = np.stack(cols, axis=-1)
        return 0.5 * (hess + np.swapaxes(hess, -1, -2))

    def A_F(self, xi, frame=None):
        """A_F on T_xi S^2 in an orthonormal frame: E^T D^2F(xi) E, shape (..., 2, 2)."""
        xi = np.asarray(xi, dtype=float)
        xi = xi / np.linalg.norm(xi, axis=-1, keepdims=True)
        e = _tangent_frame(xi) if frame is None else frame
        return np.swapaxes(e, -1, -2) @ self.hessian(xi) @ e

    def spherical_hessian(self, xi, frame=None):
        """Hessian of F restricted to S^2, in an orthonormal tangent frame."""
        xi = np.asarray(xi, dtype=float)
        xi = xi / np.linalg.norm(xi, axis=-1, keepdims=True)
        f = self.evaluate(xi)
        return self.A_F(xi, frame) - f[..., None, None] * np.eye(2)

    def check_ellipticity(self, samples: np.ndarray | None = None, floor: float = ELLIPTICITY_FLOOR) -> float:
        """Smallest eigenvalue of A_F on the samples; raises below ``floor``."""
        if samples is None:
            samples = fibonacci_sphere(2000)
        f = self.evaluate(samples)
        if np.any(~np.isfinite(f)) or np.any(f <= 0):
            raise EllipticityError(f"{self.describe()} is not positive on the sphere")
        lam = np.linalg.eigvalsh(self.A_F(samples))[..., 0]
        worst = float(lam.min())
        if not worst > floor:
            i = int(np.argmin(lam))
            raise EllipticityError(
                f"{self.describe()}: A_F has eigenvalue {worst:.3g} <= {floor:g} "
                f"at xi={np.round(samples[i], 6).tolist()}"
            )
        return worst


@dataclass(frozen=True, eq=False)
class EuclideanNorm(MinkowskiNorm):
    family: str = field(default="euclidean", init=False)

    def evaluate(self, xi):
        return np.linalg.norm(xi, axis=-1)

    def gradient(self, xi):
        xi = np.asarray(xi, dtype=float)
        return xi / np.linalg.norm(xi, axis=-1, keepdims=True)

    def hessian(self, xi, h: float = 0.0):
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)[..., None, None]
        u = xi[..., :, None] / r
        return (np.eye(3) - u * np.swapaxes(u, -1, -2)) / r

    def dual(self, x):
        return np.linalg.norm(x, axis=-1)


@dataclass(frozen=True, eq=False)
class EllipsoidalNorm(MinkowskiNorm):
    """F(xi) = sqrt(xi^T A xi) for symmetric positive definite A."""

    matrix: np.ndarray = field(default_factory=lambda: np.eye(3))
    family: str = field(default="ellipsoid", init=False)

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.ndim == 1:
            a = np.diag(a)
        if a.shape != (3, 3) or not np.allclose(a, a.T):
            raise ValueError("ellipsoidal norm needs a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(a)[0] <= 0:
            raise EllipticityError("ellipsoidal norm needs a positive definite matrix")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        inv = np.linalg.inv(a)
        inv.setflags(write=False)
        object.__setattr__(self, "_inverse", inv)

    def params(self) -> dict:
        a = self.matrix
        if np.allclose(a, np.diag(np.diag(a))):
            return {"diag": [float(x) for x in np.diag(a)]}
        return {"matrix": a.tolist()}

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.sqrt(np.sum((xi @ self.matrix) * xi, axis=-1))

    def gradient(self, xi):
        xi = np.asarray(xi, dtype=float)
        ax = xi @ self.matrix
        return ax / self.evaluate(xi)[..., None]

    def hessian(self, xi, h: float = 0.0):
        xi = np.asarray(xi, dtype=float)
        f = self.evaluate(xi)[..., None, None]
        ax = (xi @ self.matrix)[..., :, None]
        return self.matrix / f - ax * np.swapaxes(ax, -1, -2) / f**3

    def dual(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.einsum("...i,ij,...j->...", x, self._inverse, x))


@dataclass(frozen=True, eq=False)
class SmoothedLqNorm(MinkowskiNorm):
    """F(xi) = (sum_i (xi_i^2 + eps^2 |xi|^2)^{q/2})^{1/q}.

    The eps term keeps F smooth and uniformly elliptic on the coordinate axes,
    where the raw l^q norm degenerates for q != 2.
    """

    q: float = 4.0
    eps: float = 0.1
    family: str = field(default="lq", init=False)

    def __post_init__(self):
        if not self.q >= 1:
            raise ValueError("need q >= 1")
        if not self.eps > 0:
            raise EllipticityError("need eps > 0: the l^q norm with eps = 0 is not uniformly elliptic")

    def params(self) -> dict:
        return {"q": self.q, "eps": self.eps}

    def _w(self, xi):
        xi = np.asarray(xi, dtype=float)
        return xi**2 + self.eps**2 * np.sum(xi**2, axis=-1, keepdims=True)

    def evaluate(self, xi):
        return np.sum(self._w(xi) ** (0.5 * self.q), axis=-1) ** (1.0 / self.q)

    def gradient(self, xi):
        xi = np.asarray(xi, dtype=float)
        w = self._w(xi)
        wp = w ** (0.5 * self.q - 1.0)
        f = self.evaluate(xi)[..., None]
        return f ** (1.0 - self.q) * xi * (wp + self.eps**2 * wp.sum(axis=-1, keepdims=True))


class CustomNorm(MinkowskiNorm):
    """Plug-in norm from a callable F; DF defaults to central differences."""

    def __init__(self, func: Callable, gradient: Callable | None = None, name: str = "custom", h: float = 1e-6):
        self._func = func
        self._grad = gradient
        self._h = h
        self.family = name

    def evaluate(self, xi):
        return np.asarray(self._func(np.asarray(xi, dtype=float)), dtype=float)

    def gradient(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(xi), dtype=float)
        scale = np.linalg.norm(xi, axis=-1, keepdims=True) * self._h
        cols = []
        for k in range(3):
            d = np.zeros(3)
            d[k] = 1.0
            cols.append((self.evaluate(xi + scale * d) - self.evaluate(xi - scale * d)) / (2.0 * scale[..., 0]))
        return np.stack(cols, axis=-1)


def parse_norm(spec: str) -> MinkowskiNorm:
    """Parse ``euclidean``, ``ellipsoid:a,b,c`` (diagonal A) or ``lq:q,eps``."""
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    vals = [float(v) for v in args.split(",") if v.strip()] if args else []
    if name == "euclidean" and not vals:
        return EuclideanNorm()
    if name == "ellipsoid" and len(vals) == 3:
        return EllipsoidalNorm(np.diag(vals))
    if name == "lq" and len(vals) in (1, 2):
        return SmoothedLqNorm(*vals)
    raise ValueError(
        f"bad norm spec {spec!r}; expected euclidean, ellipsoid:a,b,c or lq:q[,eps]"
    )


def fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic, nearly uniform points on S^2."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rho = np.sqrt(1.0 - z * z)
    ang = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([rho * np.cos(ang), rho * np.sin(ang), z], axis=-1)


_DUAL_STARTS = fibonacci_sphere(32)


def _dual_newton(norm: MinkowskiNorm, x: np.ndarray, xi: np.ndarray, iters: int = 60):
    """Solve DF(xi) = lam x, |xi| = 1 by damped Newton; returns (xi, lam, ok)."""
    f = norm.evaluate(xi)
    lam = f / np.einsum("...i,...i->...", xi, x)
    for _ in range(iters):
        g = norm.gradient(xi)
        res = np.concatenate([g - lam[..., None] * x, (np.sum(xi**2, -1) - 1.0)[..., None]], -1)
        if np.all(np.abs(res) < 1e-14):
            break
        jac = np.zeros(x.shape[:-1] + (4, 4))
        jac[..., :3, :3] = norm.hessian(xi)
        jac[..., :3, 3] = -x
        jac[..., 3, :3] = 2.0 * xi
        try:
            step = np.linalg.solve(jac, -res[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        size = np.linalg.norm(step[..., :3], axis=-1, keepdims=True)
        damp = np.minimum(1.0, 0.5 / np.maximum(size, 1e-300))
        xi = xi + damp * step[..., :3]
        lam = lam + damp[..., 0] * step[..., 3]
    xi = xi / np.linalg.norm(xi, axis=-1, keepdims=True)
    g = norm.gradient(xi)
    lam_fit = np.einsum("...i,...i->...", g, x) / np.einsum("...i,...i->...", x, x)
    resid = np.linalg.norm(g - lam_fit[..., None] * x, axis=-1)
    ok = (resid < 1e-10) & (lam_fit > 0)
    return xi, ok


def dual_norm(norm: MinkowskiNorm, x) -> np.ndarray | float:
    """F0(x) = sup over unit xi of <xi, x> / F(xi).

    Closed forms are used for the Euclidean and ellipsoidal families. Otherwise
    the best of 32 Fibonacci starts seeds a Newton solve of the optimality
    condition ``DF(xi) = lam x``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.linalg.norm(x, axis=-1) == 0):
        raise ValueError("dual norm needs x != 0")
    if hasattr(norm, "dual"):
        out = norm.dual(x)
        return float(out) if out.ndim == 0 else out
    scalar = x.ndim == 1
    xs = np.atleast_2d(x).reshape(-1, 3)
    vals = (xs @ _DUAL_STARTS.T) / norm.evaluate(_DUAL_STARTS)[None, :]
    best = np.argmax(vals, axis=1)
    start_val = vals[np.arange(len(xs)), best]
    xi, ok = _dual_newton(norm, xs, _DUAL_STARTS[best])
    out = np.einsum("ij,ij->i", xi, xs) / norm.evaluate(xi)
    # retry failures from every start that is not on the wrong side of x
    for i in np.flatnonzero(~ok | (out < start_val)):
        cand = _DUAL_STARTS[_DUAL_STARTS @ xs[i] > 0]
        xi_c, ok_c = _dual_newton(norm, np.broadcast_to(xs[i], cand.shape), cand)
        v = (xi_c @ xs[i]) / norm.evaluate(xi_c)
        v = np.where(ok_c, v, -np.inf)
        out[i] = max(float(v.max()), float(start_val[i]))
    out = out.reshape(x.shape[:-1])
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Wulff shapes


@dataclass(frozen=True)
class WulffShape:
    """Boundary of the Wulff ball sampled as DF on a latitude/longitude grid.

    ``samples[i, j] = DF(m(theta_i, phi_j))``. ``anisotropic_area`` is
    |dW|_F = int F(nu) dmu and should equal ``3 * volume``.
    """

    norm: MinkowskiNorm
    samples: np.ndarray
    anisotropic_area: float
    volume: float
    min_ellipticity: float

    @property
    def identity_residual(self) -> float:
        """Relative residual of |dW|_F = 3|W|."""
        return abs(self.anisotropic_area - 3.0 * self.volume) / (3.0 * self.volume)

    def mesh(self) -> TriangleMesh:
        """Triangulate the samples, closing each pole with a fan."""
        nt, nphi = self.samples.shape[:2]
        pts = self.samples.reshape(-1, 3)
        north = self.norm.gradient(np.array([0.0, 0.0, 1.0]))
        south = self.norm.gradient(np.array([0.0, 0.0, -1.0]))
        verts = np.vstack([pts, north, south])
        n_idx, s_idx = nt * nphi, nt * nphi + 1
        idx = np.arange(nt * nphi).reshape(nt, nphi)
        nxt = np.roll(idx, -1, axis=1)
        a, b, c, d = idx[:-1], nxt[:-1], nxt[1:], idx[1:]
        faces = [np.stack([a, d, c], -1).reshape(-1, 3), np.stack([a, c, b], -1).reshape(-1, 3)]
        faces.append(np.stack([np.full(nphi, n_idx), idx[0], nxt[0]], -1))
        faces.append(np.stack([np.full(nphi, s_idx), nxt[-1], idx[-1]], -1))
        return TriangleMesh(verts, np.concatenate(faces))


def wulff_shape(norm: MinkowskiNorm, n_theta: int = 128, n_phi: int = 256) -> WulffShape:
    surf = RadialGraphSurface.sphere(1.0, "r3", n_theta, n_phi)
    m = surf.directions()
    th = surf.theta[:, None]
    ph = surf.phi[None, :]
    m_t = np.stack(
        [np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th) * np.ones_like(ph)], -1
    )
    m_p = np.stack([-np.sin(ph) * np.ones_like(th), np.cos(ph) * np.ones_like(th), np.zeros((n_theta, n_phi))], -1)
    m_p = m_p * np.sin(th)[..., None]

    floor = norm.check_ellipticity(m.reshape(-1, 3))
    pts = norm.gradient(m)
    hess = norm.hessian(m)
    x_t = np.einsum("...ij,...j->...i", hess, m_t)
    x_p = np.einsum("...ij,...j->...i", hess, m_p)
    c = np.cross(x_t, x_p)
    cell = surf.dtheta * surf.dphi
    dmu = np.linalg.norm(c, axis=-1)
    nu = c / dmu[..., None]
    area_f = float(np.sum(norm.evaluate(nu) * dmu) * cell)
    volume = float(np.sum(np.einsum("...i,...i->...", pts, c)) * cell / 3.0)
    if volume <= 0:
        raise EllipticityError("Wulff shape sampling produced nonpositive volume")
    pts.setflags(write=False)
    return WulffShape(norm, pts, area_f, volume, floor)


def wulff_radial_graph(norm: MinkowskiNorm, r0: float = 1.0, n_theta: int = 128, n_phi: int = 256) -> RadialGraphSurface:
    """The scaled Wulff shape r0 * dW as a radial graph, r = r0 / F0(m)."""
    return RadialGraphSurface.from_directions(
        lambda m: r0 / dual_norm(norm, m), "r3", n_theta, n_phi
    )


# ---------------------------------------------------------------------------
# anisotropic curvature


@dataclass(frozen=True)
class AnisotropicSummary:
    area_F: float
    HF_sq_integral: float
    min_HF: float
    mass_F: float
    wulff_area_F: float
    max_HF: float = math.nan

    def __post_init__(self):
        if not self.area_F > 0:
            raise ValueError("anisotropic area must be positive")

    @property
    def s(self) -> float:
        """Normalised anisotropic Willmore excess, zero on scaled Wulff shapes."""
        return self.HF_sq_integral / (4.0 * self.wulff_area_F) - 1.0


def _mass(area_f: float, hf_sq: float, wulff_area: float) -> float:
    return area_f / (4.0 * wulff_area) * (1.0 - hf_sq / (4.0 * wulff_area))


def inverse_2x2(m: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a stack of 2x2 matrices."""
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1] / det
    out[..., 1, 1] = m[..., 0, 0] / det
    out[..., 0, 1] = -m[..., 0, 1] / det
    out[..., 1, 0] = -m[..., 1, 0] / det
    return out


def anisotropic_fields(geo, norm: MinkowskiNorm):
    """F(nu), H_F, the largest eigenvalue of A_F(nu), g^{-1} and J^T D^2F(nu) J.

    H_F = tr(g^{-1} (J^T D^2F(nu) J) g^{-1} h) with J the coordinate tangents.
    """
    nu = geo.normal
    jac = geo.tangents
    if nu is None:
        raise ValueError("anisotropic curvature needs a surface in R^3")
    fnu = norm.evaluate(nu)
    a_coord = np.swapaxes(jac, -1, -2) @ norm.hessian(nu) @ jac
    ginv = inverse_2x2(geo.g)
    ga = ginv @ a_coord
    hf = np.sum(ga * np.swapaxes(ginv @ geo.h, -1, -2), axis=(-2, -1))
    # g^{-1} a is similar to a symmetric matrix, so its eigenvalues are real
    half_tr = 0.5 * (ga[..., 0, 0] + ga[..., 1, 1])
    det = ga[..., 0, 0] * ga[..., 1, 1] - ga[..., 0, 1] * ga[..., 1, 0]
    lam = half_tr + np.sqrt(np.maximum(half_tr**2 - det, 0.0))
    return fnu, hf, lam, ginv, a_coord


def anisotropic_curvature(geo, norm: MinkowskiNorm):
    """Pointwise F(nu), H_F and the largest eigenvalue of A_F(nu) on a radial graph."""
    fnu, hf, lam, _, _ = anisotropic_fields(geo, norm)
    return fnu, hf, lam


def _mesh_anisotropic(mesh: TriangleMesh, norm: MinkowskiNorm):
    mesh.validate()
    x = mesh.vertices
    f = mesh.faces
    nv = len(x)
    p = x[f]
    fn = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    dfn = norm.gradient(fn)
    area_f = 0.5 * float(np.sum(norm.evaluate(fn)))
    # d/dx_k of F(N)/2 = (x_{k+1} - x_{k+2}) x DF(N) / 2
    grad = np.zeros((nv, 3))
    for k in range(3):
        edge = p[:, (k + 1) % 3] - p[:, (k + 2) % 3]
        np.add.at(grad, f[:, k], 0.5 * np.cross(edge, dfn))
    corners = mesh_corners(mesh)
    vn = corners.vertex_normal
    vertex_area = corners.vertex_area
    hf = np.linalg.norm(grad, axis=1) * np.sign(np.einsum("ij,ij->i", grad, vn)) / vertex_area
    dmu_f = norm.evaluate(vn) * vertex_area
    return area_f, hf, dmu_f


def anisotropic_summary(
    surface: RadialGraphSurface | TriangleMesh,
    norm: MinkowskiNorm,
    wulff: WulffShape,
) -> AnisotropicSummary:
    """Anisotropic area, int H_F^2 dmu_F and the anisotropic Hawking mass."""
    if isinstance(surface, TriangleMesh):
        area_f, hf, dmu_f = _mesh_anisotropic(surface, norm)
    else:
        if surface.ambient != "r3":
            raise ValueError("anisotropic geometry is only defined for surfaces in R^3")
        geo = radial_geometry(surface)
        fnu, hf, _ = anisotropic_curvature(geo, norm)
        dmu_f = fnu * geo.area_element
        area_f = float(dmu_f.sum())
    hf_sq = float(np.sum(hf**2 * dmu_f))
    return AnisotropicSummary(
        area_F=area_f,
        HF_sq_integral=hf_sq,
        min_HF=float(hf.min()),
        mass_F=_mass(area_f, hf_sq, wulff.anisotropic_area),
        wulff_area_F=wulff.anisotropic_area,
        max_HF=float(hf.max()),
    )
