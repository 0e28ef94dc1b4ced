"""Discrete closed surfaces in R^3 and H^3.

Two representations are supported:

* ``TriangleMesh`` -- closed oriented triangle meshes in R^3, with the
  cotangent mean-curvature vector and angle-defect Gauss curvature.
* ``RadialGraphSurface`` -- star-shaped surfaces ``rho = r(theta, phi)`` over a
  latitude/longitude grid, in R^3 or in H^3.

Radial graphs use a cell-centred latitude grid, ``theta_i = (i + 1/2) pi / N``,
so no node sits on a pole. Finite differences across a pole use the identity
``r(-theta, phi) = r(theta, phi + pi)``, which is why ``N_phi`` must be even.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .hyperbolic import sphere_area, unit_sphere_area

__all__ = [
    "SurfaceValidationError",
    "TriangleMesh",
    "RadialGraphSurface",
    "RadialGeometry",
    "CurvatureSummary",
    "HawkingMasses",
    "HypothesisReport",
    "icosphere",
    "torus_mesh",
    "read_obj",
    "write_obj",
    "radial_geometry",
    "summarize_mesh",
    "summarize_radial_graph",
    "geodesic_sphere_summary",
    "hawking_masses",
    "check_hypotheses",
    "THEOREMS",
]

FOUR_PI = 4.0 * math.pi
SIXTEEN_PI = 16.0 * math.pi
AMBIENTS = ("r3", "h3")


class SurfaceValidationError(ValueError):
    """Surface data violates a representation invariant."""


# ---------------------------------------------------------------------------
# triangle meshes


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        f = np.ascontiguousarray(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise SurfaceValidationError("vertices must have shape (V, 3)")
        if f.ndim != 2 or f.shape[1] != 3:
            raise SurfaceValidationError("faces must have shape (F, 3)")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    def scaled(self, factor: float) -> "TriangleMesh":
        return TriangleMesh(self.vertices * factor, self.faces)

    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted (i < j)."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def face_normals(self) -> np.ndarray:
        """Unnormalised normals, length equal to twice the face area."""
        x = self.vertices[self.faces]
        return np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0])

    def signed_volume(self) -> float:
        x = self.vertices[self.faces]
        return float(np.einsum("ij,ij->", x[:, 0], np.cross(x[:, 1], x[:, 2])) / 6.0)

    def validate(self) -> None:
        """Check closedness, consistent orientation, face areas and outwardness."""
        f = self.faces
        nv = len(self.vertices)
        if f.size == 0:
            raise SurfaceValidationError("mesh has no faces")
        if f.min() < 0 or f.max() >= nv:
            raise SurfaceValidationError("face index out of range")
        directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        if np.any(directed[:, 0] == directed[:, 1]):
            raise SurfaceValidationError("face with repeated vertex")
        uniq, counts = np.unique(directed, axis=0, return_counts=True)
        if np.any(counts > 1):
            a, b = uniq[np.argmax(counts > 1)]
            raise SurfaceValidationError(
                f"edge ({a}, {b}) is traversed twice in the same direction: "
                "inconsistent orientation or non-manifold edge"
            )
        undirected, ucounts = np.unique(
            np.sort(directed, axis=1), axis=0, return_counts=True
        )
        if np.any(ucounts != 2):
            a, b = undirected[np.argmax(ucounts != 2)]
            n = ucounts[np.argmax(ucounts != 2)]
            raise SurfaceValidationError(
                f"edge ({a}, {b}) is shared by {n} faces; mesh is not closed"
            )
        areas = 0.5 * np.linalg.norm(self.face_normals(), axis=1)
        if np.any(areas <= 1e-14):
            raise SurfaceValidationError(
                f"degenerate face {int(np.argmin(areas))} (area {areas.min():.3g})"
            )
        if self.signed_volume() <= 0:
            raise SurfaceValidationError("faces are oriented inward")


def icosphere(level: int = 4, radius: float = 1.0) -> TriangleMesh:
    """Subdivided icosahedron projected to a sphere."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v = [np.array(p, dtype=float) / np.linalg.norm(p) for p in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = v[i] + v[j]
                v.append(m / np.linalg.norm(m))
                cache[key] = len(v) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriangleMesh(radius * np.array(v), np.array(faces))


def torus_mesh(major: float = 2.0, minor: float = 0.5, nu: int = 64, nv: int = 64) -> TriangleMesh:
    u = 2 * np.pi * np.arange(nu) / nu
    w = 2 * np.pi * np.arange(nv) / nv
    uu, ww = np.meshgrid(u, w, indexing="ij")
    ring = major + minor * np.cos(ww)
    pts = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor * np.sin(ww)], axis=-1)
    idx = np.arange(nu * nv).reshape(nu, nv)
    a = idx
    b = np.roll(idx, -1, axis=0)
    c = np.roll(np.roll(idx, -1, axis=0), -1, axis=1)
    d = np.roll(idx, -1, axis=1)
    faces = np.concatenate(
        [np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)]
    )
    return TriangleMesh(pts.reshape(-1, 3), faces)


def read_obj(path: str | Path) -> TriangleMesh:
    """Read ``v``/``f`` records of a Wavefront OBJ file; polygons are fanned."""
    verts: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                try:
                    verts.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise SurfaceValidationError(f"{path}:{lineno}: bad vertex") from exc
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    k = int(tok.split("/")[0])
                    idx.append(k - 1 if k > 0 else len(verts) + k)
                if len(idx) < 3:
                    raise SurfaceValidationError(f"{path}:{lineno}: face with < 3 vertices")
                for j in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[j], idx[j + 1]))
    if not verts or not faces:
        raise SurfaceValidationError(f"{path}: no vertices or faces found")
    return TriangleMesh(np.array(verts), np.array(faces))


def write_obj(path: str | Path, vertices: np.ndarray, faces: np.ndarray, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += ["v {:.17g} {:.17g} {:.17g}".format(*p) for p in np.asarray(vertices)]
    lines += ["f {} {} {}".format(*(np.asarray(t) + 1)) for t in np.asarray(faces)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# radial graphs


@dataclass(frozen=True)
class RadialGraphSurface:
    """Star-shaped surface ``rho = radius[i, j]`` at ``(theta_i, phi_j)``.

    ``ambient`` is ``"r3"`` or ``"h3"``; in H^3, ``rho`` is geodesic distance
    from the origin.
    """

    radius: np.ndarray
    ambient: str = "r3"

    def __post_init__(self):
        r = np.array(self.radius, dtype=float)
        if self.ambient not in AMBIENTS:
            raise SurfaceValidationError(f"ambient must be one of {AMBIENTS}")
        if r.ndim != 2:
            raise SurfaceValidationError("radius must be a 2-D (N_theta, N_phi) array")
        nt, nphi = r.shape
        if nt < 4 or nphi < 8 or nphi % 2:
            raise SurfaceValidationError(
                f"grid {nt}x{nphi} too coarse for pole regularity "
                "(need N_theta >= 4 and even N_phi >= 8)"
            )
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise SurfaceValidationError("radius must be finite and positive (star-shaped)")
        r.setflags(write=False)
        object.__setattr__(self, "radius", r)

    @property
    def shape(self) -> tuple[int, int]:
        return self.radius.shape

    @property
    def dtheta(self) -> float:
        return math.pi / self.radius.shape[0]

    @property
    def dphi(self) -> float:
        return 2.0 * math.pi / self.radius.shape[1]

    @property
    def theta(self) -> np.ndarray:
        return (np.arange(self.radius.shape[0]) + 0.5) * self.dtheta

    @property
    def phi(self) -> np.ndarray:
        return np.arange(self.radius.shape[1]) * self.dphi

    def with_radius(self, radius: np.ndarray) -> "RadialGraphSurface":
        return RadialGraphSurface(radius, self.ambient)

    def directions(self) -> np.ndarray:
        """Unit vectors ``m(theta, phi)`` on the grid, shape (N_theta, N_phi, 3)."""
        return sphere_directions(*self.shape)

    def points(self) -> np.ndarray:
        """Euclidean positions (R^3) or Poincare-free hyperboloid spatial part (H^3)."""
        m = self.directions()
        rho = self.radius[..., None]
        return rho * m if self.ambient == "r3" else np.sinh(rho) * m

    # constructors

    @classmethod
    def from_function(
        cls,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        ambient: str = "r3",
        n_theta: int = 128,
        n_phi: int = 256,
    ) -> "RadialGraphSurface":
        th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
        ph = np.arange(n_phi) * 2.0 * math.pi / n_phi
        tt, pp = np.meshgrid(th, ph, indexing="ij")
        return cls(np.broadcast_to(func(tt, pp), tt.shape), ambient)

    @classmethod
    def from_directions(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        ambient: str = "r3",
        n_theta: int = 128,
        n_phi: int = 256,
    ) -> "RadialGraphSurface":
        """Radius given as a function of the unit direction ``m`` (last axis 3)."""
        return cls(func(sphere_directions(n_theta, n_phi)), ambient)

    @classmethod
    def sphere(cls, r: float = 1.0, ambient: str = "r3", n_theta: int = 128, n_phi: int = 256):
        return cls(np.full((n_theta, n_phi), float(r)), ambient)

    @classmethod
    def ellipsoid(cls, a: float, b: float, c: float, n_theta: int = 128, n_phi: int = 256):
        """Euclidean ellipsoid with semi-axes (a, b, c) along x, y, z."""
        scale = np.array([1.0 / a, 1.0 / b, 1.0 / c])
        return cls.from_directions(
            lambda m: 1.0 / np.linalg.norm(m * scale, axis=-1), "r3", n_theta, n_phi
        )

    @classmethod
    def perturbed_sphere(
        cls,
        r: float = 1.0,
        amplitude: float = 0.2,
        degree: int = 2,
        order: int = 0,
        ambient: str = "r3",
        n_theta: int = 128,
        n_phi: int = 256,
    ):
        """``r * (1 + amplitude * Y)`` with Y a real spherical harmonic scaled to max |Y| = 1."""
        from scipy.special import lpmv

        def radius(tt, pp):
            y = lpmv(order, degree, np.cos(tt)) * np.cos(order * pp)
            fine = np.linspace(0.0, math.pi, 4001)
            peak = np.abs(lpmv(order, degree, np.cos(fine))).max()
            return r * (1.0 + amplitude * y / peak)

        return cls.from_function(radius, ambient, n_theta, n_phi)


@functools.lru_cache(maxsize=8)
def sphere_directions(n_theta: int, n_phi: int) -> np.ndarray:
    """Unit directions of the cell-centred grid, shape (n_theta, n_phi, 3); read-only."""
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    ph = np.arange(n_phi) * 2.0 * math.pi / n_phi
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    st = np.sin(tt)
    out = np.stack([st * np.cos(pp), st * np.sin(pp), np.cos(tt)], axis=-1)
    out.setflags(write=False)
    return out


def _pad_theta(r: np.ndarray) -> np.ndarray:
    """Add one ghost row beyond each pole: r(-theta, phi) = r(theta, phi + pi)."""
    half = r.shape[1] // 2
    return np.vstack([np.roll(r[:1], half, axis=1), r, np.roll(r[-1:], half, axis=1)])


def radial_derivatives(r: np.ndarray, dtheta: float, dphi: float):
    """Second-order central differences: r_t, r_p, r_tt, r_tp, r_pp."""
    p = _pad_theta(r)
    up, down = p[2:], p[:-2]
    r_t = (up - down) / (2.0 * dtheta)
    r_tt = (up - 2.0 * r + down) / dtheta**2
    east = np.roll(r, -1, axis=1)
    west = np.roll(r, 1, axis=1)
    r_p = (east - west) / (2.0 * dphi)
    r_pp = (east - 2.0 * r + west) / dphi**2
    r_tp = (
        np.roll(up, -1, axis=1) - np.roll(up, 1, axis=1)
        - np.roll(down, -1, axis=1) + np.roll(down, 1, axis=1)
    ) / (4.0 * dtheta * dphi)
    return r_t, r_p, r_tt, r_tp, r_pp


@dataclass(frozen=True)
class RadialGeometry:
    """Pointwise geometry of a radial graph.

    The surface sits in the warped product ``d rho^2 + sn(rho)^2 dOmega^2``
    (``sn = rho`` in R^3, ``sinh rho`` in H^3). ``g`` and ``h`` are the first and
    second fundamental forms in the (theta, phi) coordinate frame, with the
    outward normal and the convention that round spheres have positive
    curvature.
    """

    surface: RadialGraphSurface
    g: np.ndarray  # (..., 2, 2)
    h: np.ndarray  # (..., 2, 2)
    area_element: np.ndarray  # quadrature weight per node (includes dtheta dphi)
    radial_cosine: np.ndarray  # <nu, d/drho>
    kappa: np.ndarray  # (..., 2) principal curvatures, ascending
    derivatives: tuple
    # Euclidean frame data (R^3 only): tangent vectors and unit normal.
    tangents: np.ndarray | None = None  # (..., 3, 2) columns X_theta, X_phi
    normal: np.ndarray | None = None  # (..., 3)

    @property
    def sigma1(self) -> np.ndarray:
        return self.kappa[..., 0] + self.kappa[..., 1]

    @property
    def sigma2(self) -> np.ndarray:
        return self.kappa[..., 0] * self.kappa[..., 1]


def radial_geometry(surface: RadialGraphSurface) -> RadialGeometry:
    """Fundamental forms, principal curvatures and quadrature weights."""
    r = surface.radius
    dth, dph = surface.dtheta, surface.dphi
    r_t, r_p, r_tt, r_tp, r_pp = radial_derivatives(r, dth, dph)
    th = surface.theta[:, None]
    st, ct = np.sin(th), np.cos(th)
    if surface.ambient == "r3":
        sn, cs = r, np.ones_like(r)
    else:
        sn, cs = np.sinh(r), np.cosh(r)
    # N^2 = 1 + |grad r|^2 / sn^2 with the round metric on S^2
    norm = np.sqrt(1.0 + (r_t**2 + (r_p / st) ** 2) / sn**2)
    q = cs / sn

    g = np.empty(r.shape + (2, 2))
    g[..., 0, 0] = r_t**2 + sn**2
    g[..., 0, 1] = g[..., 1, 0] = r_t * r_p
    g[..., 1, 1] = r_p**2 + (sn * st) ** 2
    h = np.empty_like(g)
    h[..., 0, 0] = (sn * cs + 2.0 * q * r_t**2 - r_tt) / norm
    h[..., 0, 1] = h[..., 1, 0] = (2.0 * q * r_t * r_p + ct / st * r_p - r_tp) / norm
    h[..., 1, 1] = (sn * cs * st**2 + 2.0 * q * r_p**2 - st * ct * r_t - r_pp) / norm

    det_g = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    tr = (
        g[..., 1, 1] * h[..., 0, 0] - 2.0 * g[..., 0, 1] * h[..., 0, 1] + g[..., 0, 0] * h[..., 1, 1]
    ) / det_g
    det = (h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] ** 2) / det_g
    disc = np.sqrt(np.maximum(tr**2 - 4.0 * det, 0.0))
    kappa = np.stack([0.5 * (tr - disc), 0.5 * (tr + disc)], axis=-1)
    # sqrt(det g) = sn^2 sin(theta) N
    weight = sn**2 * st * norm * dth * dph

    tangents = normal = None
    if surface.ambient == "r3":
        m = surface.directions()
        m_t = np.stack(
            [ct * np.cos(surface.phi), ct * np.sin(surface.phi), -np.broadcast_to(st, r.shape)],
            axis=-1,
        )
        m_p = np.stack(
            [-st * np.sin(surface.phi), st * np.cos(surface.phi), np.zeros(r.shape)], axis=-1
        )
        x_t = r_t[..., None] * m + r[..., None] * m_t
        x_p = r_p[..., None] * m + r[..., None] * m_p
        tangents = np.stack([x_t, x_p], axis=-1)
        normal = (
            m - (r_t / r)[..., None] * m_t - (r_p / (r * st**2))[..., None] * m_p
        ) / norm[..., None]

    return RadialGeometry(
        surface=surface,
        g=g,
        h=h,
        area_element=weight,
        radial_cosine=1.0 / norm,
        kappa=kappa,
        derivatives=(r_t, r_p, r_tt, r_tp, r_pp),
        tangents=tangents,
        normal=normal,
    )


# ---------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class CurvatureSummary:
    """Integrated invariants of a closed hypersurface ``M = dK``.

    ``sigma_integrals[i]`` is the integral of the i-th elementary symmetric
    function of the principal curvatures, ``sigma_integrals[0]`` the area.
    """

    area: float
    sigma1_integral: float
    sigma1_sq_integral: float
    sigma_integrals: tuple[float, ...]
    gauss_integral: float
    euler_char: int
    enclosed_volume: float
    min_sigma1: float
    ambient: str = "r3"
    n: int = 3
    min_principal: float = math.nan
    max_principal: float = math.nan
    star_shaped: bool | None = None
    connected: bool = True

    def __post_init__(self):
        if not self.area > 0:
            raise SurfaceValidationError("summary area must be positive")


@dataclass(frozen=True)
class MeshCorners:
    """Per-corner data of a triangle mesh; corner k of a face is at ``faces[:, k]``."""

    e_next: np.ndarray  # x_{k+1} - x_k, shape (F, 3, 3)
    e_prev: np.ndarray  # x_{k-1} - x_k
    angles: np.ndarray  # interior angle at corner k, shape (F, 3)
    cot: np.ndarray
    face_normals: np.ndarray  # unnormalised, length 2 * face area
    vertex_area: np.ndarray  # mixed Voronoi area per vertex
    vertex_normal: np.ndarray  # area-weighted unit normal per vertex


def mesh_corners(mesh: TriangleMesh) -> MeshCorners:
    f = mesh.faces
    nv = len(mesh.vertices)
    p = mesh.vertices[f]
    e_next = np.roll(p, -1, axis=1) - p
    e_prev = np.roll(p, 1, axis=1) - p
    dots = np.einsum("fki,fki->fk", e_next, e_prev)
    crosses = np.linalg.norm(np.cross(e_next, e_prev), axis=-1)
    angles = np.arctan2(crosses, dots)
    cot = dots / crosses
    fn = mesh.face_normals()
    face_area = 0.5 * np.linalg.norm(fn, axis=1)

    # Voronoi share of corner k: (|x_{k+1}-x_k|^2 cot(k+2) + |x_{k+2}-x_k|^2 cot(k+1)) / 8,
    # replaced by a fixed fraction of the face area on obtuse triangles
    sq = np.einsum("fki,fki->fk", e_next, e_next)
    vor = (sq * np.roll(cot, -2, axis=1) + np.roll(sq, 1, axis=1) * np.roll(cot, -1, axis=1)) / 8.0
    obtuse = angles > 0.5 * np.pi
    share = np.where(
        obtuse.any(axis=1, keepdims=True), np.where(obtuse, 0.5, 0.25) * face_area[:, None], vor
    )
    vertex_area = np.bincount(f.ravel(), weights=share.ravel(), minlength=nv)
    vn = np.zeros((nv, 3))
    for k in range(3):
        np.add.at(vn, f[:, k], fn)
    vn /= np.linalg.norm(vn, axis=1, keepdims=True)
    return MeshCorners(e_next, e_prev, angles, cot, fn, vertex_area, vn)


def summarize_mesh(mesh: TriangleMesh) -> CurvatureSummary:
    mesh.validate()
    f = mesh.faces
    nv = len(mesh.vertices)
    mc_data = mesh_corners(mesh)
    e_next, e_prev, cot = mc_data.e_next, mc_data.e_prev, mc_data.cot
    angles = mc_data.angles
    vertex_area = mc_data.vertex_area
    face_area = 0.5 * np.linalg.norm(mc_data.face_normals, axis=1)

    # cotangent mean-curvature vector: sum over corners of
    # cot(k+2) (x_k - x_{k+1}) + cot(k+1) (x_k - x_{k+2})
    contrib = -(np.roll(cot, -2, axis=1)[..., None] * e_next + np.roll(cot, -1, axis=1)[..., None] * e_prev)
    mc = np.zeros((nv, 3))
    for k in range(3):
        np.add.at(mc, f[:, k], contrib[:, k])
    mc /= 2.0 * vertex_area[:, None]

    vn = mc_data.vertex_normal
    sigma1 = np.linalg.norm(mc, axis=1) * np.sign(np.einsum("ij,ij->i", mc, vn))

    defect = 2.0 * np.pi - np.bincount(f.ravel(), weights=angles.ravel(), minlength=nv)
    gauss_integral = float(math.fsum(defect))
    k_gauss = defect / vertex_area
    mean = 0.5 * sigma1
    root = np.sqrt(np.maximum(mean**2 - k_gauss, 0.0))

    area = float(math.fsum(face_area))
    s1 = float(math.fsum(sigma1 * vertex_area))
    s1sq = float(math.fsum(sigma1**2 * vertex_area))
    chi = nv - len(mesh.edges()) + len(f)
    return CurvatureSummary(
        area=area,
        sigma1_integral=s1,
        sigma1_sq_integral=s1sq,
        sigma_integrals=(area, s1, gauss_integral),
        gauss_integral=gauss_integral,
        euler_char=int(chi),
        enclosed_volume=mesh.signed_volume(),
        min_sigma1=float(sigma1.min()),
        ambient="r3",
        n=3,
        min_principal=float((mean - root).min()),
        max_principal=float((mean + root).max()),
        star_shaped=_mesh_star_shaped(mesh),
        connected=_mesh_components(mesh) == 1,
    )


def _mesh_star_shaped(mesh: TriangleMesh) -> bool:
    """Sufficient test: every face is seen from the inside of the vertex centroid."""
    c = mesh.vertices.mean(axis=0)
    p = mesh.vertices[mesh.faces].mean(axis=1)
    return bool(np.all(np.einsum("ij,ij->i", p - c, mesh.face_normals()) > 0))


def _mesh_components(mesh: TriangleMesh) -> int:
    e = mesh.edges()
    n = len(mesh.vertices)
    adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    return int(connected_components(adj, directed=False)[0])


def summarize_radial_graph(surface: RadialGraphSurface) -> CurvatureSummary:
    geo = radial_geometry(surface)
    w = geo.area_element
    s1 = geo.sigma1
    s2 = geo.sigma2
    area = float(w.sum())
    int_s2 = float((s2 * w).sum())
    r = surface.radius
    st = np.sin(surface.theta)[:, None]
    cell = surface.dtheta * surface.dphi
    if surface.ambient == "r3":
        volume = float((r**3 / 3.0 * st).sum() * cell)
        gauss = int_s2
    else:
        # int_0^r sinh^2 = (sinh r cosh r - r) / 2
        volume = float(((np.sinh(r) * np.cosh(r) - r) / 2.0 * st).sum() * cell)
        gauss = int_s2 - area  # Gauss equation in H^3: K = sigma2 - 1
    return CurvatureSummary(
        area=area,
        sigma1_integral=float((s1 * w).sum()),
        sigma1_sq_integral=float((s1**2 * w).sum()),
        sigma_integrals=(area, float((s1 * w).sum()), int_s2),
        gauss_integral=gauss,
        euler_char=2,
        enclosed_volume=volume,
        min_sigma1=float(s1.min()),
        ambient=surface.ambient,
        n=3,
        min_principal=float(geo.kappa[..., 0].min()),
        max_principal=float(geo.kappa[..., 1].max()),
        star_shaped=True,
    )


def geodesic_sphere_summary(n: int, r: float) -> CurvatureSummary:
    """Exact summary of the geodesic sphere of radius r in H^n.

    All principal curvatures equal ``coth r``.
    """
    if n < 2 or r <= 0:
        raise ValueError("need n >= 2 and r > 0")
    area = sphere_area(n, r)
    k = 1.0 / math.tanh(r)
    sig = tuple(math.comb(n - 1, i) * k**i * area for i in range(n))
    from .hyperbolic import ball_volume

    if n == 3:
        gauss = sig[2] - area
        chi = 2
    elif n == 2:
        gauss = 0.0
        chi = 0
    else:
        gauss = math.nan
        chi = 2 if n % 2 == 1 else 0
    return CurvatureSummary(
        area=area,
        sigma1_integral=sig[1],
        sigma1_sq_integral=((n - 1) * k) ** 2 * area,
        sigma_integrals=sig,
        gauss_integral=gauss,
        euler_char=chi,
        enclosed_volume=ball_volume(n, r),
        min_sigma1=(n - 1) * k,
        ambient=f"h{n}",
        n=n,
        min_principal=k,
        max_principal=k,
        star_shaped=True,
    )


def euclidean_sphere_summary(r: float) -> CurvatureSummary:
    """Exact summary of the round sphere of radius r in R^3."""
    area = FOUR_PI * r * r
    return CurvatureSummary(
        area=area,
        sigma1_integral=2.0 / r * area,
        sigma1_sq_integral=SIXTEEN_PI,
        sigma_integrals=(area, 2.0 / r * area, FOUR_PI),
        gauss_integral=FOUR_PI,
        euler_char=2,
        enclosed_volume=FOUR_PI * r**3 / 3.0,
        min_sigma1=2.0 / r,
        ambient="r3",
        n=3,
        min_principal=1.0 / r,
        max_principal=1.0 / r,
        star_shaped=True,
    )


# ---------------------------------------------------------------------------
# Hawking-type masses


@dataclass(frozen=True)
class HawkingMasses:
    """Hawking-type masses; fields that do not apply to the ambient are None."""

    hawking: float | None
    modified_hawking: float | None
    hyperbolic_modified: float | None


def hawking_masses(summary: CurvatureSummary, ambient: str | None = None) -> HawkingMasses:
    ambient = ambient or summary.ambient
    a = summary.area
    w = summary.sigma1_sq_integral
    if ambient == "r3":
        deficit = 1.0 - w / SIXTEEN_PI
        return HawkingMasses(
            hawking=math.sqrt(a / SIXTEEN_PI) * deficit,
            modified_hawking=a / SIXTEEN_PI * deficit,
            hyperbolic_modified=None,
        )
    if ambient == "h3":
        return HawkingMasses(None, None, a * (SIXTEEN_PI + 4.0 * a - w))
    raise ValueError(f"Hawking masses are defined for r3 and h3, not {ambient!r}")


# ---------------------------------------------------------------------------
# theorem hypotheses

THEOREMS = {
    # id: (ambient requirement, p predicate, p range text, shape requirements)
    "thm1": ("hn", lambda p: p == 2, "p = 2", ("mean_convex", "star_shaped")),
    "thm2": ("h2", lambda p: p >= 3, "p >= 3", ("convex",)),
    "thm3": ("h3", lambda p: 1 < p <= 3, "1<p<=3", ("mean_convex", "star_shaped")),
    "thm4": ("hn", lambda p: p > 1, "p>1", ("convex",)),
    "thm5": ("r3", lambda p: 1 < p < 3, "1<p<3", ("connected",)),
    "thm6": ("r3", lambda p: 1 < p < 3, "1<p<3", ("f_mean_convex", "star_shaped")),
}


@dataclass
class HypothesisReport:
    theorem: str
    p: float | None
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks), "failures": list(self.failures)}

    def _record(self, name: str, ok: bool, message: str) -> None:
        self.checks[name] = bool(ok)
        if not ok:
            self.failures.append(message)


def check_hypotheses(
    summary: CurvatureSummary,
    theorem: str,
    p: float | None = None,
    min_HF: float | None = None,
) -> HypothesisReport:
    """Evaluate the hypotheses of a theorem on summarised surface data.

    ``min_HF`` (minimum anisotropic mean curvature) is needed for thm6.
    """
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; expected one of {sorted(THEOREMS)}")
    ambient_req, p_ok, p_text, shape_req = THEOREMS[theorem]
    rep = HypothesisReport(theorem, p)
    amb = summary.ambient
    if ambient_req == "hn":
        ok = amb.startswith("h")
    else:
        ok = amb == ambient_req
    rep._record("ambient", ok, f"{theorem} needs ambient {ambient_req}, got {amb}")
    if p is not None:
        rep._record("p_range", p_ok(p), f"{theorem} requires {p_text}, got p={p}")
    for req in shape_req:
        if req == "mean_convex":
            rep._record(req, summary.min_sigma1 > 0,
                        f"not mean convex: min sigma1 = {summary.min_sigma1:.6g}")
        elif req == "convex":
            kmin = summary.min_principal if summary.n > 2 else summary.min_sigma1
            rep._record(req, kmin >= 0, f"not convex: min principal curvature = {kmin:.6g}")
        elif req == "star_shaped":
            rep._record(req, bool(summary.star_shaped), "boundary not known to be star-shaped")
        elif req == "connected":
            rep._record(req, summary.connected, "boundary is not connected")
        elif req == "f_mean_convex":
            ok = min_HF is not None and min_HF > 0
            rep._record(req, ok, f"not F-mean convex: min H_F = {min_HF}")
    return rep
