"""Curvature flows of star-shaped radial graphs.

* IMCF in H^3: normal speed 1 / sigma_1.
* Inverse anisotropic mean curvature flow in R^3: velocity nu_F / H_F.
* Unit-speed normal flow in H^n, which has a closed-form area.

A normal speed ``V`` moves a radial graph by ``r_t = V / <nu, d_rho>``. On the latitude/longitude grid the physical
longitude spacing ``sin(theta) dphi`` collapses at the poles, so the rate is
low-pass filtered in phi row by row; the stable step then scales with
``dtheta^2`` instead of the tiny polar cell width. Time stepping is the
second-order Runge-Kutta-Legendre (RKL2) super-time-stepping scheme, which is
explicit but stable over many forward Euler limits.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .anisotropic import (
    MinkowskiNorm,
    WulffShape,
    anisotropic_fields,
    anisotropic_summary,
    inverse_2x2,
)
from .surface import (
    CurvatureSummary,
    RadialGraphSurface,
    hawking_masses,
    radial_geometry,
    summarize_radial_graph,
)

__all__ = [
    "FlowBreakdownError",
    "FlowSample",
    "FlowTrace",
    "run_imcf_h3",
    "run_iamcf_r3",
    "normal_flow_area",
    "SAMPLE_DT",
]

SAMPLE_DT = 0.05
CFL = 0.2
DT_FLOOR = 1e-7
MAX_STAGES = 80


class FlowBreakdownError(RuntimeError):
    """The flow left the class it is defined on; ``trace`` holds the valid part."""

    def __init__(self, message: str, trace: "FlowTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class FlowSample:
    t: float
    area: float
    mass: float
    min_curv: float
    max_curv: float


@dataclass
class FlowTrace:
    flow_kind: str
    samples: list[FlowSample] = field(default_factory=list)
    dt_policy: dict = field(default_factory=dict)
    final_surface: RadialGraphSurface | None = None

    def append(self, sample: FlowSample) -> None:
        if self.samples and not sample.t > self.samples[-1].t:
            raise ValueError("flow samples must have strictly increasing t")
        if not sample.area > 0:
            raise ValueError("flow sample area must be positive")
        self.samples.append(sample)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "area", "mass", "min_curv", "max_curv"])
        for s in self.samples:
            writer.writerow([f"{s.t:.6f}"] + [repr(float(v)) for v in (s.area, s.mass, s.min_curv, s.max_curv)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _polar_filter_mask(surface: RadialGraphSurface) -> np.ndarray:
    """Keep phi-mode k in row i iff sin(k dphi / 2) <= sin(theta_i) dphi / dtheta."""
    nt, nphi = surface.shape
    k = np.arange(nphi // 2 + 1)
    limit = np.sin(surface.theta)[:, None] * surface.dphi / surface.dtheta
    return np.sin(0.5 * k * surface.dphi)[None, :] <= limit


def _filtered(increment: np.ndarray, mask: np.ndarray) -> np.ndarray:
    spec = np.fft.rfft(increment, axis=1)
    return np.fft.irfft(spec * mask, n=increment.shape[1], axis=1)


def _metric_scale(geo, sym: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of ``sym`` (a contravariant 2-tensor) in physical units.

    The phi component is rescaled by sin(theta) because the filter caps the
    effective phi resolution at the dtheta scale.
    """
    st = np.sin(geo.surface.theta)[:, None]
    a = sym[..., 0, 0]
    b = sym[..., 0, 1] * st
    c = sym[..., 1, 1] * st**2
    return 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + b**2)


def rkl2_coefficients(stages: int):
    """Stage coefficients (mu, nu, mu_tilde, gamma_tilde) of the RKL2 scheme.

    An s-stage step is stable for dt up to (s^2 + s - 2) / 4 forward Euler limits.
    Index 0 is unused; index 1 holds only mu_tilde.
    """
    s = stages
    if s < 2:
        raise ValueError("RKL2 needs at least 2 stages")
    b = np.empty(s + 1)
    b[:3] = 1.0 / 3.0
    j = np.arange(3, s + 1)
    b[3:] = (j**2 + j - 2.0) / (2.0 * j * (j + 1.0))
    a = 1.0 - b
    w1 = 4.0 / (s**2 + s - 2.0)
    mu = np.zeros(s + 1)
    nu = np.zeros(s + 1)
    mu_t = np.zeros(s + 1)
    gam_t = np.zeros(s + 1)
    mu_t[1] = b[1] * w1
    for k in range(2, s + 1):
        mu[k] = (2.0 * k - 1.0) / k * b[k] / b[k - 1]
        nu[k] = -(k - 1.0) / k * b[k] / b[k - 2]
        mu_t[k] = mu[k] * w1
        gam_t[k] = -a[k - 1] * mu_t[k]
    return mu, nu, mu_t, gam_t


def stages_for(ratio: float) -> int:
    """Fewest RKL2 stages whose stability span covers ``ratio`` Euler steps."""
    s = 2
    while (s * s + s - 2) / 4.0 < ratio:
        s += 1
    return s


class _StageFailure(Exception):
    pass


class _Stepper:
    """RKL2 super-time-stepping with rejection and fixed-interval sampling.

    The forward Euler limit is ``cfl * dtheta^2 / max D`` with D the principal
    symbol of the linearised speed; each super step spans several of those.
    """

    def __init__(self, kind, initial, t_end, dt_max, speed_fn, sample_fn, cfl=CFL,
                 sample_dt=SAMPLE_DT, max_stages=MAX_STAGES):
        if not t_end > 0 or not math.isfinite(t_end):
            raise ValueError(f"t_end must be positive and finite, got {t_end}")
        if dt_max is not None and not dt_max > 0:
            raise ValueError(f"dt must be positive, got {dt_max}")
        self.kind = kind
        self.surface = initial
        self.t_end = float(t_end)
        self.dt_max = dt_max
        self.speed_fn = speed_fn
        self.sample_fn = sample_fn
        self.cfl = cfl
        self.sample_dt = sample_dt
        self.max_stages = max_stages
        self.mask = _polar_filter_mask(initial)
        self.evaluations = 0
        self.trace = FlowTrace(
            kind,
            dt_policy={"scheme": "rkl2", "cfl": cfl, "sample_dt": sample_dt, "max_stages": max_stages},
        )

    def _rate(self, radius):
        if not np.all(np.isfinite(radius)) or np.any(radius <= 0):
            raise _StageFailure("radius left the star-shaped class")
        speed, diff, failure = self.speed_fn(self.surface.with_radius(radius))
        self.evaluations += 1
        if failure is not None:
            raise _StageFailure(failure)
        return _filtered(speed, self.mask), diff

    def _super_step(self, y0, l0, dt, stages):
        mu, nu, mu_t, gam_t = rkl2_coefficients(stages)
        prev2 = y0
        prev = y0 + mu_t[1] * dt * l0
        for k in range(2, stages + 1):
            lk, _ = self._rate(prev)
            cur = (mu[k] * prev + nu[k] * prev2 + (1.0 - mu[k] - nu[k]) * y0
                   + mu_t[k] * dt * lk + gam_t[k] * dt * l0)
            prev2, prev = prev, cur
        return prev

    def run(self) -> FlowTrace:
        t = 0.0
        try:
            rate, diff = self._rate(self.surface.radius)
        except _StageFailure as exc:
            raise FlowBreakdownError(f"initial surface invalid for {self.kind}: {exc}", self.trace) from None
        self.trace.append(self.sample_fn(self.surface, 0.0))
        n_samples = int(round(self.t_end / self.sample_dt))
        sample_times = [min(self.sample_dt * (k + 1), self.t_end) for k in range(n_samples)]
        if not sample_times or sample_times[-1] < self.t_end:
            sample_times.append(self.t_end)
        steps = rejected = 0
        dt_lo, dt_hi = math.inf, 0.0
        h2 = self.surface.dtheta**2
        target_idx = 0
        while target_idx < len(sample_times):
            target = sample_times[target_idx]
            dt_euler = self.cfl * h2 / float(np.max(diff))
            span = (self.max_stages**2 + self.max_stages - 2) / 4.0
            dt = span * dt_euler
            if self.dt_max is not None:
                dt = min(dt, self.dt_max)
            land = target - t <= dt * (1 + 1e-9)
            if land:
                dt = target - t
            while True:
                stages = stages_for(dt / dt_euler)
                try:
                    new_r = self._super_step(self.surface.radius, rate, dt, stages)
                    new_rate, new_diff = self._rate(new_r)
                    break
                except _StageFailure as exc:
                    rejected += 1
                    dt *= 0.5
                    land = False
                    if dt < DT_FLOOR:
                        self._finish(steps, rejected, dt_lo, dt_hi)
                        raise FlowBreakdownError(f"{self.kind} broke down at t={t:.6g}: {exc}", self.trace) from None
            t = target if land else t + dt
            steps += 1
            dt_lo, dt_hi = min(dt_lo, dt), max(dt_hi, dt)
            self.surface = self.surface.with_radius(new_r)
            rate, diff = new_rate, new_diff
            if land:
                self.trace.append(self.sample_fn(self.surface, t))
                target_idx += 1
        self._finish(steps, rejected, dt_lo, dt_hi)
        return self.trace

    def _finish(self, steps, rejected, dt_lo, dt_hi):
        self.trace.final_surface = self.surface
        self.trace.dt_policy.update(
            steps=steps,
            rejected=rejected,
            evaluations=self.evaluations,
            dt_min=dt_lo if steps else 0.0,
            dt_max=dt_hi,
        )


def run_imcf_h3(
    initial: RadialGraphSurface,
    t_end: float,
    dt: float | None = None,
    cfl: float = CFL,
    max_stages: int = MAX_STAGES,
) -> FlowTrace:
    """Inverse mean curvature flow of a mean convex radial graph in H^3.

    Samples record |M_t|, the modified Hawking mass |M|(16 pi + 4|M| - int sigma1^2)
    and the principal-curvature extrema.
    """
    if initial.ambient != "h3":
        raise ValueError("run_imcf_h3 needs a surface in H^3")

    def speed(surface):
        geo = radial_geometry(surface)
        s1 = geo.sigma1
        if not np.all(s1 > 0):
            return None, None, f"mean curvature not positive (min sigma1 = {s1.min():.3g})"
        # d r_t / d r_ij = g^{ij} / sigma1^2
        diff = _metric_scale(geo, inverse_2x2(geo.g)) / s1**2
        return 1.0 / (s1 * geo.radial_cosine), diff, None

    def sample(surface, t):
        summ = summarize_radial_graph(surface)
        mass = hawking_masses(summ, "h3").hyperbolic_modified
        return FlowSample(t, summ.area, mass, summ.min_principal, summ.max_principal)

    return _Stepper("IMCF_H3", initial, t_end, dt, speed, sample, cfl, max_stages=max_stages).run()


def run_iamcf_r3(
    initial: RadialGraphSurface,
    norm: MinkowskiNorm,
    wulff: WulffShape,
    t_end: float,
    dt: float | None = None,
    cfl: float = CFL,
    max_stages: int = MAX_STAGES,
) -> FlowTrace:
    """Inverse anisotropic mean curvature flow of an F-mean convex radial graph in R^3.

    The normal component of nu_F / H_F is F(nu) / H_F. Samples record |Sigma_t|_F,
    the anisotropic Hawking mass and the extrema of H_F.
    """
    if initial.ambient != "r3":
        raise ValueError("run_iamcf_r3 needs a surface in R^3")

    def speed(surface):
        geo = radial_geometry(surface)
        fnu, hf, _, ginv, a_coord = anisotropic_fields(geo, norm)
        if not np.all(hf > 0):
            return None, None, f"anisotropic mean curvature not positive (min H_F = {hf.min():.3g})"
        # d r_t / d r_ij = F(nu) (g^-1 A g^-1)^{ij} / H_F^2
        diff = _metric_scale(geo, ginv @ a_coord @ ginv) * fnu / hf**2
        return fnu / (hf * geo.radial_cosine), diff, None

    def sample(surface, t):
        summ = anisotropic_summary(surface, norm, wulff)
        return FlowSample(t, summ.area_F, summ.mass_F, summ.min_HF, summ.max_HF)

    return _Stepper("IAMCF_R3", initial, t_end, dt, speed, sample, cfl, max_stages=max_stages).run()


def normal_flow_area(summary: CurvatureSummary, n: int, t: float) -> float:
    """|M_t| under the unit-speed normal flow in H^n, from int sigma_i (i = 0..n-1)."""
    s = summary.sigma_integrals
    if s is None or len(s) < n:
        raise ValueError(f"normal_flow_area needs {n} sigma integrals, got {0 if s is None else len(s)}")
    if t == 0:
        return float(s[0])
    ch, sh = math.cosh(t), math.sinh(t)
    return float(math.fsum(ch ** (n - 1 - i) * sh**i * s[i] for i in range(n)))
