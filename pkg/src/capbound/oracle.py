"""Reference p-capacities of radially symmetric sets.

For a ball of radius r in a rotationally symmetric space with sphere area
A(t), the capacitary potential is radial and

    Cap_p(B_r) = (int_r^inf A(t)^{-1/(p-1)} dt)^{1-p}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as sp_integrate

from .hyperbolic import unit_sphere_area
from .numerics import DivergenceError, integrate_to_infinity

__all__ = [
    "RadialCapacityQuery",
    "radial_capacity",
    "radial_energy_check",
    "wulff_capacity",
]


@dataclass(frozen=True)
class RadialCapacityQuery:
    """Ball of radius ``radius`` in H^n (``ambient="hyperbolic"``) or R^n."""

    ambient: str
    n: int
    radius: float
    p: float

    def __post_init__(self):
        if self.ambient not in ("hyperbolic", "euclidean"):
            raise ValueError("ambient must be 'hyperbolic' or 'euclidean'")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("dimension must be an integer >= 2")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not self.p > 1:
            raise ValueError("need p > 1")

    def log_area(self, t):
        """log A(t), evaluated without overflow for large t."""
        t = np.asarray(t, dtype=float)
        log_omega = math.log(unit_sphere_area(self.n))
        if self.ambient == "euclidean":
            return log_omega + (self.n - 1) * np.log(t)
        # log sinh t = t - log 2 + log1p(-exp(-2t))
        return log_omega + (self.n - 1) * (t - math.log(2.0) + np.log1p(-np.exp(-2.0 * t)))

    def check_convergent(self) -> None:
        if self.ambient == "euclidean" and self.p >= self.n:
            raise DivergenceError(
                f"Cap_p of a ball in R^{self.n} with p={self.p} >= n is not positive; "
                "the radial integral diverges"
            )


def _inverse_power_integral(q: RadialCapacityQuery, tol: float) -> tuple[float, float]:
    """int_r^inf A^{-1/(p-1)} dt, substituting t = r e^s."""
    r = q.radius
    k = 1.0 / (q.p - 1.0)

    def f(s):
        s = np.asarray(s, dtype=float)
        t = r * np.exp(s)
        with np.errstate(over="ignore"):
            return np.exp(math.log(r) + s - k * q.log_area(t))

    res = integrate_to_infinity(f, 0.0, tol=0.0, rel_tol=tol)
    return res.value, res.error_estimate


def radial_capacity(q: RadialCapacityQuery, tol: float = 1e-12) -> float:
    q.check_convergent()
    val, _ = _inverse_power_integral(q, tol)
    return val ** (1.0 - q.p)


def radial_capacity_with_error(q: RadialCapacityQuery, tol: float = 1e-12) -> tuple[float, float]:
    """Capacity and a propagated absolute error estimate."""
    q.check_convergent()
    val, err = _inverse_power_integral(q, tol)
    cap = val ** (1.0 - q.p)
    return cap, cap * (q.p - 1.0) * err / val


def radial_energy_check(q: RadialCapacityQuery, grid: int = 200) -> float:
    """p-energy of the radial capacitary potential, computed independently.

    The profile has u(r) = 1, u(inf) = 0 and u' = -A^{-1/(p-1)} / N with N its
    normalisation. Both N and int |u'|^p A are evaluated with QUADPACK in the
    original radial variable (``grid`` is the subinterval limit), so this
    shares neither the quadrature engine nor the change of variables with
    ``radial_capacity``.
    """
    q.check_convergent()
    k = 1.0 / (q.p - 1.0)

    def weight(t: float) -> float:
        return math.exp(-k * float(q.log_area(t)))

    opts = dict(limit=grid, epsabs=0.0, epsrel=1e-13)
    r = q.radius
    # split at a few multiples of r so the near field is resolved for tiny r
    breaks = [r, 2 * r, 10 * r, 100 * r]
    norm = sum(sp_integrate.quad(weight, a, b, **opts)[0] for a, b in zip(breaks, breaks[1:]))
    norm += sp_integrate.quad(weight, breaks[-1], np.inf, **opts)[0]

    log_norm = math.log(norm)

    def energy_density(t: float) -> float:
        # |u'|^p A in log form; A alone overflows far out in H^n
        log_a = float(q.log_area(t))
        return math.exp(q.p * (-k * log_a - log_norm) + log_a)

    energy = sum(
        sp_integrate.quad(energy_density, a, b, **opts)[0] for a, b in zip(breaks, breaks[1:])
    )
    energy += sp_integrate.quad(energy_density, breaks[-1], np.inf, **opts)[0]
    return energy


def wulff_capacity(wulff, r0: float, p: float) -> float:
    """Anisotropic p-capacity of the scaled Wulff ball r0 * W in R^3.

    ``wulff`` is a WulffShape or the value of |dW|_F.
    """
    if not 1 < p < 3:
        raise ValueError("need 1 < p < 3")
    if not r0 > 0:
        raise ValueError("need r0 > 0")
    area_f = float(getattr(wulff, "anisotropic_area", wulff))
    return ((3.0 - p) / (p - 1.0)) ** (p - 1.0) * area_f * r0 ** (3.0 - p)
