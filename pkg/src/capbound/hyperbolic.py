"""Model geometry of hyperbolic space H^n.

Geodesic spheres and balls, the isoperimetric profile and the first three
quermassintegrals of a domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.special import gamma

from .numerics import integrate, solve_monotone

__all__ = [
    "HyperbolicBall",
    "Quermassintegrals",
    "unit_sphere_area",
    "sphere_area",
    "ball_volume",
    "isoperimetric_I",
    "quermassintegrals",
]


@dataclass(frozen=True)
class HyperbolicBall:
    n: int
    r: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if not self.r > 0:
            raise ValueError("radius must be positive")

    @property
    def area(self) -> float:
        return sphere_area(self.n, self.r)

    @property
    def volume(self) -> float:
        return ball_volume(self.n, self.r)


@dataclass(frozen=True)
class Quermassintegrals:
    W0: float
    W1: float
    W2: float


@lru_cache(maxsize=None)
def unit_sphere_area(n: int) -> float:
    """Area of the unit sphere S^{n-1} in R^n."""
    return float(2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0))


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")


def sphere_area(n: int, r: float) -> float:
    """|dB_r| in H^n."""
    _check_n(n)
    return unit_sphere_area(n) * math.sinh(r) ** (n - 1)


def ball_volume(n: int, r: float) -> float:
    """|B_r| in H^n; closed form for n = 2, quadrature of the sphere area otherwise."""
    _check_n(n)
    if r <= 0:
        return 0.0
    if n == 2:
        # 2*pi*(cosh r - 1) without cancellation at small r
        return 4.0 * math.pi * math.sinh(0.5 * r) ** 2
    omega = unit_sphere_area(n)
    res = integrate(
        lambda t: omega * math.sinh(t) ** (n - 1), 0.0, r, tol=0.0, rel_tol=1e-13
    )
    return res.value


def _area_radius(n: int, area: float) -> float:
    """Radius of the geodesic sphere with the given area."""
    hi = 1.0
    while sphere_area(n, hi) < area:
        hi *= 2.0
    return solve_monotone(lambda r: sphere_area(n, r), area, 0.0, hi, tol=1e-13)


def isoperimetric_I(n: int, area: float) -> float:
    """Volume of the geodesic ball whose boundary has the given area."""
    _check_n(n)
    if not area > 0:
        raise ValueError("area must be positive")
    if n == 2:
        s = area
        # sqrt(4 pi^2 + s^2) - 2 pi, rationalised
        return s * s / (math.sqrt(4.0 * math.pi**2 + s * s) + 2.0 * math.pi)
    return ball_volume(n, _area_radius(n, area))


def quermassintegrals(
    n: int, volume: float, area: float, sigma1_integral: float
) -> Quermassintegrals:
    _check_n(n)
    if min(volume, area, sigma1_integral) < 0:
        raise ValueError("quermassintegral inputs must be nonnegative")
    w2 = sigma1_integral / (n * (n - 1)) - volume / n
    return Quermassintegrals(W0=volume, W1=area / n, W2=w2)
