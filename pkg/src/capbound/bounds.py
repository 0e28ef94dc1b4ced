"""Upper bounds for p-capacity from geometric data.

Every bound has the shape ``(int_0^inf T(t)^{-1/(p-1)} dt)^{1-p}`` for some
majorant ``T`` of ``int_{M_t} |D psi|^{p-1}`` along a foliation ``M_t``. The
functions here take the integrated geometric invariants of the initial
surface and return a ``BoundReport``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hyperbolic import isoperimetric_I
from .numerics import (
    DivergenceError,
    QuadratureError,
    integrate,
    integrate_to_infinity,
)

__all__ = [
    "BoundReport",
    "BoundInputError",
    "FoliationBound",
    "cap_upper_from_Tp",
    "thm1_bound",
    "thm2_bound",
    "thm3_bound",
    "thm3_p2_closed_form",
    "thm3_p2_branch_formula",
    "thm4_bound",
    "thm4_n2_p2_closed_form",
    "theta_integral",
    "thm5_bound",
    "thm6_bound",
    "cor1_value",
    "old_bound_lx22",
    "EQUALITY_TOL",
]

FOUR_PI = 4.0 * math.pi
SIXTEEN_PI = 16.0 * math.pi
EQUALITY_TOL = 1e-3
QUAD_TOL = 1e-12


class BoundInputError(ValueError):
    """Geometric data is inconsistent with the hypotheses of a bound."""


@dataclass
class BoundReport:
    theorem: str
    case_label: str
    p: float
    inputs: dict
    value: float
    quadrature_error: float = 0.0
    hypotheses: dict | None = None
    cross_checks: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.value > 0):
            raise ValueError(f"bound value must be positive, got {self.value!r}")
        if not self.quadrature_error >= 0:
            raise ValueError("quadrature_error must be nonnegative")

    def to_dict(self) -> dict:
        out = {
            "schema": 1,
            "theorem": self.theorem,
            "case_label": self.case_label,
            "p": self.p,
            "inputs": dict(self.inputs),
            "value": self.value,
            "quadrature_error": self.quadrature_error,
        }
        if self.cross_checks:
            out["cross_checks"] = dict(self.cross_checks)
        out["hypotheses"] = self.hypotheses
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _power_bound(q: float, q_err: float, p: float, factor: float = 1.0) -> tuple[float, float]:
    """``factor * q^{1-p}`` and its propagated error."""
    value = factor * q ** (1.0 - p)
    return value, abs(1.0 - p) * value * q_err / q


def _check_p(p: float, lo: float, hi: float, text: str, lo_open=True, hi_open=True) -> None:
    ok_lo = p > lo if lo_open else p >= lo
    ok_hi = p < hi if hi_open else p <= hi
    if not (ok_lo and ok_hi):
        raise BoundInputError(f"requires {text}, got p={p}")


# ---------------------------------------------------------------------------
# generic foliation bound


@dataclass(frozen=True)
class FoliationBound:
    """Value of ``(int_0^inf T^{-1/(p-1)})^{1-p}``; ``degenerate`` when the integral diverges."""

    value: float
    quadrature_error: float
    degenerate: bool = False
    message: str = ""

    def __float__(self) -> float:
        return self.value


def cap_upper_from_Tp(Tp: Callable[[float], float], p: float, tol: float = QUAD_TOL) -> FoliationBound:
    """Capacity bound from a foliation with ``T_p(t)`` given as a callable.

    A divergent integral gives the (trivially true) bound 0, flagged
    degenerate rather than raised.
    """
    if not p > 1:
        raise BoundInputError("need p > 1")
    k = 1.0 / (p - 1.0)

    def f(t):
        val = np.asarray(Tp(t), dtype=float)
        if np.any(val <= 0):
            raise BoundInputError("T_p must be positive")
        return val ** (-k)

    try:
        res = integrate_to_infinity(f, 0.0, tol=0.0, rel_tol=tol)
    except DivergenceError as exc:
        return FoliationBound(0.0, 0.0, True, f"integral of T_p^(-1/(p-1)) diverges: {exc}")
    value, err = _power_bound(res.value, res.error_estimate, p)
    return FoliationBound(value, err)


# ---------------------------------------------------------------------------
# H^n via inverse mean curvature flow


def thm1_bound(n: int, W2: float | None, boundary_area: float, p: float = 2.0, tol: float = QUAD_TOL) -> BoundReport:
    """Cap_2 bound for mean convex, star-shaped K in H^n."""
    if p != 2:
        raise BoundInputError(f"thm1 requires p = 2, got p={p}")
    if int(n) != n or n < 2:
        raise BoundInputError("thm1 needs an integer n >= 2")
    if not boundary_area > 0:
        raise BoundInputError("boundary area must be positive")
    area = float(boundary_area)
    if n == 2:
        # W2 = pi for every such K in H^2
        value = 2.0 * math.pi / math.asinh(2.0 * math.pi / area)
        quad = integrate_to_infinity(
            lambda t: (4.0 * math.pi**2 + np.exp(2.0 * t) * area**2) ** -0.5, 0.0, tol=0.0, rel_tol=tol
        )
        return BoundReport(
            "thm1",
            "closed form (n=2)",
            2.0,
            {"n": 2, "W2": math.pi, "boundary_area": area},
            value,
            0.0,
            cross_checks={"quadrature": 1.0 / quad.value, "quadrature_error": quad.error_estimate / quad.value**2},
        )
    if W2 is None or not W2 > 0:
        raise BoundInputError(f"thm1 needs W2 > 0 for n >= 3, got {W2}")
    beta = (n - 2) / (n - 1)
    gamma = (n - 2) / (n * (n - 1))

    def iso(t: float) -> float:
        return isoperimetric_I(n, math.exp(t) * area)

    # Running inner integral J(t) = int_0^t e^{-beta tau} I(e^tau |dK|) dtau,
    # accumulated from the nearest cached node below t.
    knots = [0.0]
    values = [0.0]

    def inner(t: float) -> float:
        i = int(np.searchsorted(knots, t, side="right")) - 1
        t0, j0 = knots[i], values[i]
        if t == t0:
            return j0
        seg = integrate(lambda s: math.exp(-beta * s) * iso(s), t0, t, tol=0.0, rel_tol=1e-13).value
        j = j0 + seg
        knots.insert(i + 1, t)
        values.insert(i + 1, j)
        return j

    def outer(t: float) -> float:
        big = math.exp(beta * t) * (W2 + gamma * inner(t)) + iso(t) / n
        if big <= 0:
            raise BoundInputError("nonpositive thm1 integrand; check W2")
        return 1.0 / big

    res = integrate_to_infinity(outer, 0.0, tol=0.0, rel_tol=tol)
    value, err = _power_bound(res.value, res.error_estimate, 2.0, factor=n * (n - 1))
    return BoundReport(
        "thm1",
        "nested quadrature",
        2.0,
        {"n": int(n), "W2": float(W2), "boundary_area": area},
        value,
        err,
    )


def thm2_bound(area: float, Tp0: float, p: float, sigma1_integral: float | None = None, tol: float = QUAD_TOL) -> BoundReport:
    """Cap_p bound (p >= 3) for convex K in H^2 from |M| and T_p(0) = int kappa^{p-1}.

    With ``sigma1_integral`` given, the Hoelder inequality
    ``|M|^{p-2} T_p(0) >= (int kappa)^{p-1}`` is checked.
    """
    _check_p(p, 3.0, math.inf, "p >= 3", lo_open=False)
    if not (area > 0 and Tp0 > 0):
        raise BoundInputError("area and T_p(0) must be positive")
    base = area ** (p - 2.0) * Tp0
    if sigma1_integral is not None:
        lower = sigma1_integral ** (p - 1.0)
        if base < lower * (1.0 - 1e-9):
            raise BoundInputError(
                f"|M|^(p-2) T_p(0) = {base:.6g} < (int kappa)^(p-1) = {lower:.6g}; "
                "data violates Hoelder's inequality"
            )
    head = base ** (2.0 / (p - 1.0))
    c_const = head - area**2
    e1 = (p - 2.0) / (p - 1.0)

    def f(t):
        t = np.asarray(t, dtype=float)
        # e^{2t}|M|^2 + C written as |M|^2 (e^{2t} - 1) + head to avoid cancellation
        inside = area**2 * np.expm1(2.0 * t) + head
        return np.exp(e1 * t) * area**e1 * inside**-0.5

    res = integrate_to_infinity(f, 0.0, tol=0.0, rel_tol=tol)
    value, err = _power_bound(res.value, res.error_estimate, p)
    label = "C=0" if c_const == 0 else ("C>0" if c_const > 0 else "C<0")
    return BoundReport(
        "thm2",
        label,
        float(p),
        {"area": float(area), "Tp0": float(Tp0), "C": c_const},
        value,
        err,
    )


def thm3_p2_branch_formula(a: float, b: float, c: float) -> tuple[float, str]:
    """``int_0^inf (a e^{-t} + b e^t + c)^{-1/2} e^{-t/2} dt`` by its antiderivative.

    Uses the arsinh / arcosh / log form according to the sign of ``4ab - c^2``.
    These lose digits as ``a -> 0``; ``thm3_p2_closed_form`` does not.
    """
    if not (a > 0 and b > 0 and c > 0):
        raise BoundInputError("branch formulas need a, b, c > 0")
    disc = 4.0 * a * b - c * c
    ra = math.sqrt(a)
    if abs(disc) <= 1e-12 * c * c:
        return (math.log(2.0 * a + c) - math.log(c)) / ra, "4ab=c^2"
    if disc > 0:
        d = math.sqrt(disc)
        return (math.asinh((2.0 * a + c) / d) - math.asinh(c / d)) / ra, "4ab>c^2"
    d = math.sqrt(-disc)
    return (math.acosh((2.0 * a + c) / d) - math.acosh(c / d)) / ra, "4ab<c^2"


def thm3_p2_closed_form(a: float, b: float, c: float) -> tuple[float, str]:
    """Closed form of the p = 2 integral, valid on every branch and at a = 0.

    All three antiderivative branches reduce to
    ``log((2a + c + 2 sqrt(a(a+b+c))) / (c + 2 sqrt(ab))) / sqrt(a)``, written
    here with log1p so it tends smoothly to ``2 (sqrt(b+c) - sqrt(b)) / c``.
    """
    if a < 0 or b <= 0 or c <= 0:
        raise BoundInputError("closed form needs a >= 0, b > 0, c > 0")
    if a == 0:
        return 2.0 * (math.sqrt(b + c) - math.sqrt(b)) / c, "a=0 limit"
    disc = 4.0 * a * b - c * c
    if abs(disc) <= 1e-12 * c * c:
        branch = "4ab=c^2"
    else:
        branch = "4ab>c^2" if disc > 0 else "4ab<c^2"
    ra = math.sqrt(a)
    gap = (a + c) / (math.sqrt(a + b + c) + math.sqrt(b))  # sqrt(a+b+c) - sqrt(b)
    value = math.log1p((2.0 * a + 2.0 * ra * gap) / (c + 2.0 * ra * math.sqrt(b))) / ra
    return value, branch


def thm3_bound(area: float, sigma1_sq: float, p: float, tol: float = QUAD_TOL, a_tol: float = 1e-9) -> BoundReport:
    """Cap_p bound (1 < p <= 3) for mean convex, star-shaped K in H^3."""
    _check_p(p, 1.0, 3.0, "1<p<=3", hi_open=False)
    if not area > 0:
        raise BoundInputError("area must be positive")
    b = 4.0 * area
    c = SIXTEEN_PI
    a = sigma1_sq - b - c
    scale = sigma1_sq
    if a < -a_tol * scale:
        raise BoundInputError(
            f"a = int sigma1^2 - 4|M| - 16 pi = {a:.6g} < 0; "
            "a closed surface in H^3 has nonpositive modified Hawking mass"
        )
    a_clamped = max(a, 0.0) if a >= a_tol * scale else 0.0
    inputs = {"area": float(area), "sigma1_sq": float(sigma1_sq), "a": a, "b": b, "c": c}
    k = (3.0 - p) / (2.0 * (p - 1.0))

    def f(t):
        t = np.asarray(t, dtype=float)
        return (a_clamped * np.exp(-t) + b * np.exp(t) + c) ** -0.5 * np.exp(-k * t)

    res = integrate_to_infinity(f, 0.0, tol=0.0, rel_tol=tol)
    factor = area ** ((3.0 - p) / 2.0)
    if p == 2:
        closed, branch = thm3_p2_closed_form(a_clamped, b, c)
        value, _ = _power_bound(closed, 0.0, p, factor)
        quad_value, quad_err = _power_bound(res.value, res.error_estimate, p, factor)
        checks = {"quadrature": quad_value}
        if a_clamped > 0:
            checks["branch_formula"] = _power_bound(thm3_p2_branch_formula(a_clamped, b, c)[0], 0.0, p, factor)[0]
        label = "equality/geodesic-sphere (a=0)" if a_clamped == 0 else branch
        return BoundReport("thm3", label, 2.0, inputs, value, quad_err, cross_checks=checks)
    value, err = _power_bound(res.value, res.error_estimate, p, factor)
    label = "equality/geodesic-sphere (a=0)" if a_clamped == 0 else "strict"
    return BoundReport("thm3", label, float(p), inputs, value, err)


# ---------------------------------------------------------------------------
# H^n via unit-speed normal flow


def thm4_n2_p2_closed_form(length: float, kappa_integral: float) -> tuple[float, str]:
    """Closed form of the thm4 bound for curves in H^2 at p = 2."""
    big_l, k = float(length), float(kappa_integral)
    if k == big_l:
        return big_l, "int kappa = |M|"
    if k > big_l:
        d = math.sqrt((k - big_l) * (k + big_l))
        return d / math.log1p((k - big_l + d) / big_l), "int kappa > |M| (log)"
    e = math.sqrt((big_l - k) * (big_l + k))
    return 0.5 * e / math.atan(math.sqrt((big_l - k) / (big_l + k))), "int kappa < |M| (arctan)"


def _log_normal_flow_area(sigma_integrals, n: int, t):
    """log of sum_i cosh^{n-1-i} t sinh^i t S_i, stable for large t."""
    t = np.asarray(t, dtype=float)
    em = np.exp(-2.0 * t)
    total = np.zeros_like(t)
    for i, s_i in enumerate(sigma_integrals):
        total = total + s_i * (1.0 + em) ** (n - 1 - i) * (-np.expm1(-2.0 * t)) ** i
    return (n - 1) * (t - math.log(2.0)) + np.log(total)


def thm4_bound(sigma_integrals, n: int, p: float, tol: float = QUAD_TOL) -> BoundReport:
    """Cap_p bound (p > 1) for convex K in H^n from int sigma_i, i = 0..n-1."""
    _check_p(p, 1.0, math.inf, "p>1")
    s = [float(x) for x in sigma_integrals]
    if len(s) < n:
        raise BoundInputError(f"thm4 needs {n} sigma integrals (i = 0..{n - 1}), got {len(s)}")
    s = s[:n]
    if not s[0] > 0 or any(x < 0 for x in s):
        raise BoundInputError("sigma integrals of a convex surface must be nonnegative with positive area")
    k = 1.0 / (p - 1.0)
    res = integrate_to_infinity(
        lambda t: np.exp(-k * _log_normal_flow_area(s, n, t)), 0.0, tol=0.0, rel_tol=tol
    )
    value, err = _power_bound(res.value, res.error_estimate, p)
    inputs = {"n": int(n), "sigma_integrals": s}
    if n == 2 and p == 2:
        closed, branch = thm4_n2_p2_closed_form(s[0], s[1])
        return BoundReport(
            "thm4", f"sharp (sufficient); {branch}", 2.0, inputs, closed, err,
            cross_checks={"quadrature": value},
        )
    return BoundReport("thm4", "sharp (sufficient) on geodesic balls", float(p), inputs, value, err)


# ---------------------------------------------------------------------------
# R^3 via (anisotropic) inverse mean curvature flow


def theta_integral(s: float, p: float, tol: float = QUAD_TOL) -> float:
    """int_0^{s^{(3-p)/(2(p-1))}} (1 + r^{2(p-1)/(3-p)})^{-1/2} dr."""
    return _theta(s, p, tol)[0]


def _theta(s: float, p: float, tol: float) -> tuple[float, float]:
    _check_p(p, 1.0, 3.0, "1<p<3")
    if not s > 0:
        raise BoundInputError("theta needs s > 0")
    alpha = 2.0 * (p - 1.0) / (3.0 - p)
    log_top = (3.0 - p) / (2.0 * (p - 1.0)) * math.log(s)
    if p == 2:
        return math.asinh(math.sqrt(s)), 0.0
    top = math.exp(min(log_top, 0.0))
    res = integrate(lambda r: (1.0 + np.asarray(r) ** alpha) ** -0.5, 0.0, top, tol=0.0, rel_tol=tol)
    val, err = res.value, res.error_estimate
    if log_top > 0:
        # beyond r = 1 use r = e^v, which keeps huge upper limits tractable
        tail = integrate(
            lambda v: np.exp(v) * (1.0 + np.exp(alpha * np.asarray(v))) ** -0.5,
            0.0, log_top, tol=0.0, rel_tol=tol,
        )
        val += tail.value
        err += tail.error_estimate
    return val, err


def _theta_by_quadrature(s: float, p: float, tol: float = QUAD_TOL) -> float:
    alpha = 2.0 * (p - 1.0) / (3.0 - p)
    top = s ** ((3.0 - p) / (2.0 * (p - 1.0)))
    return integrate(lambda r: (1.0 + np.asarray(r) ** alpha) ** -0.5, 0.0, top, tol=0.0, rel_tol=tol).value


def _strict_value(wulff_area: float, area: float, s: float, p: float, tol: float):
    theta, theta_err = _theta(s, p, tol)
    value = (
        ((3.0 - p) / (p - 1.0)) ** (p - 1.0)
        * wulff_area ** ((p - 1.0) / 2.0)
        * area ** ((3.0 - p) / 2.0)
        * s ** ((3.0 - p) / 2.0)
        * theta ** (1.0 - p)
    )
    return value, abs(1.0 - p) * value * theta_err / theta, theta


def thm5_bound(area: float, willmore: float, p: float, equality_tol: float = EQUALITY_TOL, tol: float = QUAD_TOL) -> BoundReport:
    """Cap_p bound (1 < p < 3) in R^3 from area and Willmore energy int H^2."""
    _check_p(p, 1.0, 3.0, "1<p<3")
    if not area > 0:
        raise BoundInputError("area must be positive")
    excess = willmore / SIXTEEN_PI - 1.0
    inputs = {"area": float(area), "willmore": float(willmore)}
    if excess < -equality_tol:
        raise BoundInputError(
            f"Willmore energy {willmore:.6g} < 16 pi: no closed surface has this (bad mesh data?)"
        )
    lead = ((3.0 - p) / (p - 1.0)) ** (p - 1.0)
    if abs(excess) <= equality_tol:
        r0 = math.sqrt(area / FOUR_PI)
        inputs["r0"] = r0
        return BoundReport("thm5", "equality/round-sphere", float(p), inputs, lead * FOUR_PI * r0 ** (3.0 - p))
    value, err, theta = _strict_value(FOUR_PI, area, excess, p, tol)
    inputs.update(s=excess, theta=theta)
    return BoundReport("thm5", "strict", float(p), inputs, value, err)


def cor1_value(wulff_area: float, area_f: float, s: float) -> float:
    """sqrt(|dW|_F |Sigma|_F) sqrt(s) / arsinh sqrt(s)."""
    rs = math.sqrt(s)
    return math.sqrt(wulff_area * area_f) * rs / math.asinh(rs)


def thm6_bound(summary, wulff, p: float, equality_tol: float = EQUALITY_TOL, tol: float = QUAD_TOL) -> BoundReport:
    """Anisotropic Cap_{F,p} bound (1 < p < 3) in R^3.

    ``summary`` is an AnisotropicSummary; ``wulff`` a WulffShape or |dW|_F.
    """
    _check_p(p, 1.0, 3.0, "1<p<3")
    wulff_area = float(getattr(wulff, "anisotropic_area", wulff))
    area_f = float(summary.area_F)
    s = summary.HF_sq_integral / (4.0 * wulff_area) - 1.0
    inputs = {"area_F": area_f, "HF_sq_integral": float(summary.HF_sq_integral), "wulff_area_F": wulff_area, "s": s}
    if s < -equality_tol:
        raise BoundInputError(
            f"s = {s:.6g} < 0 violates int H_F^2 dmu_F >= 4|dW|_F (bad surface data?)"
        )
    lead = ((3.0 - p) / (p - 1.0)) ** (p - 1.0)
    if abs(s) <= equality_tol:
        r0 = math.sqrt(area_f / wulff_area)
        inputs["r0"] = r0
        return BoundReport("thm6", "equality/wulff-shape", float(p), inputs, lead * wulff_area * r0 ** (3.0 - p))
    value, err, theta = _strict_value(wulff_area, area_f, s, p, tol)
    inputs["theta"] = theta
    checks = {}
    if p == 2:
        closed = cor1_value(wulff_area, area_f, s)
        theta_quad = _theta_by_quadrature(s, p, tol)
        quad_value = math.sqrt(wulff_area * area_f) * math.sqrt(s) / theta_quad
        if abs(closed - quad_value) > 1e-8 * closed:
            raise QuadratureError(f"thm6 closed form {closed!r} and quadrature {quad_value!r} disagree")
        checks = {"cor1_closed_form": closed, "quadrature": quad_value}
        value = closed
    return BoundReport("thm6", "strict", float(p), inputs, value, err, cross_checks=checks)


def old_bound_lx22(summary, wulff) -> float:
    """Earlier p = 2 bound: sqrt(|dW|_F |Sigma|_F)(1 + sqrt(int H_F^2 dmu_F / (4|dW|_F))) / 2."""
    wulff_area = float(getattr(wulff, "anisotropic_area", wulff))
    ratio = summary.HF_sq_integral / (4.0 * wulff_area)
    return 0.5 * math.sqrt(wulff_area * summary.area_F) * (1.0 + math.sqrt(ratio))
