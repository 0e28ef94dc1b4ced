"""Adaptive quadrature, monotone root finding and finite differences.

Every capacity bound in the package reduces to one-dimensional integrals,
most of them over ``[0, inf)`` with exponentially decaying integrands, so the
quadrature here is tuned for that case: a globally adaptive 7/15-point
Gauss-Kronrod rule on finite intervals, and an exponential change of variables
for the half line.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "QuadratureResult",
    "QuadratureError",
    "BudgetExhaustedError",
    "DivergenceError",
    "BracketError",
    "integrate",
    "integrate_to_infinity",
    "solve_monotone",
    "finite_difference_gradient",
]

DEFAULT_TOL = 1e-10
DEFAULT_BUDGET = 1_000_000

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

# Kronrod abscissae (positive half, last one is the centre) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# 7-point Gauss weights sit on Kronrod nodes 1, 3, 5 and the centre.
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes on [-1, 1]
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[13, 11, 9]] = _WG[:3]
_GWEIGHTS[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be positive")


class QuadratureError(ArithmeticError):
    """Base class for quadrature failures."""


class BudgetExhaustedError(QuadratureError):
    """Raised when the evaluation budget runs out; carries the best estimate."""

    def __init__(self, message: str, best: QuadratureResult):
        super().__init__(message)
        self.best = best


class DivergenceError(QuadratureError):
    """The integrand does not decay fast enough for an improper integral."""


class BracketError(ValueError):
    """Target value lies outside the bracket of a monotone solve."""


def _array_callable(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``f`` so it always maps a 1-D array to a float array.

    Integrands written with ``math`` functions or scalar branching cannot take
    arrays; those are evaluated point by point.
    """
    # Decided on the first real call; probing at arbitrary points could
    # leave the integrand's domain.
    state = {"vector": None}

    def call(x: np.ndarray) -> np.ndarray:
        if state["vector"] is None:
            try:
                with np.errstate(all="ignore"):
                    y = np.asarray(f(x), dtype=float)
                state["vector"] = y.shape in ((), x.shape)
            except (TypeError, ValueError):
                state["vector"] = False
            if state["vector"]:
                return np.broadcast_to(y, x.shape).astype(float)
        if state["vector"]:
            y = np.asarray(f(x), dtype=float)
            return np.broadcast_to(y, x.shape).astype(float)
        return np.array([float(f(float(xi))) for xi in x])

    return call


def _gk15(fv: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fx = fv(centre + half * _NODES)
    if not np.all(np.isfinite(fx)):
        bad = (centre + half * _NODES)[~np.isfinite(fx)][0]
        raise QuadratureError(f"integrand is not finite at x={bad!r}")
    resk = float(np.dot(_KWEIGHTS, fx))
    resg = float(np.dot(_GWEIGHTS, fx))
    reskh = 0.5 * resk
    resabs = float(np.dot(_KWEIGHTS, np.abs(fx))) * abs(half)
    resasc = float(np.dot(_KWEIGHTS, np.abs(fx - reskh))) * abs(half)
    value = resk * half
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return value, err


def integrate(
    f: Callable,
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    rel_tol: float = DEFAULT_TOL,
    max_evals: int = DEFAULT_BUDGET,
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    The interval with the largest error estimate is bisected until the summed
    estimate drops below ``max(tol, rel_tol * |value|)``.
    Raises BudgetExhaustedError (with the best result attached) when more
    than ``max_evals`` integrand evaluations would be needed.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")

    fv = _array_callable(f)
    value, err = _gk15(fv, a, b)
    evals = 15
    heap = [(-err, a, b, value, err)]
    frozen_val = 0.0
    frozen_err = 0.0
    total_val, total_err = value, err

    while total_err > max(tol, rel_tol * abs(total_val)):
        if not heap:
            break
        if evals + 30 > max_evals:
            best = QuadratureResult(total_val, total_err, evals)
            raise BudgetExhaustedError(
                f"quadrature budget of {max_evals} evaluations exhausted "
                f"(estimate {total_val!r} +- {total_err:.3g})",
                best,
            )
        _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or (hi - lo) < 8 * _EPS * max(abs(lo), abs(hi)):
            # Interval cannot be split further in floating point.
            frozen_val += v
            frozen_err += e
            continue
        v1, e1 = _gk15(fv, lo, mid)
        v2, e2 = _gk15(fv, mid, hi)
        evals += 30
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
        total_val += v1 + v2 - v
        total_err += e1 + e2 - e

    total_val = math.fsum([item[3] for item in heap]) + frozen_val
    total_err = math.fsum([item[4] for item in heap]) + frozen_err
    return QuadratureResult(total_val, total_err, evals)


def _decay_rate(f: Callable[[float], float], a: float) -> float:
    """Estimate the exponential decay rate of ``f`` from tail probes.

    Returns ``math.inf`` when the integrand underflows in the tail.
    """
    t = [a + 20.0, a + 40.0, a + 80.0]
    with np.errstate(all="ignore"):
        v = [float(f(ti)) for ti in t]
    if not all(math.isfinite(x) for x in v):
        raise DivergenceError("integrand is not finite in the tail")
    if any(x < 0 for x in v):
        raise DivergenceError("integrand is negative in the tail")
    if v[1] == 0.0 and v[2] == 0.0:
        return math.inf
    if v[2] == 0.0:
        return math.inf
    if v[0] == 0.0 or v[1] == 0.0:
        raise DivergenceError("integrand vanishes and then reappears in the tail")
    near = math.log(v[0] / v[1]) / 20.0
    far = math.log(v[1] / v[2]) / 40.0
    if far <= 1e-3:
        raise DivergenceError(
            f"integrand does not decay (tail rate {far:.3g}); integral diverges"
        )
    if far < 0.75 * near:
        raise DivergenceError(
            "integrand decays slower than exponentially; "
            f"tail rates {near:.3g} then {far:.3g}"
        )
    return far


def integrate_to_infinity(
    f: Callable,
    a: float = 0.0,
    tol: float = DEFAULT_TOL,
    rel_tol: float = DEFAULT_TOL,
    max_evals: int = DEFAULT_BUDGET,
) -> QuadratureResult:
    """Integrate an exponentially decaying ``f`` over ``[a, inf)``.

    Substitutes ``u = exp(-lam * (t - a))`` which maps the half line onto
    ``(0, 1]``. ``lam`` is ``min(1, c)`` where ``c`` is the decay rate seen by
    tail probes, so the transformed integrand stays bounded at ``u = 0``.
    """
    a = float(a)
    fs = _scalar(f)
    lam = min(1.0, _decay_rate(fs, a))
    fv = _array_callable(f)

    def g(u):
        u = np.asarray(u, dtype=float)
        t = a - np.log(u) / lam
        with np.errstate(over="ignore", under="ignore"):
            return fv(np.atleast_1d(t)).reshape(u.shape) / (lam * u)

    res = integrate(g, 0.0, 1.0, tol=tol, rel_tol=rel_tol, max_evals=max_evals)
    return QuadratureResult(res.value, res.error_estimate, res.evaluations + 3)


def _scalar(f: Callable) -> Callable[[float], float]:
    def call(x: float) -> float:
        y = np.asarray(f(float(x)), dtype=float)
        return float(y.reshape(-1)[0])

    return call


def solve_monotone(
    g: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
) -> float:
    """Solve ``g(r) = target`` for strictly increasing ``g`` on ``[lo, hi]``.

    The residual check is relative for targets larger than one.
    """
    glo = g(lo) - target
    ghi = g(hi) - target
    slack = tol * max(1.0, abs(target))
    if glo > slack or ghi < -slack:
        raise BracketError(
            f"target {target!r} outside [{g(lo)!r}, {g(hi)!r}] on [{lo}, {hi}]"
        )
    if abs(glo) <= slack and glo >= 0:
        return lo
    if abs(ghi) <= slack and ghi <= 0:
        return hi
    if glo >= 0:
        return lo
    if ghi <= 0:
        return hi
    r = brentq(lambda x: g(x) - target, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)
    return float(r)


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], x, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient, error O(h**2) per component."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step.flat[i] = h
        grad.flat[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad
