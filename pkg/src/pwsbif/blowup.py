"""Blow-up coordinate charts and the desingularized planar system.

Three nested coordinate inflations resolve the degeneracies of the local
model: a cylinder chart straightening the switching layer, a weighted
sphere over the fold, and a final weighted sphere over the collision point
that also absorbs the parameter.  Their composition is the explicit map

    x   = nu^(2k(1+k)) * rho^(k(1+k)) * x1
    y   = nu^(2k(1+k)) * rho^(2k(1+k))
    eps = nu^(2(1+k)^2) * rho^((1+k)(1+2k))
    mu  = mu_hat * nu^(2k(1+k)) * rho^(k(1+2k))

under which mu = mu_hat * eps^(k/(k+1)) identically.  On the invariant
slice nu = 0 the flow reduces (after the time rescaling
d t_new = rho^(k(1+k)) dt) to the planar system :func:`desing_field`, which
carries the entire local bifurcation structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import normalform
from .errors import OutOfChartError
from .regfun import RegularizationFunction

__all__ = [
    "DesingParams",
    "ChartPoint",
    "cyl_chart_forward",
    "cyl_chart_inverse",
    "sphere_chart_transform",
    "composite_forward",
    "composite_inverse",
    "desing_field",
    "desing_jacobian",
    "k1_cylinder_field",
    "time_desing_factor",
    "phi_plus",
    "pushforward_desing",
]


@dataclass(frozen=True)
class DesingParams:
    """Constants of the desingularized planar system."""

    k: int
    beta: float
    tau: float
    delta: float
    gamma: float
    mu_hat: float

    def __post_init__(self):
        if self.k < 1 or self.k != int(self.k):
            raise ValueError("k must be a positive integer")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates of a point in one named chart.

    Charts and coordinate orders:
      "K1_cyl" : (x, r1, eps1)
      "calK1"  : (x1, r1, rho1)
      "calK2"  : (x2, eps2, rho2)
      "calK3"  : (r3, eps3, rho3)
    """

    chart: str
    coords: tuple

    def __post_init__(self):
        n = {"K1_cyl": 3, "calK1": 3, "calK2": 3, "calK3": 3, "composite": 4}
        if self.chart not in n:
            raise ValueError(f"unknown chart {self.chart!r}")
        if len(self.coords) != n[self.chart]:
            raise ValueError(f"chart {self.chart} expects {n[self.chart]} coordinates")


def cyl_chart_forward(x: float, y: float, eps: float) -> ChartPoint:
    """Cylinder chart over the switching line: (x, r1, eps1) = (x, y, eps/y)."""
    if y <= 0:
        raise OutOfChartError(f"cylinder chart requires y > 0, got y = {y:g}")
    return ChartPoint("K1_cyl", (x, y, eps / y))


def cyl_chart_inverse(pt: ChartPoint) -> tuple:
    if pt.chart != "K1_cyl":
        raise OutOfChartError(f"expected K1_cyl point, got {pt.chart}")
    x, r1, eps1 = pt.coords
    return (x, r1, r1 * eps1)


def _k12(x2, eps2, rho2, k):
    # calK2 -> calK1, valid for eps2 > 0
    if eps2 <= 0:
        raise OutOfChartError("transition requires eps2 > 0")
    return (eps2 ** (-k) * x2, eps2 ** (-2 * k), eps2 ** (1.0 / (k + 1)) * rho2)


def _k12_inv(x1, r1, rho1, k):
    # calK1 -> calK2, valid for r1 > 0
    if r1 <= 0:
        raise OutOfChartError("transition requires r1 > 0")
    eps2 = r1 ** (-1.0 / (2 * k))
    return (x1 * r1 ** 0.5, eps2, rho1 * eps2 ** (-1.0 / (k + 1)))


def _k23(r3, eps3, rho3, k):
    # calK3 -> calK2, valid for r3 > 0
    if r3 <= 0:
        raise OutOfChartError("transition requires r3 > 0")
    return (-r3 ** -0.5, r3 ** (-1.0 / (2 * k)) * eps3, r3 ** (1.0 / (2 * k * (k + 1))) * rho3)


def _k23_inv(x2, eps2, rho2, k):
    # calK2 -> calK3, valid for x2 < 0
    if x2 >= 0:
        raise OutOfChartError("transition requires x2 < 0")
    r3 = x2 ** -2.0
    return (r3, eps2 * (-x2) ** (-1.0 / k), rho2 * (-x2) ** (1.0 / (k * (k + 1))))


def _k31(x1, r1, rho1, k):
    # calK1 -> calK3, valid for x1 < 0
    if x1 >= 0:
        raise OutOfChartError("transition requires x1 < 0")
    return ((-x1) ** -2.0 * r1, (-x1) ** (-1.0 / k), (-x1) ** (1.0 / (k * (k + 1))) * rho1)


def _k31_inv(r3, eps3, rho3, k):
    # calK3 -> calK1, valid for eps3 > 0
    if eps3 <= 0:
        raise OutOfChartError("transition requires eps3 > 0")
    x1 = -eps3 ** (-k * 1.0)
    return (x1, r3 * eps3 ** (-2.0 * k), rho3 * eps3 ** (1.0 / (k + 1)))


_TRANSITIONS = {
    ("calK2", "calK1"): _k12,
    ("calK1", "calK2"): _k12_inv,
    ("calK3", "calK2"): _k23,
    ("calK2", "calK3"): _k23_inv,
    ("calK1", "calK3"): _k31,
    ("calK3", "calK1"): _k31_inv,
}


def sphere_chart_transform(pt: ChartPoint, target: str, k: int) -> ChartPoint:
    """Exact transition between the fold-sphere charts calK1/calK2/calK3."""
    if pt.chart == target:
        return pt
    key = (pt.chart, target)
    if key not in _TRANSITIONS:
        raise OutOfChartError(f"no transition from {pt.chart} to {target}")
    return ChartPoint(target, _TRANSITIONS[key](*pt.coords, k))


# ---------------------------------------------------------------------------
# Composite transform and the desingularized system
# ---------------------------------------------------------------------------

def composite_forward(k: int, x1: float, nu1: float, rho1: float, mu_hat: float) -> tuple:
    """Map inflated coordinates (x1, nu1, rho1, mu_hat) to (x, y, eps, mu)."""
    if nu1 < 0 or rho1 < 0:
        raise OutOfChartError("nu1 and rho1 are radii and must be nonnegative")
    a = nu1 ** (2 * k * (1 + k))
    x = a * rho1 ** (k * (1 + k)) * x1
    y = a * rho1 ** (2 * k * (1 + k))
    eps = nu1 ** (2 * (1 + k) ** 2) * rho1 ** ((1 + k) * (1 + 2 * k))
    mu = mu_hat * a * rho1 ** (k * (1 + 2 * k))
    return x, y, eps, mu


def composite_inverse(k: int, x: float, y: float, eps: float, mu: float) -> tuple:
    """Algebraic inverse of :func:`composite_forward` on y > 0, eps > 0."""
    if y <= 0 or eps <= 0:
        raise OutOfChartError("composite inverse requires y > 0 and eps > 0")
    a = y ** (1.0 / (2 * k * (1 + k)))
    nu1 = (eps / a ** ((1 + k) * (1 + 2 * k))) ** (1.0 / (1 + k))
    rho1 = a / nu1
    x1 = x / (nu1 ** (2 * k * (1 + k)) * rho1 ** (k * (1 + k)))
    mu_hat = mu / eps ** (k / (k + 1.0))
    return x1, nu1, rho1, mu_hat


def desing_field(p: DesingParams, x1: float, rho1: float) -> tuple:
    """The planar system governing the collision unfolding on nu = 0.

        x1'   = rho1^(k(1+k)) ((tau-gamma) beta + mu_hat rho1^(k^2)
                               + tau x1 - delta rho1^(k(1+k))) + k x1 (beta + x1)
        rho1' = rho1 (beta + x1) / k
    """
    if rho1 < 0:
        raise ValueError("rho1 is a blow-up radius and must be nonnegative")
    k = p.k
    rk = rho1 ** (k * (1 + k))
    f1 = rk * ((p.tau - p.gamma) * p.beta + p.mu_hat * rho1 ** (k * k) + p.tau * x1 - p.delta * rk) \
        + k * x1 * (p.beta + x1)
    f2 = rho1 * (p.beta + x1) / k
    return f1, f2


def desing_jacobian(p: DesingParams, x1: float, rho1: float):
    """Analytic Jacobian of :func:`desing_field`."""
    k = p.k
    m = k * (1 + k)
    rk = rho1 ** m
    drk = m * rho1 ** (m - 1) if m >= 1 else 0.0
    inner = (p.tau - p.gamma) * p.beta + p.mu_hat * rho1 ** (k * k) + p.tau * x1 - p.delta * rk
    d_inner = p.mu_hat * (k * k) * rho1 ** (k * k - 1) - p.delta * drk
    j11 = rk * p.tau + k * (p.beta + 2 * x1)
    j12 = drk * inner + rk * d_inner
    j21 = rho1 / k
    j22 = (p.beta + x1) / k
    return ((j11, j12), (j21, j22))


def phi_plus(reg: RegularizationFunction, eps1: float) -> float:
    """Tail remainder phi_+ with phi(1/e1) = 1 - e1^k phi_+(e1); equals beta at 0.

    Reconstructed from the switch function's tail.  A cancellation-free
    tail form is essential here: near the blown-up sphere eps1 is so small
    that the plain difference 1 - phi(1/eps1) underflows to zero.
    """
    if eps1 < 0:
        raise ValueError("eps1 must be nonnegative")
    if eps1 == 0.0:
        return reg.beta
    return reg.tail_at(1.0 / eps1) / eps1 ** reg.k


def k1_cylinder_field(p: normalform.NormalFormParams, reg: RegularizationFunction,
                      x: float, r1: float, eps1: float, mu: float) -> tuple:
    """Desingularized flow in the cylinder chart (x, r1, eps1).

    Uses the tail form of the switch: the switch value at 1/eps1 enters
    only through u = eps1^k phi_+(eps1), which extends smoothly to the
    cylinder edge eps1 = 0 where u = 0.
    """
    if r1 < 0 or eps1 < 0:
        raise ValueError("r1 and eps1 must be nonnegative")
    u = eps1 ** reg.k * phi_plus(reg, eps1)
    th1 = p.theta1(x, r1, mu) if p.theta1 else 0.0
    th2 = p.theta2(x, r1, mu) if p.theta2 else 0.0
    F = (p.tau - p.gamma) * u + (1.0 - u) * (mu + p.tau * x - p.delta * r1 + th1)
    G = u + (1.0 - u) * (x + th2)
    return (r1 * F, r1 * G, -eps1 * G)


def time_desing_factor(k: int, rho1: float) -> float:
    """rho1^(k(1+k)): converts original-time derivatives to the
    desingularized clock (zero on the invariant boundary rho1 = 0)."""
    if rho1 < 0:
        raise ValueError("rho1 must be nonnegative")
    return rho1 ** (k * (1 + k))


def pushforward_desing(p: normalform.NormalFormParams, reg: RegularizationFunction,
                       x1: float, rho1: float, nu1: float, mu_hat: float) -> tuple:
    """Push the full smooth field through the composite chart at fixed
    (eps, mu) and rescale to the desingularized clock.

    For nu1 -> 0 this converges to :func:`desing_field` with the matching
    constants; the mismatch at finite nu1 is O(nu1).

    The field is evaluated in its tail arrangement

        x' = s(tau - gamma) w + (1 - w)(mu + tau x - delta y + theta1)
        y' = s w + (1 - w)(x + theta2),        w = 1 - phi(y/eps),

    because phi itself rounds to 1.0 at the depths the chart reaches and
    the layer contribution would otherwise be lost entirely.
    """
    k = reg.k
    x, y, eps, mu = composite_forward(k, x1, nu1, rho1, mu_hat)
    s = p.sign_lower
    w = reg.tail_at(y / eps)
    th1 = p.theta1(x, y, mu) if p.theta1 else 0.0
    th2 = p.theta2(x, y, mu) if p.theta2 else 0.0
    fx = s * (p.tau - p.gamma) * w + (1.0 - w) * (mu + p.tau * x - p.delta * y + th1)
    fy = s * w + (1.0 - w) * (x + th2)
    # chain rule of the inverse chart along the flow (eps, mu are conserved):
    #   x1' = fx / (nu1^(2k(1+k)) rho1^(k(1+k))) + k x1 fy / y
    #   rho1' = rho1 fy / (k y)
    scale = nu1 ** (2 * k * (1 + k)) * rho1 ** (k * (1 + k))
    x1_dot = fx / scale + k * x1 * fy / y
    rho1_dot = rho1 * fy / (k * y)
    fac = time_desing_factor(k, rho1)
    return (fac * x1_dot, fac * rho1_dot)
