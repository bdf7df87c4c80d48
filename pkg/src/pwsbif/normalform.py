"""The local model of a regularized focus-boundary collision.

The smooth two-parameter family

    x' = s(tau - gamma) + phi(y/eps) * (-s(tau - gamma) + mu + tau x - delta y + theta1)
    y' = s               + phi(y/eps) * (-s + x + theta2)

with s = +-1 the orientation of the lower field, interpolates between an
upper field with a focus at (O(mu^2), mu/delta + O(mu^2)) and a constant
lower field.  Its nonsmooth limit collides the focus with y = 0 at mu = 0.
The higher-order terms theta1, theta2 are polynomial and default to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import dynamics, filippov
from .errors import BudgetError, DegenerateError, DetectionError, NoCycleError
from .regfun import RegularizationFunction

__all__ = [
    "Poly3",
    "NormalFormParams",
    "PwsCycle",
    "smooth_field",
    "smooth_jacobian",
    "pws_limit",
    "filippov_field_nf",
    "pws_equilibria",
    "build_pws_cycle",
    "mirrored_smooth_field",
]


class Poly3:
    """Sparse polynomial in (x, y, mu): {(i, j, l): coeff}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        self.terms = dict(terms) if terms else {}

    def __bool__(self):
        return bool(self.terms)

    def __call__(self, x: float, y: float, mu: float) -> float:
        if not self.terms:
            return 0.0
        total = 0.0
        for (i, j, l), c in self.terms.items():
            total += c * x**i * y**j * mu**l
        return total

    def partial(self, var: int) -> "Poly3":
        """Derivative with respect to x (0), y (1) or mu (2)."""
        out = {}
        for expo, c in self.terms.items():
            n = expo[var]
            if n == 0:
                continue
            new = list(expo)
            new[var] = n - 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + c * n
        return Poly3(out)

    def min_total_degree(self) -> int:
        if not self.terms:
            return 10**9
        return min(sum(e) for e in self.terms)


@dataclass(frozen=True)
class NormalFormParams:
    """Constants of the local model.

    tau > 0 and delta > tau^2/4 put a counterclockwise unstable focus in
    the upper field; gamma is the sliding-flow derivative at the collision
    (any sign); sign_lower = +1 gives stable sliding, -1 unstable.
    """

    tau: float
    delta: float
    gamma: float
    sign_lower: int = +1
    theta1: Poly3 = dc_field(default_factory=Poly3)
    theta2: Poly3 = dc_field(default_factory=Poly3)
    mu_plus: float = 0.5

    def __post_init__(self):
        if not self.delta > self.tau**2 / 4.0:
            raise ValueError(f"focus condition delta > tau^2/4 violated: delta={self.delta}, tau={self.tau}")
        if self.sign_lower not in (+1, -1):
            raise ValueError("sign_lower must be +1 or -1")
        if self.theta1 and self.theta1.min_total_degree() < 2:
            raise ValueError("theta1 must have no constant or linear monomials")
        if self.theta2:
            if self.theta2.min_total_degree() < 2:
                raise ValueError("theta2 must have no constant or linear monomials")
            if any(i + j == 0 for (i, j, l) in self.theta2.terms):
                raise ValueError("theta2 must contain no pure-mu monomials")


def smooth_field(p: NormalFormParams, reg: RegularizationFunction,
                 x: float, y: float, mu: float, eps: float) -> tuple:
    """Right-hand side of the smooth local model."""
    s = p.sign_lower
    phi = reg.eval(y / eps)
    tg = p.tau - p.gamma
    th1 = p.theta1(x, y, mu) if p.theta1 else 0.0
    th2 = p.theta2(x, y, mu) if p.theta2 else 0.0
    f1 = s * tg + phi * (-s * tg + mu + p.tau * x - p.delta * y + th1)
    f2 = s + phi * (-s + x + th2)
    return f1, f2


def smooth_jacobian(p: NormalFormParams, reg: RegularizationFunction,
                    x: float, y: float, mu: float, eps: float):
    """Analytic Jacobian of :func:`smooth_field` in (x, y)."""
    s = p.sign_lower
    phi = reg.eval(y / eps)
    dphi = reg.deriv(y / eps) / eps
    tg = p.tau - p.gamma
    th1 = p.theta1(x, y, mu) if p.theta1 else 0.0
    th2 = p.theta2(x, y, mu) if p.theta2 else 0.0
    th1x = p.theta1.partial(0)(x, y, mu) if p.theta1 else 0.0
    th1y = p.theta1.partial(1)(x, y, mu) if p.theta1 else 0.0
    th2x = p.theta2.partial(0)(x, y, mu) if p.theta2 else 0.0
    th2y = p.theta2.partial(1)(x, y, mu) if p.theta2 else 0.0
    g1 = -s * tg + mu + p.tau * x - p.delta * y + th1
    g2 = -s + x + th2
    return (
        (phi * (p.tau + th1x), dphi * g1 + phi * (-p.delta + th1y)),
        (phi * (1.0 + th2x), dphi * g2 + phi * th2y),
    )


def mirrored_smooth_field(p: NormalFormParams, reg: RegularizationFunction,
                          x: float, y: float, mu: float, eps: float) -> tuple:
    """The clockwise-rotation partner of the local model.

    Obtained by the involution (x, mu) -> (-x, -mu): applying it twice
    returns the original field values.
    """
    f1, f2 = smooth_field(p, reg, -x, y, -mu, eps)
    return -f1, f2


def pws_limit(p: NormalFormParams) -> filippov.PwsSystem:
    """The nonsmooth two-zone system obtained as the switch sharpens.

    The parameter slot of the returned system is mu.
    """
    s = p.sign_lower
    tg = p.tau - p.gamma

    def upper(x, y, mu):
        th1 = p.theta1(x, y, mu) if p.theta1 else 0.0
        th2 = p.theta2(x, y, mu) if p.theta2 else 0.0
        return (mu + p.tau * x - p.delta * y + th1, x + th2)

    def upper_jac(x, y, mu):
        th1x = p.theta1.partial(0)(x, y, mu) if p.theta1 else 0.0
        th1y = p.theta1.partial(1)(x, y, mu) if p.theta1 else 0.0
        th2x = p.theta2.partial(0)(x, y, mu) if p.theta2 else 0.0
        th2y = p.theta2.partial(1)(x, y, mu) if p.theta2 else 0.0
        return ((p.tau + th1x, -p.delta + th1y), (1.0 + th2x, th2y))

    def lower(x, y, mu):
        return (s * tg, float(s))

    def lower_jac(x, y, mu):
        return ((0.0, 0.0), (0.0, 0.0))

    return filippov.PwsSystem(
        zplus=filippov.PlanarVectorField(upper, upper_jac, name="upper"),
        zminus=filippov.PlanarVectorField(lower, lower_jac, name="lower"),
        domain=((-2.0, 2.0), (-2.0, 2.0)),
    )


def filippov_field_nf(p: NormalFormParams, x: float, mu: float) -> float:
    """Closed-form sliding flow of the nonsmooth limit."""
    th1 = p.theta1(x, 0.0, mu) if p.theta1 else 0.0
    th2 = p.theta2(x, 0.0, mu) if p.theta2 else 0.0
    den = 1.0 - x - th2
    if abs(den) < 1e-14:
        raise DegenerateError(f"sliding flow denominator vanishes at x = {x:g}")
    return (mu + p.gamma * x + th1 - (p.tau - p.gamma) * th2) / den


def fold_point(p: NormalFormParams, mu: float) -> float:
    """Tangency x_F(mu) of the upper field with y = 0 (O(mu^2) from zero)."""
    x = 0.0
    for _ in range(60):
        th2 = p.theta2(x, 0.0, mu) if p.theta2 else 0.0
        g = x + th2
        if abs(g) <= 1e-14:
            return x
        th2x = p.theta2.partial(0)(x, 0.0, mu) if p.theta2 else 0.0
        x -= g / (1.0 + th2x)
    return x


@dataclass(frozen=True)
class Equilibria:
    focus: Optional[tuple]      # (x, y) in the upper plane, or None
    sliding_eq: Optional[tuple] # (x, 0.0) on the switching line, or None


def pws_equilibria(p: NormalFormParams, mu: float) -> Equilibria:
    """Upper-field focus and sliding equilibrium of the nonsmooth limit.

    The focus exists for mu > 0 (it sits at height ~ mu/delta); the sliding
    equilibrium exists for gamma > 0, mu > 0 (a repeller on the sliding
    set) and for gamma < 0, mu < 0 (an attractor).
    """
    if abs(mu) > p.mu_plus:
        raise ValueError(f"|mu| = {abs(mu):g} outside the configured local window mu_plus = {p.mu_plus:g}")
    focus = None
    if mu > 0:
        def fld(x, y):
            th1 = p.theta1(x, y, mu) if p.theta1 else 0.0
            th2 = p.theta2(x, y, mu) if p.theta2 else 0.0
            return (mu + p.tau * x - p.delta * y + th1, x + th2)
        sol = dynamics.find_equilibrium(fld, None, (0.0, mu / p.delta))
        if sol is not None:
            focus = sol[0]

    sliding = None
    if (p.gamma > 0 and mu > 0) or (p.gamma < 0 and mu < 0):
        x = -mu / p.gamma
        for _ in range(60):
            g = filippov_field_nf(p, x, mu)
            if abs(g) <= 1e-14:
                break
            h = 1e-7 * max(1.0, abs(x))
            d = (filippov_field_nf(p, x + h, mu) - filippov_field_nf(p, x - h, mu)) / (2 * h)
            if d == 0.0:
                break
            x -= g / d
        if x < fold_point(p, mu):
            sliding = (x, 0.0)
    return Equilibria(focus=focus, sliding_eq=sliding)


@dataclass(frozen=True)
class PwsCycle:
    """Closed nonsmooth cycle: an upper-field arc plus a sliding segment."""

    points: np.ndarray
    x_fold: float
    x_drop: float
    mu: float


def build_pws_cycle(p: NormalFormParams, mu: float, max_spacing: float = 1e-3) -> PwsCycle:
    """The nonsmooth cycle through the visible fold, for 0 < mu < mu_plus.

    The upper arc runs from the fold to its first return on the sliding
    side; the sliding segment closes the loop along y = 0.  Raises
    NoCycleError when a sliding equilibrium sits inside the would-be
    sliding segment (the no-cycle configuration), and BudgetError when the
    upper arc has no return within the time budget.
    """
    if not 0.0 < mu < p.mu_plus:
        raise ValueError(f"cycle construction requires 0 < mu < {p.mu_plus:g}, got {mu:g}")
    if p.sign_lower < 0:
        raise NoCycleError("unstable sliding carries no attracting nonsmooth cycle")

    x_f = fold_point(p, mu)

    def fld(x, y):
        th1 = p.theta1(x, y, mu) if p.theta1 else 0.0
        th2 = p.theta2(x, y, mu) if p.theta2 else 0.0
        return (mu + p.tau * x - p.delta * y + th1, x + th2)

    sec = dynamics.Section(kind="horizontal", level=0.0, direction="decreasing",
                           window=(-math.inf, x_f - 1e-12))
    cfg = dynamics.IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, max_step=5e-3, t_budget=1e3)
    traj = dynamics.integrate(fld, (x_f, 0.0), (0.0, cfg.t_budget), cfg,
                              events=[sec], stop_on=0, record=True, t_skip_events=1e-9)
    if traj.status != "event":
        raise BudgetError("upper arc has no return within the time budget", partial=traj)
    x_d = traj.events[-1].x

    if p.gamma > 0:
        eq = pws_equilibria(p, mu).sliding_eq
        if eq is not None and x_d < eq[0] < x_f:
            raise NoCycleError(
                f"sliding equilibrium at x = {eq[0]:.6g} lies inside the sliding segment "
                f"[{x_d:.6g}, {x_f:.6g}]; no closed orbit exists"
            )

    arc = dynamics.resample_polyline(traj.points, max_spacing)
    n_slide = max(2, int(math.ceil((x_f - x_d) / max_spacing)) + 1)
    slide_x = np.linspace(x_d, x_f, n_slide)
    slide = np.column_stack([slide_x, np.zeros_like(slide_x)])
    pts = np.vstack([arc, slide[1:]])
    pts[-1] = pts[0]
    return PwsCycle(points=pts, x_fold=x_f, x_drop=x_d, mu=mu)
