"""Two application models wired into the generic analysis pipeline.

* A predator-prey system whose functional response switches on sharply at
  a prey-density threshold (refuge effect).  Its nonsmooth limit has a
  focus-boundary collision at an explicit parameter value, and the smooth
  system oscillates below the collision threshold.
* A mass-on-belt friction oscillator with a cubic velocity-weakening
  friction law.  Its collision is degenerate (the sliding flow is constant
  in x), oscillation onset still scales like eps^(k/(k+1)), and belt
  speeds of order eps produce creep: slow drift along an invariant
  manifold that the nonsmooth description misses entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import blowup, dynamics, filippov, normalform
from .errors import ConfigurationError, DetectionError
from .regfun import RegularizationFunction

__all__ = [
    "GauseParams",
    "StickSlipParams",
    "gause_field",
    "gause_jacobian",
    "gause_pws",
    "gause_mu_bf",
    "gause_h_star",
    "gause_desing_transform",
    "gause_hopf",
    "gause_relaxation_cycle",
    "stickslip_field",
    "stickslip_jacobian",
    "stickslip_pws",
    "stickslip_mu_plus",
    "stickslip_equilibrium",
    "stickslip_alpha_ah",
    "stickslip_desing_field",
    "stickslip_relaxation_cycle",
    "creep_study",
    "CreepReport",
]


# ---------------------------------------------------------------------------
# Predator-prey model with a sharp response threshold
# ---------------------------------------------------------------------------

def _h_star(r: float, m: float, e_tilde: float) -> float:
    return 2.0 * e_tilde / r * (-1.0 + math.sqrt(1.0 + r / m))


@dataclass(frozen=True)
class GauseParams:
    """Constants of the predator-prey model.

    r: prey growth rate, lam: response slope, h: handling time,
    m: predator mortality, e_tilde: conversion efficiency, mu: the
    prey-density threshold (the bifurcation parameter).
    Requires e_tilde - h*m > 0 and h below the low-handling-time bound
    h_star = (2 e_tilde / r)(-1 + sqrt(1 + r/m)).
    """

    r: float = 1.0
    lam: float = 1.0
    h: float = 0.5
    m: float = 0.2
    e_tilde: float = 0.5
    mu: float = 0.2

    def __post_init__(self):
        for name in ("r", "lam", "h", "m", "e_tilde"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not self.e_tilde - self.h * self.m > 0:
            raise ConfigurationError("requires e_tilde - h*m > 0")
        if not self.h < _h_star(self.r, self.m, self.e_tilde):
            raise ConfigurationError(
                f"handling time h = {self.h:g} is not below h_star = {_h_star(self.r, self.m, self.e_tilde):g}"
            )


def _gause_w(p: GauseParams, y: float, mu: float) -> float:
    return p.lam * (y + mu) / (1.0 + p.h * p.lam * (y + mu))


def _gause_w_dy(p: GauseParams, y: float, mu: float) -> float:
    return p.lam / (1.0 + p.h * p.lam * (y + mu)) ** 2


def gause_field(p: GauseParams, reg: RegularizationFunction,
                x: float, y: float, eps: float, mu: Optional[float] = None) -> tuple:
    """Smooth model: predator x, shifted prey y (threshold at y = 0)."""
    m = p.mu if mu is None else mu
    w = _gause_w(p, y, m)
    phi = reg.eval(y / eps)
    return (
        x * (-p.m + phi * p.e_tilde * w),
        p.r * (m + y) - phi * x * w,
    )


def gause_jacobian(p: GauseParams, reg: RegularizationFunction,
                   x: float, y: float, eps: float, mu: Optional[float] = None):
    m = p.mu if mu is None else mu
    w = _gause_w(p, y, m)
    wy = _gause_w_dy(p, y, m)
    phi = reg.eval(y / eps)
    dphi = reg.deriv(y / eps) / eps
    return (
        (-p.m + phi * p.e_tilde * w, x * p.e_tilde * (dphi * w + phi * wy)),
        (-phi * w, p.r - x * (dphi * w + phi * wy)),
    )


def gause_pws(p: GauseParams) -> filippov.PwsSystem:
    """Nonsmooth limit; the parameter slot of the system is mu."""

    def upper(x, y, mu):
        w = _gause_w(p, y, mu)
        return (x * (p.e_tilde * w - p.m), p.r * (mu + y) - x * w)

    def upper_jac(x, y, mu):
        w = _gause_w(p, y, mu)
        wy = _gause_w_dy(p, y, mu)
        return ((p.e_tilde * w - p.m, x * p.e_tilde * wy), (-w, p.r - x * wy))

    def lower(x, y, mu):
        return (-p.m * x, p.r * (mu + y))

    def lower_jac(x, y, mu):
        return ((-p.m, 0.0), (0.0, p.r))

    xmax = 4.0 * p.e_tilde * p.r / (p.lam * (p.e_tilde - p.h * p.m))
    return filippov.PwsSystem(
        zplus=filippov.PlanarVectorField(upper, upper_jac, name="feeding"),
        zminus=filippov.PlanarVectorField(lower, lower_jac, name="refuge"),
        domain=((-1e-9, xmax), (-2.0, 4.0)),
    )


def gause_mu_bf(p: GauseParams) -> float:
    """Collision threshold mu_bf = m / (lam (e_tilde - h m))."""
    den = p.lam * (p.e_tilde - p.h * p.m)
    if not den > 0:
        raise ConfigurationError("requires e_tilde - h*m > 0")
    return p.m / den


def gause_h_star(p: GauseParams) -> float:
    """Low-handling-time bound (2 e_tilde / r)(-1 + sqrt(1 + r/m))."""
    return _h_star(p.r, p.m, p.e_tilde)


def gause_equilibrium_upper(p: GauseParams, mu: float) -> tuple:
    """Interior equilibrium of the feeding branch."""
    den = p.lam * (p.e_tilde - p.h * p.m)
    return (p.e_tilde * p.r / den, -mu + p.m / den)


def gause_equilibrium_smooth(p: GauseParams, reg: RegularizationFunction,
                             eps: float, mu: Optional[float] = None) -> tuple:
    """The unique coexistence equilibrium of the smooth model.

    Solves the predator nullcline phi(y/eps) e_tilde w(y, mu) = m for y by
    bisection (the left side is increasing in y), reads x off the prey
    nullcline, then polishes by Newton.  Works on both sides of the
    collision threshold, including when the equilibrium sits inside the
    switching layer.
    """
    m = p.mu if mu is None else mu

    def g(y: float) -> float:
        return reg.eval(y / eps) * p.e_tilde * _gause_w(p, y, m) - p.m

    lo = -m + 1e-12
    hi = 1.0
    while g(hi) <= 0:
        hi *= 2
        if hi > 1e12:
            raise DetectionError("predator nullcline has no interior crossing")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    y = 0.5 * (lo + hi)
    x = p.r * (m + y) / (reg.eval(y / eps) * _gause_w(p, y, m))
    sol = dynamics.find_equilibrium(
        lambda a, b: gause_field(p, reg, a, b, eps, m),
        lambda a, b: gause_jacobian(p, reg, a, b, eps, m),
        (x, y),
    )
    if sol is None:
        raise DetectionError("equilibrium polish failed")
    return sol[0]


def gause_desing_transform(p: GauseParams, k: int, x1: float, nu1: float,
                           rho1: float, mu_hat: float) -> tuple:
    """Composite inflation centered on the model's own collision point."""
    x0 = p.e_tilde * p.r / (p.lam * (p.e_tilde - p.h * p.m))
    a = nu1 ** (2 * k * (1 + k))
    x = x0 + a * rho1 ** (k * (1 + k)) * (p.h * p.r * mu_hat * rho1 ** (k * k) + x1)
    y = a * rho1 ** (2 * k * (1 + k))
    eps = nu1 ** (2 * (1 + k) ** 2) * rho1 ** ((1 + k) * (1 + 2 * k))
    mu = gause_mu_bf(p) + mu_hat * a * rho1 ** (k * (1 + 2 * k))
    return x, y, eps, mu


def gause_hopf(p: GauseParams, reg: RegularizationFunction, eps: float,
               mu_hat_window: tuple = (-8.0, 8.0), n_scan: int = 65,
               mu_tol: float = 1e-12) -> float:
    """Oscillation onset mu_ah(eps) of the smooth model near mu_bf.

    Continues the interior equilibrium across mu = mu_bf + mu_hat *
    eps^(k/(k+1)) and bisects the eigenvalue real-part crossing, exactly
    like the local-model detector.
    """
    k = reg.k
    mu_bf = gause_mu_bf(p)
    scale = eps ** (k / (k + 1.0))

    def eig_real(mu: float) -> float:
        xe, ye = gause_equilibrium_smooth(p, reg, eps, mu)
        J = gause_jacobian(p, reg, xe, ye, eps, mu)
        lam = np.linalg.eigvals(np.asarray(J))[0]
        return float(lam.real) if abs(lam.imag) > 0 else math.nan

    mus = mu_bf + scale * np.linspace(mu_hat_window[0], mu_hat_window[1], n_scan)
    reals = [eig_real(float(mu)) for mu in mus]
    if all(math.isnan(r) for r in reals):
        raise DetectionError("eigenvalues real across the scan window")
    bracket = None
    for i in range(len(mus) - 1):
        a, b = reals[i], reals[i + 1]
        if not (math.isnan(a) or math.isnan(b)) and a * b < 0:
            bracket = i
            break
    if bracket is None:
        raise DetectionError("no eigenvalue real-part sign change near the collision")
    lo, hi = float(mus[bracket]), float(mus[bracket + 1])
    r_lo = reals[bracket]
    while hi - lo > mu_tol:
        mid = 0.5 * (lo + hi)
        rm = eig_real(mid)
        if math.isnan(rm):
            raise DetectionError("eigenvalues became real during bisection")
        if (rm > 0) == (r_lo > 0):
            lo, r_lo = mid, rm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gause_relaxation_cycle(p: GauseParams, reg: RegularizationFunction, eps: float,
                           mu: Optional[float] = None,
                           cfg: Optional[dynamics.IntegratorConfig] = None,
                           **cycle_kw) -> Optional[dynamics.LimitCycle]:
    """Stable relaxation cycle of the smooth model (below the threshold)."""
    m = p.mu if mu is None else mu
    base = cfg or dynamics.IntegratorConfig()
    cfg_eps = replace(base, layer_eps=eps, t_budget=max(base.t_budget, 2e3))
    sec = dynamics.Section(kind="horizontal", level=max(0.15, 12 * eps), direction="increasing")
    # transient from a point near the upper equilibrium, then anchor on the section
    x0, y0 = gause_equilibrium_upper(p, m)
    field = lambda a, b: gause_field(p, reg, a, b, eps, m)
    warm = dynamics.integrate(field, (x0 + 0.3, y0 + 0.3), (0.0, 60.0), cfg_eps, record=False)
    start = warm.points[-1]
    traj = dynamics.integrate(field, start, (0.0, cfg_eps.t_budget), cfg_eps,
                              events=[sec], stop_on=0, record=False)
    if traj.status != "event":
        return None
    hit = traj.events[-1]
    return dynamics.find_limit_cycle(field, sec, (hit.x, hit.y), cfg_eps, mu=m, eps=eps, **cycle_kw)


# ---------------------------------------------------------------------------
# Friction oscillator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StickSlipParams:
    """Cubic velocity-weakening friction law and belt speed.

    mu_plus(y) = mu_s - (3(mu_s-mu_m)/(2 v_m)) y + ((mu_s-mu_m)/(2 v_m^3)) y^3
    is positive with slope in (-2, 0) on [0, v_m); alpha is the belt speed.
    """

    mu_s: float = 1.0
    mu_m: float = 0.5
    v_m: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if not (self.mu_s > 0 and self.mu_m > 0 and self.v_m > 0):
            raise ConfigurationError("mu_s, mu_m, v_m must be positive")
        if not self.mu_m < self.mu_s:
            raise ConfigurationError("requires mu_m < mu_s (velocity weakening)")
        ys = np.linspace(0.0, self.v_m * (1.0 - 1e-9), 101)
        vals = [stickslip_mu_plus(self, float(y)) for y in ys]
        slopes = [stickslip_mu_plus_prime(self, float(y)) for y in ys]
        if min(vals) <= 0:
            raise ConfigurationError("friction law must stay positive on [0, v_m)")
        if not all(-2.0 < s < 0.0 for s in slopes):
            raise ConfigurationError("friction slope must stay in (-2, 0) on [0, v_m)")


def stickslip_mu_plus(p: StickSlipParams, y: float) -> float:
    c1 = 3.0 * (p.mu_s - p.mu_m) / (2.0 * p.v_m)
    c3 = (p.mu_s - p.mu_m) / (2.0 * p.v_m**3)
    return p.mu_s - c1 * y + c3 * y**3


def stickslip_mu_plus_prime(p: StickSlipParams, y: float) -> float:
    c1 = 3.0 * (p.mu_s - p.mu_m) / (2.0 * p.v_m)
    c3 = (p.mu_s - p.mu_m) / (2.0 * p.v_m**3)
    return -c1 + 3.0 * c3 * y**2


def _friction_char(p: StickSlipParams, y: float, phi: float) -> float:
    return stickslip_mu_plus(p, y) * phi - stickslip_mu_plus(p, -y) * (1.0 - phi)


def stickslip_field(p: StickSlipParams, reg: RegularizationFunction,
                    x: float, y: float, eps: float,
                    alpha: Optional[float] = None) -> tuple:
    """Smooth oscillator: x displacement, y velocity relative to rest.

    The friction characteristic blends the forward and backward branches
    through the switch; the switch must have odd symmetry (phi - 1/2 odd)
    or the force would depend on the travel direction.
    """
    if not reg.odd_symmetric:
        raise ConfigurationError("friction model requires an odd-symmetric switch (phi - 1/2 odd)")
    a = p.alpha if alpha is None else alpha
    phi = reg.eval(y / eps)
    return (y - a, -x - _friction_char(p, y, phi))


def stickslip_jacobian(p: StickSlipParams, reg: RegularizationFunction,
                       x: float, y: float, eps: float,
                       alpha: Optional[float] = None):
    phi = reg.eval(y / eps)
    dphi = reg.deriv(y / eps) / eps
    dchar = (
        stickslip_mu_plus_prime(p, y) * phi + stickslip_mu_plus(p, y) * dphi
        + stickslip_mu_plus_prime(p, -y) * (1.0 - phi) + stickslip_mu_plus(p, -y) * dphi
    )
    return ((0.0, 1.0), (-1.0, -dchar))


def stickslip_pws(p: StickSlipParams) -> filippov.PwsSystem:
    """Nonsmooth limit; the parameter slot of the system is alpha."""

    def upper(x, y, alpha):
        return (y - alpha, -x - stickslip_mu_plus(p, y))

    def upper_jac(x, y, alpha):
        return ((0.0, 1.0), (-1.0, -stickslip_mu_plus_prime(p, y)))

    def lower(x, y, alpha):
        return (y - alpha, -x + stickslip_mu_plus(p, -y))

    def lower_jac(x, y, alpha):
        return ((0.0, 1.0), (-1.0, -stickslip_mu_plus_prime(p, -y)))

    return filippov.PwsSystem(
        zplus=filippov.PlanarVectorField(upper, upper_jac, name="forward-slip"),
        zminus=filippov.PlanarVectorField(lower, lower_jac, name="backward-slip"),
        domain=((-3.0 * p.mu_s, 3.0 * p.mu_s), (-3.0, 3.0)),
    )


def stickslip_equilibrium(p: StickSlipParams, reg: RegularizationFunction,
                          eps: float, alpha: Optional[float] = None) -> tuple:
    """Closed-form equilibrium of the smooth oscillator: y = alpha."""
    a = p.alpha if alpha is None else alpha
    phi = reg.eval(a / eps)
    return (-_friction_char(p, a, phi), a)


def stickslip_alpha_ah(p: StickSlipParams, reg: RegularizationFunction, eps: float,
                       alpha_hat_window: tuple = (1e-3, 8.0), n_scan: int = 65,
                       alpha_tol: float = 1e-12) -> tuple:
    """Oscillation-onset belt speed: (leading-order analytic, numeric).

    analytic = (2 beta mu_s k / (-mu_plus'(0)))^(1/(1+k)) * eps^(k/(k+1));
    numeric bisects the eigenvalue real-part crossing of the closed-form
    equilibrium in alpha.
    """
    k = reg.k
    slope0 = stickslip_mu_plus_prime(p, 0.0)
    analytic = (2.0 * reg.beta * p.mu_s * k / (-slope0)) ** (1.0 / (1 + k)) * eps ** (k / (k + 1.0))

    def eig_real(a: float) -> float:
        xe, ye = stickslip_equilibrium(p, reg, eps, a)
        J = stickslip_jacobian(p, reg, xe, ye, eps, a)
        eigs = np.linalg.eigvals(np.asarray(J))
        lam = eigs[0]
        if abs(lam.imag) == 0:
            return math.nan
        return float(lam.real)

    scale = eps ** (k / (k + 1.0))
    alphas = scale * np.linspace(alpha_hat_window[0], alpha_hat_window[1], n_scan)
    reals = [eig_real(float(a)) for a in alphas]
    bracket = None
    for i in range(len(alphas) - 1):
        a, b = reals[i], reals[i + 1]
        if not (math.isnan(a) or math.isnan(b)) and a * b < 0:
            bracket = i
            break
    if bracket is None:
        raise DetectionError("no eigenvalue real-part crossing in the belt-speed window")
    lo, hi = float(alphas[bracket]), float(alphas[bracket + 1])
    r_lo = reals[bracket]
    while hi - lo > alpha_tol:
        mid = 0.5 * (lo + hi)
        rm = eig_real(mid)
        if math.isnan(rm):
            raise DetectionError("eigenvalues became real during bisection")
        if (rm > 0) == (r_lo > 0):
            lo, r_lo = mid, rm
        else:
            hi = mid
    return analytic, 0.5 * (lo + hi)


def stickslip_desing_field(p: StickSlipParams, k: int, beta: float,
                           x1: float, rho1: float, alpha_hat: float) -> tuple:
    """Planar unfolding system of the (degenerate) friction collision.

        x1'   = rho1^(k(1+2k)) (rho1^k - alpha_hat)
                - k x1 (x1 - 2 mu_s beta + mu_plus'(0) rho1^(k(1+k)))
        rho1' = -(rho1/k) (x1 - 2 mu_s beta + mu_plus'(0) rho1^(k(1+k)))
    """
    if rho1 < 0:
        raise ValueError("rho1 must be nonnegative")
    slope0 = stickslip_mu_plus_prime(p, 0.0)
    common = x1 - 2.0 * p.mu_s * beta + slope0 * rho1 ** (k * (1 + k))
    f1 = rho1 ** (k * (1 + 2 * k)) * (rho1**k - alpha_hat) - k * x1 * common
    f2 = -rho1 * common / k
    return f1, f2


def stickslip_relaxation_cycle(p: StickSlipParams, reg: RegularizationFunction, eps: float,
                               alpha: Optional[float] = None,
                               cfg: Optional[dynamics.IntegratorConfig] = None,
                               **cycle_kw) -> Optional[dynamics.LimitCycle]:
    """Stable stick-slip cycle at a given belt speed (either sign)."""
    a = p.alpha if alpha is None else alpha
    base = cfg or dynamics.IntegratorConfig()
    cfg_eps = replace(base, layer_eps=eps, t_budget=max(base.t_budget, 2e3))
    level = math.copysign(max(0.25, 15 * eps), a)
    sec = dynamics.Section(kind="horizontal", level=level,
                           direction="increasing" if a > 0 else "decreasing")
    field = lambda u, v: stickslip_field(p, reg, u, v, eps, a)
    x0 = -math.copysign(p.mu_s, a)
    warm = dynamics.integrate(field, (x0, 1.5 * level), (0.0, 40.0), cfg_eps, record=False)
    traj = dynamics.integrate(field, warm.points[-1], (0.0, cfg_eps.t_budget), cfg_eps,
                              events=[sec], stop_on=0, record=False)
    if traj.status != "event":
        return None
    hit = traj.events[-1]
    return dynamics.find_limit_cycle(field, sec, (hit.x, hit.y), cfg_eps, mu=a, eps=eps, **cycle_kw)


@dataclass
class CreepReport:
    """Outcome of the slow-drift study at belt speeds of order eps."""

    eps: float
    a: float
    alpha: float
    equilibrium: tuple
    starts: list
    residual_max: float      # post-transient distance to the manifold graph
    residual_bound: float    # 50 eps^2
    halving_time: float      # time for |x - x_eq| to halve, post-transient
    window: float
    y_at_equilibrium: float  # measured terminal y (should be ~ alpha)


def creep_study(p: StickSlipParams, reg: RegularizationFunction, eps: float, a: float,
                starts: Optional[Sequence] = None, window_scale: float = 1.2,
                transient_fraction: float = 0.2) -> CreepReport:
    """Drift along the slow manifold at belt speed alpha = eps * a.

    Trajectories started inside the ball of radius mu_s land on the
    manifold graph x = mu_s (1 - 2 phi(Y)) - eps mu_plus'(0) Y with
    Y = y/eps (the first-order truncation of the slow-manifold series;
    the order-eps coefficient is the friction slope at rest, which is what
    the fast-time expansion of the model produces) and drift toward the
    unique equilibrium on a timescale of order 1/eps.  The report carries
    the post-transient residual against that graph (expected O(eps^2)) and
    the measured halving time of the drift.  The first
    ``transient_fraction`` of the window is discarded: landing on the
    manifold is fast but not instantaneous.
    """
    alpha = eps * a
    x_eq, y_eq = stickslip_equilibrium(p, reg, eps, alpha)
    if starts is None:
        starts = [(0.5 * p.mu_s, 0.2 * p.mu_s), (-0.4 * p.mu_s, 0.3 * p.mu_s),
                  (0.2 * p.mu_s, -0.3 * p.mu_s)]
    T = window_scale / eps
    cfg = dynamics.IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, layer_eps=eps,
                                    t_budget=2 * T, max_steps=50_000_000)
    field = lambda u, v: stickslip_field(p, reg, u, v, eps, alpha)

    slope0 = stickslip_mu_plus_prime(p, 0.0)
    residual_max = 0.0
    halving = math.nan
    y_term = math.nan
    for idx, z0 in enumerate(starts):
        traj = dynamics.integrate(field, z0, (0.0, T), cfg)
        mask = traj.t >= transient_fraction * T
        tt = traj.t[mask]
        xx = traj.points[mask, 0]
        yy = traj.points[mask, 1]
        Y = yy / eps
        graph = np.array([p.mu_s * (1.0 - 2.0 * reg.eval(float(v))) for v in Y]) - eps * slope0 * Y
        residual_max = max(residual_max, float(np.max(np.abs(xx - graph))))
        if idx == 0:
            d = np.abs(xx - x_eq)
            d0 = float(d[0])
            below = np.nonzero(d <= 0.5 * d0)[0]
            halving = float(tt[below[0]] - tt[0]) if len(below) else math.nan
            y_term = float(yy[-1])
    return CreepReport(
        eps=eps, a=a, alpha=alpha, equilibrium=(x_eq, y_eq), starts=list(starts),
        residual_max=residual_max, residual_bound=50.0 * eps**2,
        halving_time=halving, window=T, y_at_equilibrium=y_term,
    )
