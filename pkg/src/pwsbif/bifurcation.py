"""Bifurcation curves of the collision unfolding, analytic and numeric.

The desingularized planar system has equilibria pinned to the line
x1 = -beta, with radial coordinate solving

    varphi(rho) = gamma*beta - mu_hat*rho^(k^2) + delta*rho^(k(1+k)) = 0.

Closed forms follow for the oscillation-onset curve, the fold-of-equilibria
curve, their codimension-two intersection, and the first Lyapunov
coefficient.  Each closed form is paired with an independent numerical
detector working directly on the planar system; the pair must agree to
1e-8 for the package to be considered healthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import blowup, dynamics, normalform
from .blowup import DesingParams
from .errors import DetectionError
from .regfun import RegularizationFunction

__all__ = [
    "hopf_curve_hat",
    "sn_curve_hat",
    "bt_point_hat",
    "lyapunov_l1",
    "equilibria_desing",
    "hopf_numeric",
    "sn_numeric",
    "homoclinic_locate",
    "eps_scale_curves",
    "hopf_full_numeric",
    "BifurcationDiagram",
    "build_diagram",
    "DesingEquilibrium",
]


def hopf_curve_hat(gamma: float, k: int, beta: float, tau: float, delta: float) -> float:
    """Oscillation-onset value mu_hat_ah(gamma) = ((k d + t g)/k)(k b/t)^(1/(k+1)).

    Defined for gamma < delta/tau; the bifurcating equilibrium is stable
    below the curve and unstable above it.
    """
    if not gamma < delta / tau:
        raise ValueError(f"onset curve requires gamma < delta/tau = {delta / tau:g}, got {gamma:g}")
    return (k * delta + tau * gamma) / k * (k * beta / tau) ** (1.0 / (k + 1))


def sn_curve_hat(gamma: float, k: int, beta: float, tau: float, delta: float) -> float:
    """Fold-of-equilibria value mu_hat_sn(gamma) = ((1+k)d/k)(k b g/d)^(1/(k+1)),
    defined for gamma > 0."""
    if not gamma > 0:
        raise ValueError(f"fold curve requires gamma > 0, got {gamma:g}")
    return (1 + k) * delta / k * (k * beta * gamma / delta) ** (1.0 / (k + 1))


def bt_point_hat(k: int, beta: float, tau: float, delta: float) -> tuple:
    """Codimension-two point (mu_hat_bt, gamma_bt) where the two curves meet."""
    mu_bt = (1 + k) * delta / k * (k * beta / tau) ** (1.0 / (1 + k))
    return (mu_bt, delta / tau)


def lyapunov_l1(gamma: float, k: int, beta: float, tau: float, delta: float) -> float:
    """First Lyapunov coefficient at the onset curve (negative: supercritical)."""
    if not gamma < delta / tau:
        raise ValueError(f"Lyapunov coefficient requires gamma < delta/tau, got {gamma:g}")
    return (
        -(beta * k**3 * (1 + k)) / (16.0 * (delta - gamma * tau))
        * (beta * k / tau) ** (-2.0 / (k * (1 + k)))
        * ((2 + k) * delta - gamma * tau)
    )


def eps_scale_curves(gamma: float, eps: float, k: int, beta: float, tau: float, delta: float) -> dict:
    """Leading-order bifurcation values at finite eps: hat value * eps^(k/(k+1))."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    scale = eps ** (k / (k + 1.0))
    mu_bt, gamma_bt = bt_point_hat(k, beta, tau, delta)
    return {
        "mu_ah": hopf_curve_hat(gamma, k, beta, tau, delta) * scale if gamma < gamma_bt else None,
        "mu_sn": sn_curve_hat(gamma, k, beta, tau, delta) * scale if gamma > 0 else None,
        "mu_bt": mu_bt * scale,
        "gamma_bt": gamma_bt,
    }


# ---------------------------------------------------------------------------
# Equilibria of the desingularized system
# ---------------------------------------------------------------------------

def _varphi(p: DesingParams, rho: float) -> float:
    return p.gamma * p.beta - p.mu_hat * rho ** (p.k * p.k) + p.delta * rho ** (p.k * (1 + p.k))


def _rho_scan_max(p: DesingParams) -> float:
    mu_pos = max(p.mu_hat, 0.0)
    m = p.k * (1 + p.k)
    return 10.0 * max(1.0, (mu_pos / p.delta) ** (1.0 / m) + (abs(p.gamma) * p.beta / p.delta) ** (1.0 / m))


def _varphi_roots(p: DesingParams, rho_tol: float = 1e-12) -> list:
    """Positive roots of varphi, using the interior minimum to split brackets."""
    brackets = [1e-12, _rho_scan_max(p)]
    if p.mu_hat > 0:
        # unique interior minimum of varphi on rho > 0
        rho_c = (p.k * p.mu_hat / (p.delta * (1 + p.k))) ** (1.0 / p.k)
        if brackets[0] < rho_c < brackets[1]:
            brackets.insert(1, rho_c)
    roots = []
    for lo, hi in zip(brackets, brackets[1:]):
        flo, fhi = _varphi(p, lo), _varphi(p, hi)
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi > 0:
            continue
        a, b, fa, fb = lo, hi, flo, fhi
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = _varphi(p, mid)
            # bracketed Newton: try the tangent step, keep it only inside
            d = -p.mu_hat * (p.k**2) * mid ** (p.k**2 - 1) + p.delta * p.k * (1 + p.k) * mid ** (p.k * (1 + p.k) - 1)
            if d != 0.0:
                nt = mid - fm / d
                if a < nt < b:
                    fnt = _varphi(p, nt)
                    mid, fm = nt, fnt
            if fm == 0.0 or (b - a) <= rho_tol:
                a = b = mid
                break
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b, fb = mid, fm
        roots.append(0.5 * (a + b))
    return sorted(roots)


@dataclass(frozen=True)
class DesingEquilibrium:
    x1: float
    rho1: float
    kind: str  # "focus/node" | "saddle" | "saddle-node-degenerate"
    trace: float
    det: float


def equilibria_desing(p: DesingParams, degenerate_tol: float = 1e-10) -> list:
    """All equilibria of the desingularized system with rho1 > 0.

    Every equilibrium sits on x1 = -beta; the radial coordinates are the
    positive roots of varphi.  Types come from the Jacobian: negative
    determinant is a saddle, positive a focus/node; a nearly double root
    is tagged saddle-node-degenerate.
    """
    out = []
    roots = _varphi_roots(p)
    for i, rho in enumerate(roots):
        J = blowup.desing_jacobian(p, -p.beta, rho)
        tr = J[0][0] + J[1][1]
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        near_double = any(abs(rho - other) < degenerate_tol for j, other in enumerate(roots) if j != i)
        if near_double or abs(det) < degenerate_tol:
            kind = "saddle-node-degenerate"
        elif det < 0:
            kind = "saddle"
        else:
            kind = "focus/node"
        out.append(DesingEquilibrium(x1=-p.beta, rho1=rho, kind=kind, trace=tr, det=det))
    return out


# ---------------------------------------------------------------------------
# Numerical detectors (independent of the closed forms)
# ---------------------------------------------------------------------------

def _continued_equilibrium(p: DesingParams) -> Optional[tuple]:
    """The focus/node equilibrium (largest root branch) by 2D Newton on the
    planar field, returning ((x1, rho1), trace, det) or None."""
    roots = _varphi_roots(p)
    if not roots:
        return None
    rho_seed = roots[-1]
    sol = dynamics.find_equilibrium(
        lambda a, b: blowup.desing_field(p, a, b),
        lambda a, b: blowup.desing_jacobian(p, a, b),
        (-p.beta, rho_seed),
    )
    if sol is None:
        return None
    (x1, rho1), _ = sol
    J = blowup.desing_jacobian(p, x1, rho1)
    tr = J[0][0] + J[1][1]
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    return (x1, rho1), tr, det


def hopf_numeric(k: int, beta: float, tau: float, delta: float, gamma: float,
                 mu_tol: float = 1e-10) -> float:
    """Locate the oscillation onset by bisecting the Jacobian trace.

    The focus/node equilibrium is continued in mu_hat by Newton on the
    planar system; the returned value is the trace sign change (checked to
    have positive determinant).  The search window respects where the
    branch exists: all of mu_hat for gamma < 0, mu_hat > 0 for gamma = 0,
    and above the fold value for gamma > 0.
    """
    if not gamma < delta / tau:
        raise ValueError("onset detection requires gamma < delta/tau")

    def trace_at(mu_hat: float) -> Optional[float]:
        res = _continued_equilibrium(DesingParams(k=k, beta=beta, tau=tau, delta=delta,
                                                  gamma=gamma, mu_hat=mu_hat))
        if res is None:
            return None
        (_, _), tr, det = res
        if det <= 0:
            return None
        return tr

    if gamma > 0:
        # the stable stretch above the fold shrinks quadratically toward the
        # codimension-2 point, so probe with a growing offset
        mu_sn, _ = sn_numeric(k, beta, tau, delta, gamma)
        offset = 1e-13 * max(1.0, abs(mu_sn))
        lo, t_lo = None, None
        while offset < 1.0:
            cand = mu_sn + offset
            t = trace_at(cand)
            if t is not None and t < 0:
                lo, t_lo = cand, t
                break
            offset *= 4.0
        if lo is None:
            raise DetectionError("no stable end of the equilibrium branch found")
    else:
        lo = 1e-9 if gamma == 0 else -1.0
        t_lo = trace_at(lo)
        for _ in range(80):
            if t_lo is not None and t_lo < 0:
                break
            if gamma < 0:
                lo *= 2
            else:
                raise DetectionError("no stable end of the equilibrium branch found")
            t_lo = trace_at(lo)
        else:
            raise DetectionError("no stable end of the equilibrium branch found")
    hi = max(1.0, 2 * abs(lo))
    t_hi = trace_at(hi)
    for _ in range(80):
        if t_hi is not None and t_hi > 0:
            break
        hi *= 2
        t_hi = trace_at(hi)
    else:
        raise DetectionError("no unstable end of the equilibrium branch found")

    while hi - lo > mu_tol:
        mid = 0.5 * (lo + hi)
        tm = trace_at(mid)
        if tm is None:
            raise DetectionError(f"equilibrium branch lost at mu_hat = {mid:g}")
        if tm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sn_numeric(k: int, beta: float, tau: float, delta: float, gamma: float) -> tuple:
    """Solve the simultaneous equilibrium and zero-determinant conditions.

    2D Newton in (rho, mu_hat) on

        varphi(rho)                                   = 0
        (1+k) b g - (1+2k) mh rho^(k^2) + 2(1+k) d rho^(k(1+k)) = 0

    seeded at rho = (k b g / d)^(1/(k(1+k))).  Returns (mu_hat_sn, rho_sn).
    """
    if not gamma > 0:
        raise ValueError("fold detection requires gamma > 0")
    k2 = k * k
    m = k * (1 + k)

    def F(rho, mh):
        f1 = gamma * beta - mh * rho**k2 + delta * rho**m
        f2 = (1 + k) * beta * gamma - (1 + 2 * k) * mh * rho**k2 + 2 * (1 + k) * delta * rho**m
        return f1, f2

    rho = (k * beta * gamma / delta) ** (1.0 / m)
    mh = (gamma * beta + delta * rho**m) / rho**k2
    for _ in range(100):
        f1, f2 = F(rho, mh)
        if math.hypot(f1, f2) <= 1e-14:
            break
        j11 = -mh * k2 * rho ** (k2 - 1) + delta * m * rho ** (m - 1)
        j12 = -(rho**k2)
        j21 = -(1 + 2 * k) * mh * k2 * rho ** (k2 - 1) + 2 * (1 + k) * delta * m * rho ** (m - 1)
        j22 = -(1 + 2 * k) * rho**k2
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            raise DetectionError("singular Newton system in the fold solve")
        rho -= (f1 * j22 - f2 * j12) / det
        mh -= (f2 * j11 - f1 * j21) / det
    f1, f2 = F(rho, mh)
    if math.hypot(f1, f2) > 1e-10:
        raise DetectionError(f"fold solve did not converge: residuals ({f1:.2e}, {f2:.2e})")
    return mh, rho


def desing_probe_field(p: DesingParams):
    """Integration-safe wrapper of the unfolding field.

    The half-plane rho1 >= 0 is invariant for the exact flow, but a long
    explicit step can overshoot the boundary by roundoff; evaluating at
    the clamped radius keeps such excursions inert.
    """
    def f(x1: float, rho1: float) -> tuple:
        return blowup.desing_field(p, x1, max(rho1, 0.0))
    return f


def homoclinic_locate(k: int, beta: float, tau: float, delta: float, gamma: float,
                      t_max: float = 1e3, bisections: int = 30) -> Optional[float]:
    """Best-effort saddle-connection estimate from cycle-period blow-up.

    The stable cycle born at the onset curve exists for mu_hat above the
    onset value; its period diverges where the cycle collides with the
    saddle.  The existence boundary is bisected in mu_hat, seeding each
    detection at the previous anchor, and reported as the estimate when
    the period shows clear growth along the way (the divergence is
    logarithmic, so the period itself stays far below ``t_max`` at any
    resolvable distance from the connection).  Returns None outside
    0 < gamma < delta/tau or when the cycle family terminates without
    period growth.
    """
    if not (0 < gamma < delta / tau):
        return None
    mu_ah = hopf_numeric(k, beta, tau, delta, gamma)
    mu_sn, _ = sn_numeric(k, beta, tau, delta, gamma)
    wedge = mu_ah - mu_sn  # the cycle window above onset scales with this gap

    cfg = dynamics.IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11, t_budget=min(t_max, 1e3))

    def cycle_at(mu_hat: float, guess_rho: Optional[float]):
        p = DesingParams(k=k, beta=beta, tau=tau, delta=delta, gamma=gamma, mu_hat=mu_hat)
        res = _continued_equilibrium(p)
        if res is None:
            return None
        (_, rho_eq), _, _ = res
        sec = dynamics.Section(kind="vertical", level=-beta, direction="both",
                               window=(rho_eq, math.inf))
        # near the codimension-2 point the basin is a thin pocket bounded by
        # the saddle loop: escape from just inside the cycle is the reliable
        # route, so try inside-first seeds with a generous iteration budget
        seeds = []
        if guess_rho is not None:
            seeds.append(guess_rho)
        seeds.extend([rho_eq * 1.005 + 1e-6, rho_eq * 1.02, rho_eq * 1.25])
        for seed in seeds:
            cyc = dynamics.find_limit_cycle(desing_probe_field(p), sec,
                                            sec.point(max(seed, rho_eq * 1.003 + 1e-7)),
                                            cfg, max_iter=400)
            if cyc is not None:
                return cyc
        return None

    # establish an existing cycle above onset (the connection sits around one
    # onset-to-fold gap higher, and contraction degenerates right at onset,
    # so probe at a healthy fraction of the gap), then expand to a bracket
    step0 = 0.35 * wedge
    first = None
    for _ in range(8):
        lo = mu_ah + step0
        first = cycle_at(lo, None)
        if first is not None:
            break
        step0 *= 0.5
    if first is None:
        return None
    period0 = first.period
    anchor_rho = first.section.along(*first.anchor)
    max_period = period0

    hi = None
    step = step0
    mu = lo
    for _ in range(60):
        step *= 2.0
        cyc = cycle_at(mu + step, anchor_rho)
        if cyc is None or cyc.period > t_max:
            hi = mu + step
            break
        mu = mu + step
        anchor_rho = cyc.section.along(*cyc.anchor)
        max_period = max(max_period, cyc.period)
    if hi is None:
        return None
    lo = mu

    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        cyc = cycle_at(mid, anchor_rho)
        if cyc is None or cyc.period > t_max:
            hi = mid
        else:
            lo = mid
            anchor_rho = cyc.section.along(*cyc.anchor)
            max_period = max(max_period, cyc.period)
    if max_period < 1.8 * period0:
        return None  # family ended without period growth; not a saddle connection
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Full-system onset detection
# ---------------------------------------------------------------------------

def _layer_equilibrium_seed(p: normalform.NormalFormParams, reg: RegularizationFunction,
                            mu: float, eps: float) -> tuple:
    """Seed for the smooth equilibrium from the desingularized prediction."""
    k, beta = reg.k, reg.beta
    mu_hat = mu / eps ** (k / (k + 1.0))
    dp = DesingParams(k=k, beta=beta, tau=p.tau, delta=p.delta, gamma=p.gamma, mu_hat=mu_hat)
    roots = _varphi_roots(dp)
    if roots:
        rho1 = roots[-1]
        nu1 = (eps / rho1 ** ((1 + k) * (1 + 2 * k))) ** (1.0 / (2 * (1 + k) ** 2))
        x, y, _, _ = blowup.composite_forward(k, -beta, nu1, rho1, mu_hat)
        return (x, y)
    return (0.0, mu / p.delta)


def hopf_full_numeric(p: normalform.NormalFormParams, reg: RegularizationFunction, eps: float,
                      mu_hat_window: tuple = (-6.0, 8.0), n_scan: int = 57,
                      mu_tol: float = 1e-12) -> float:
    """Oscillation onset of the full smooth local model at finite eps.

    The equilibrium is continued in mu across the predicted scaling window
    mu = mu_hat * eps^(k/(k+1)); the real part of its complex eigenvalue
    pair is bisected to |dmu| <= 1e-12.  Raises DetectionError when the
    eigenvalues are real across the whole window or no sign change exists.
    """
    k = reg.k
    scale = eps ** (k / (k + 1.0))

    def eig_real(mu: float, guess: tuple) -> tuple:
        sol = dynamics.find_equilibrium(
            lambda a, b: normalform.smooth_field(p, reg, a, b, mu, eps),
            lambda a, b: normalform.smooth_jacobian(p, reg, a, b, mu, eps),
            guess,
        )
        if sol is None:
            raise DetectionError(f"equilibrium continuation failed at mu = {mu:g}")
        (x, y), eigs = sol
        return eigs[0], (x, y)

    mus = np.linspace(mu_hat_window[0] * scale, mu_hat_window[1] * scale, n_scan)
    guess = _layer_equilibrium_seed(p, reg, float(mus[0]), eps)
    reals = []
    complex_seen = False
    guesses = []
    for mu in mus:
        lam, guess = eig_real(float(mu), guess)
        guesses.append(guess)
        if abs(lam.imag) > 0:
            complex_seen = True
            reals.append(lam.real)
        else:
            reals.append(math.nan)
    if not complex_seen:
        raise DetectionError("eigenvalues real across the scan window")

    bracket = None
    for i in range(len(mus) - 1):
        a, b = reals[i], reals[i + 1]
        if not (math.isnan(a) or math.isnan(b)) and a < 0 <= b:
            bracket = i
            break
    if bracket is None:
        for i in range(len(mus) - 1):
            a, b = reals[i], reals[i + 1]
            if not (math.isnan(a) or math.isnan(b)) and a * b < 0:
                bracket = i
                break
    if bracket is None:
        raise DetectionError("no eigenvalue real-part sign change in the scan window")

    lo, hi = float(mus[bracket]), float(mus[bracket + 1])
    r_lo = reals[bracket]
    guess = guesses[bracket]
    while hi - lo > mu_tol:
        mid = 0.5 * (lo + hi)
        lam, guess = eig_real(mid, guess)
        if math.isnan(lam.real):
            raise DetectionError("eigenvalues became real during bisection")
        if (lam.real > 0) == (r_lo > 0):
            lo, r_lo = mid, lam.real
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Diagram assembly
# ---------------------------------------------------------------------------

@dataclass
class BifurcationDiagram:
    """Sampled curves of the collision unfolding in (gamma, mu_hat) space."""

    gamma_grid: list
    ah_curve: list     # (gamma, mu_hat)
    sn_curve: list     # (gamma, mu_hat), gamma > 0 only
    bt_point: tuple    # (mu_hat, gamma)
    hom_samples: list  # (gamma, mu_hat), best effort
    k: int
    beta: float
    tau: float
    delta: float


def build_diagram(k: int, beta: float, tau: float, delta: float,
                  gamma_grid: Sequence[float], with_homoclinic: bool = False) -> BifurcationDiagram:
    gammas = [float(g) for g in gamma_grid]
    gamma_bt = delta / tau
    ah = [(g, hopf_curve_hat(g, k, beta, tau, delta)) for g in gammas if g < gamma_bt]
    sn = [(g, sn_curve_hat(g, k, beta, tau, delta)) for g in gammas if 0 < g]
    hom = []
    if with_homoclinic:
        for g in gammas:
            if 0 < g < gamma_bt:
                est = homoclinic_locate(k, beta, tau, delta, g)
                if est is not None:
                    hom.append((g, est))
    return BifurcationDiagram(
        gamma_grid=gammas, ah_curve=ah, sn_curve=sn,
        bt_point=bt_point_hat(k, beta, tau, delta), hom_samples=hom,
        k=k, beta=beta, tau=tau, delta=delta,
    )
