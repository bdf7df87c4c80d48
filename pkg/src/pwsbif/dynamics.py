"""Adaptive planar ODE integration, return maps and limit-cycle machinery.

The integrator is a hand-rolled Dormand-Prince 5(4) embedded pair with PI
step control and a quartic dense-output interpolant.  Events (horizontal or
vertical section crossings) are localized by bisection on the dense output.
Everything here works on plain Python floats in the inner loop; fields are
callables ``f(x, y) -> (fx, fy)``.

No implicit solver is provided: stiffness inside the switching layer is
handled by an epsilon-proportional step cap, which keeps the explicit pair
stable for the epsilon range this package targets (>= 3e-5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BudgetError, DetectionError, StiffnessError

__all__ = [
    "IntegratorConfig",
    "Section",
    "EventHit",
    "Trajectory",
    "LimitCycle",
    "CycleBranch",
    "integrate",
    "find_equilibrium",
    "poincare_return",
    "find_limit_cycle",
    "hausdorff",
    "resample_polyline",
    "relax_convergence_study",
    "continue_cycle_in_mu",
    "continue_equilibrium_in_mu",
]

Field2 = Callable[[float, float], tuple]


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets for :func:`integrate`.

    ``layer_eps`` activates the stiffness guard: while |y| <= 10*layer_eps
    the step size is capped at layer_eps.  Set it to the regularization
    epsilon when integrating smooth switch-like fields.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf
    t_budget: float = 1e3
    event_tol: float = 1e-12
    layer_eps: Optional[float] = None
    max_steps: int = 20_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_step <= 0 or self.t_budget <= 0:
            raise ValueError("tolerances, max_step and t_budget must be positive")
        if self.event_tol <= 0:
            raise ValueError("event_tol must be positive")


@dataclass(frozen=True)
class Section:
    """A one-sided transversal section: a horizontal line y = level or a
    vertical line x = level, with a crossing direction and a window on the
    in-section coordinate restricting valid hits."""

    kind: str  # "horizontal" | "vertical"
    level: float
    direction: str = "both"  # "increasing" | "decreasing" | "both"
    window: tuple = (-math.inf, math.inf)

    def __post_init__(self):
        if self.kind not in ("horizontal", "vertical"):
            raise ValueError(f"unknown section kind {self.kind!r}")
        if self.direction not in ("increasing", "decreasing", "both"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if not self.window[0] < self.window[1]:
            raise ValueError("section window is empty")

    def g(self, x: float, y: float) -> float:
        """Signed distance to the section line."""
        return (y - self.level) if self.kind == "horizontal" else (x - self.level)

    def along(self, x: float, y: float) -> float:
        """In-section coordinate (the one not fixed by the section)."""
        return x if self.kind == "horizontal" else y

    def point(self, along: float) -> tuple:
        """Embed an in-section coordinate as a plane point."""
        if self.kind == "horizontal":
            return (along, self.level)
        return (self.level, along)


@dataclass(frozen=True)
class EventHit:
    t: float
    x: float
    y: float
    section_index: int


@dataclass
class Trajectory:
    t: np.ndarray
    points: np.ndarray  # shape (N, 2)
    events: list
    status: str = "completed"  # "completed" | "event"
    n_accepted: int = 0
    n_rejected: int = 0


# Dormand-Prince 5(4) tableau.  The fifth-order solution is propagated
# (local extrapolation); the embedded fourth-order result drives the error
# estimate.  Last row is FSAL.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

# Dense-output polynomial (Shampine's quartic interpolant for DP54):
# z(t0 + th*h) = z0 + h*th * sum_i k_i * (Q[i][0] + th*(Q[i][1] + th*(Q[i][2] + th*Q[i][3])))
_Q = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)


def _initial_step(f: Field2, x0: float, y0: float, direction: float,
                  rel_tol: float, abs_tol: float, max_step: float) -> float:
    f0x, f0y = f(x0, y0)
    scale_x = abs_tol + rel_tol * abs(x0)
    scale_y = abs_tol + rel_tol * abs(y0)
    d0 = math.hypot(x0 / scale_x, y0 / scale_y)
    d1 = math.hypot(f0x / scale_x, f0y / scale_y)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    x1 = x0 + direction * h0 * f0x
    y1 = y0 + direction * h0 * f0y
    f1x, f1y = f(x1, y1)
    d2 = math.hypot((f1x - f0x) / scale_x, (f1y - f0y) / scale_y) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1, max_step)


def _dense(z0x, z0y, h, ks, th):
    """Evaluate the dense-output interpolant at fraction th of the step."""
    bx = 0.0
    by = 0.0
    for i in range(7):
        q = _Q[i]
        w = q[0] + th * (q[1] + th * (q[2] + th * q[3]))
        bx += ks[i][0] * w
        by += ks[i][1] * w
    return z0x + h * th * bx, z0y + h * th * by


def integrate(
    f: Field2,
    z0: Sequence[float],
    t_span: tuple,
    cfg: IntegratorConfig = IntegratorConfig(),
    events: Sequence[Section] = (),
    stop_on: Optional[int] = None,
    record: bool = True,
    t_skip_events: float = 0.0,
) -> Trajectory:
    """Integrate a planar field over ``t_span`` with event detection.

    Events are localized by bisection on the dense output until the section
    residual is below ``cfg.event_tol``.  When ``stop_on`` names an event
    index the trajectory is truncated at the first qualifying hit of that
    section and the status is set to ``"event"``.

    Raises
    ------
    BudgetError
        when integration time exceeds ``cfg.t_budget`` (or the step count
        exceeds ``cfg.max_steps``); the partial trajectory is attached.
    StiffnessError
        on step-size underflow below 1e-16.
    """
    t0, tf = float(t_span[0]), float(t_span[1])
    if tf <= t0:
        raise ValueError("t_span must be increasing")
    budget_end = t0 + cfg.t_budget

    x, y = float(z0[0]), float(z0[1])
    t = t0
    ts = [t]
    xs = [x]
    ys = [y]
    hits: list = []

    rel, ab = cfg.rel_tol, cfg.abs_tol
    h = _initial_step(f, x, y, 1.0, rel, ab, cfg.max_step)
    k1x, k1y = f(x, y)
    err_prev = 1.0
    n_acc = 0
    n_rej = 0

    def _make_traj(status):
        return Trajectory(
            t=np.asarray(ts), points=np.column_stack([np.asarray(xs), np.asarray(ys)]),
            events=hits, status=status, n_accepted=n_acc, n_rejected=n_rej,
        )

    g_prev = [sec.g(x, y) for sec in events]

    while t < tf:
        if t > budget_end:
            raise BudgetError(f"time budget {cfg.t_budget:g} exhausted at t = {t:g}", partial=_make_traj("budget"))
        if n_acc + n_rej > cfg.max_steps:
            raise BudgetError(f"step budget {cfg.max_steps} exhausted at t = {t:g}", partial=_make_traj("budget"))

        h = min(h, cfg.max_step, tf - t)
        if cfg.layer_eps is not None and abs(y) <= 10.0 * cfg.layer_eps:
            h = min(h, cfg.layer_eps)
        if h < 1e-16:
            raise StiffnessError(f"step size underflow at t = {t:g}", partial=_make_traj("stiff"))

        x2 = x + h * (_A21 * k1x)
        y2 = y + h * (_A21 * k1y)
        k2x, k2y = f(x2, y2)
        x3 = x + h * (_A31 * k1x + _A32 * k2x)
        y3 = y + h * (_A31 * k1y + _A32 * k2y)
        k3x, k3y = f(x3, y3)
        x4 = x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x)
        y4 = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        k4x, k4y = f(x4, y4)
        x5 = x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x)
        y5 = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        k5x, k5y = f(x5, y5)
        x6 = x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
        y6 = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
        k6x, k6y = f(x6, y6)
        xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = f(xn, yn)

        ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        sx = ab + rel * max(abs(x), abs(xn))
        sy = ab + rel * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))

        if err > 1.0:
            n_rej += 1
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        # accepted
        n_acc += 1
        t_new = t + h
        ks = ((k1x, k1y), (k2x, k2y), (k3x, k3y), (k4x, k4y), (k5x, k5y), (k6x, k6y), (k7x, k7y))

        stop_now = None
        if events and t_new > t_skip_events:
            for idx, sec in enumerate(events):
                g0 = g_prev[idx]
                g1 = sec.g(xn, yn)
                if g0 * g1 < 0.0:
                    lo, hi = 0.0, 1.0
                    glo = g0
                    for _ in range(80):
                        mid = 0.5 * (lo + hi)
                        gx, gy = _dense(x, y, h, ks, mid)
                        gm = sec.g(gx, gy)
                        if abs(gm) <= cfg.event_tol:
                            lo = hi = mid
                            break
                        if (gm > 0) == (glo > 0):
                            lo, glo = mid, gm
                        else:
                            hi = mid
                    th = 0.5 * (lo + hi)
                    hx, hy = _dense(x, y, h, ks, th)
                    t_hit = t + th * h
                    if t_hit <= t_skip_events:
                        continue
                    rising = g1 > g0
                    if sec.direction == "increasing" and not rising:
                        continue
                    if sec.direction == "decreasing" and rising:
                        continue
                    coord = sec.along(hx, hy)
                    if not (sec.window[0] <= coord <= sec.window[1]):
                        continue
                    hits.append(EventHit(t=t_hit, x=hx, y=hy, section_index=idx))
                    if stop_on is not None and idx == stop_on:
                        stop_now = hits[-1]
                        break

        if stop_now is not None:
            if record:
                ts.append(stop_now.t)
                xs.append(stop_now.x)
                ys.append(stop_now.y)
            return _make_traj("event")

        t, x, y = t_new, xn, yn
        k1x, k1y = k7x, k7y  # FSAL
        for idx, sec in enumerate(events):
            g_prev[idx] = sec.g(x, y)
        if record:
            ts.append(t)
            xs.append(x)
            ys.append(y)
        else:
            ts[-1] = t
            xs[-1] = x
            ys[-1] = y

        fac = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0 else 5.0
        h *= min(5.0, max(0.2, fac))
        err_prev = max(err, 1e-10)

    return _make_traj("completed")


# ---------------------------------------------------------------------------
# Newton solver for equilibria
# ---------------------------------------------------------------------------

def fd_jacobian(f: Field2, x: float, y: float, scale: float = 1.0):
    """Central finite-difference Jacobian of a planar field."""
    hx = 1e-7 * max(abs(x), scale)
    hy = 1e-7 * max(abs(y), scale)
    fpx = f(x + hx, y)
    fmx = f(x - hx, y)
    fpy = f(x, y + hy)
    fmy = f(x, y - hy)
    return (
        ((fpx[0] - fmx[0]) / (2 * hx), (fpy[0] - fmy[0]) / (2 * hy)),
        ((fpx[1] - fmx[1]) / (2 * hx), (fpy[1] - fmy[1]) / (2 * hy)),
    )


def find_equilibrium(
    f: Field2,
    jacobian,
    guess: Sequence[float],
    *,
    tol: float = 1e-12,
    max_iter: int = 50,
):
    """Damped Newton iteration for a planar equilibrium.

    Returns ``((x, y), (lambda1, lambda2))`` with the Jacobian eigenvalues,
    or None on failure.  ``jacobian`` may be None, in which case a
    finite-difference Jacobian is used.  The residual target is ``tol``
    in absolute terms, relaxed by the local Jacobian scale once the Newton
    step stagnates at machine precision: steep fields bottom out at
    |J| * eps * |z| no matter how exact the root.
    """
    jac = jacobian if jacobian is not None else (lambda a, b: fd_jacobian(f, a, b))
    x, y = float(guess[0]), float(guess[1])
    fx, fy = f(x, y)
    res = math.hypot(fx, fy)

    def accept():
        J = np.asarray(jac(x, y), dtype=float)
        eigs = np.linalg.eigvals(J)
        return (x, y), (complex(eigs[0]), complex(eigs[1]))

    for _ in range(max_iter):
        if res <= tol:
            return accept()
        J = jac(x, y)
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        if det == 0.0 or not math.isfinite(det):
            return None
        dx = (-fx * J[1][1] + fy * J[0][1]) / det
        dy = (-fy * J[0][0] + fx * J[1][0]) / det
        if math.hypot(dx, dy) <= 4e-16 * (1.0 + math.hypot(x, y)):
            jscale = max(abs(J[0][0]), abs(J[0][1]), abs(J[1][0]), abs(J[1][1]), 1.0)
            if res <= tol * jscale * (1.0 + math.hypot(x, y)):
                return accept()
            return None
        lam = 1.0
        for _ in range(10):
            xt, yt = x + lam * dx, y + lam * dy
            ft = f(xt, yt)
            rt = math.hypot(ft[0], ft[1])
            if rt < res or rt <= tol:
                x, y, fx, fy, res = xt, yt, ft[0], ft[1], rt
                break
            lam *= 0.5
        else:
            return None
    if res <= tol:
        return accept()
    return None


# ---------------------------------------------------------------------------
# Return maps and cycles
# ---------------------------------------------------------------------------

def poincare_return(
    f: Field2,
    sec: Section,
    z0: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
    *,
    record: bool = False,
):
    """First return of the orbit through ``z0`` to the section.

    ``z0`` must lie on the section; the departure itself is not counted.
    Returns ``((x, y), flight_time)`` or ``((x, y), flight_time, Trajectory)``
    when ``record`` is set.  Raises BudgetError when there is no return
    within the time budget.
    """
    x0, y0 = float(z0[0]), float(z0[1])
    if abs(sec.g(x0, y0)) > 1e-9:
        raise ValueError("start point is not on the section")
    traj = integrate(
        f, (x0, y0), (0.0, cfg.t_budget), cfg,
        events=[sec], stop_on=0, record=record, t_skip_events=1e-9,
    )
    if traj.status != "event":
        raise BudgetError("no return to the section within the time budget", partial=traj)
    hit = traj.events[-1]
    if record:
        return (hit.x, hit.y), hit.t, traj
    return (hit.x, hit.y), hit.t


@dataclass
class LimitCycle:
    """A closed orbit sampled as a polyline, with its section anchor."""

    points: np.ndarray
    period: float
    mu: float
    eps: float
    floquet: float
    anchor: tuple
    section: Section
    closure_residual: float = 0.0

    @property
    def amplitude(self) -> float:
        """Half the spread of the cycle in the y coordinate."""
        ymax = float(self.points[:, 1].max())
        ymin = float(self.points[:, 1].min())
        return 0.5 * (ymax - ymin)

    @property
    def diameter(self) -> float:
        dx = self.points[:, 0].max() - self.points[:, 0].min()
        dy = self.points[:, 1].max() - self.points[:, 1].min()
        return float(math.hypot(dx, dy))


def find_limit_cycle(
    f: Field2,
    sec: Section,
    guess: Sequence[float],
    cfg: IntegratorConfig = IntegratorConfig(),
    *,
    mu: float = math.nan,
    eps: float = math.nan,
    fp_tol: float = 1e-10,
    max_iter: int = 100,
    floquet_step: float = 1e-6,
    capture_max_step: Optional[float] = None,
) -> Optional[LimitCycle]:
    """Locate a stable limit cycle as a fixed point of the return map.

    Plain fixed-point iteration of the section return map, accelerated
    with ratio-extrapolated steps (capped at ten plain steps) once the
    residual contracts slowly but steadily.  Acceleration is based on the
    observed contraction only: near a supercritical onset the residual
    bulges between the repelling equilibrium and the cycle, and a
    secant through that bulge would jump out of the basin.  Returns None
    when the iteration diverges, the return map is undefined, the fixed
    point is a degenerate (zero-diameter) orbit, or ``max_iter`` runs out.
    """
    u = sec.along(float(guess[0]), float(guess[1]))

    def ret(v: float) -> float:
        pt, _ = poincare_return(f, sec, sec.point(v), cfg)
        return sec.along(pt[0], pt[1])

    try:
        g_prev = ret(u) - u
    except (BudgetError, StiffnessError):
        return None
    u = u + g_prev
    delta_prev = abs(g_prev)
    converged = abs(g_prev) <= fp_tol
    ratio_prev = math.nan
    contractions = 0
    if not converged:
        for _ in range(max_iter):
            try:
                g = ret(u) - u
            except (BudgetError, StiffnessError):
                return None
            if abs(g) <= fp_tol:
                converged = True
                break
            ratio = abs(g) / delta_prev if delta_prev > 0 else 0.0
            contractions = contractions + 1 if ratio < 1.0 else 0
            amp = 1.0
            if (contractions >= 2 and 0.5 < ratio < 1.0
                    and math.isfinite(ratio_prev) and abs(ratio - ratio_prev) < 0.2 * ratio):
                amp = min(1.0 / (1.0 - ratio), 10.0)
            u_next = u + amp * g
            if not math.isfinite(u_next):
                return None
            delta_prev = abs(g)
            ratio_prev = ratio
            u = u_next
        if not converged:
            return None

    anchor = sec.point(u)
    try:
        pt, period = poincare_return(f, sec, anchor, cfg)
    except (BudgetError, StiffnessError):
        return None
    residual = abs(sec.along(pt[0], pt[1]) - u)

    h = floquet_step * max(1.0, abs(u))
    try:
        up = ret(u + h)
        um = ret(u - h)
        floq = abs((up - um) / (2 * h))
    except (BudgetError, StiffnessError):
        return None

    cap = capture_max_step if capture_max_step is not None else min(cfg.max_step, max(period / 2000.0, 1e-4), 5e-3)
    cfg_cap = replace(cfg, max_step=cap)
    _, _, traj = poincare_return(f, sec, anchor, cfg_cap, record=True)
    pts = traj.points.copy()
    pts[-1] = pts[0]  # snap closed; the gap is reported as closure_residual
    diam = math.hypot(pts[:, 0].max() - pts[:, 0].min(), pts[:, 1].max() - pts[:, 1].min())
    if diam < max(100 * fp_tol, 1e-7):
        return None  # converged onto an equilibrium, not a closed orbit
    return LimitCycle(
        points=pts, period=period, mu=mu, eps=eps, floquet=floq,
        anchor=anchor, section=sec, closure_residual=residual,
    )


# ---------------------------------------------------------------------------
# Polyline geometry
# ---------------------------------------------------------------------------

def resample_polyline(points: np.ndarray, max_spacing: float = 1e-3) -> np.ndarray:
    """Resample a polyline at uniform arc length <= max_spacing."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return pts.copy()
    seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    total = arc[-1]
    if total == 0.0:
        return pts[:1].copy()
    n = max(2, int(math.ceil(total / max_spacing)) + 1)
    stations = np.linspace(0.0, total, n)
    return np.column_stack([np.interp(stations, arc, pts[:, 0]), np.interp(stations, arc, pts[:, 1])])


def _points_to_segments(ax, ay, b: np.ndarray, chunk: int = 1024, block: int = 4096) -> np.ndarray:
    """Distance of each point (ax_i, ay_i) to the polyline b (point-to-segment).

    Works in whatever float dtype the inputs carry.
    """
    bx0 = np.ascontiguousarray(b[:-1, 0])
    by0 = np.ascontiguousarray(b[:-1, 1])
    ux, uy = np.diff(b[:, 0]), np.diff(b[:, 1])
    L2 = ux * ux + uy * uy
    np.maximum(L2, np.finfo(b.dtype).tiny, out=L2)
    out = np.empty(len(ax), dtype=b.dtype)
    for i in range(0, len(ax), chunk):
        axc = ax[i:i + chunk][:, None]
        ayc = ay[i:i + chunk][:, None]
        best = None
        for j in range(0, len(bx0), block):
            px = axc - bx0[None, j:j + block]
            py = ayc - by0[None, j:j + block]
            t = px * ux[None, j:j + block]
            t += py * uy[None, j:j + block]
            t /= L2[None, j:j + block]
            np.clip(t, 0.0, 1.0, out=t)
            px -= t * ux[None, j:j + block]
            py -= t * uy[None, j:j + block]
            px *= px
            py *= py
            px += py
            m = px.min(axis=1)
            best = m if best is None else np.minimum(best, m, out=best)
        out[i:i + chunk] = best
    return np.sqrt(out, out=out)


def _directed_hausdorff(a: np.ndarray, b: np.ndarray, spacing: float) -> float:
    """max over points of a of the distance to the polyline b (exact, float64).

    The exact double-precision pass runs only on points that could still
    attain the maximum.  Two sound per-point upper bounds drive the
    pruning: the distance to the index-aligned vertex of b (tight when the
    curves track each other, exact), and a full single-precision pass plus
    a conservative float32 error margin.  Candidates are raced best-first,
    so typically only a small band near the maximum is ever refined.
    """
    n, m = len(a), len(b)
    # exact vertex upper bounds along index-aligned traversals; both curves
    # are arclength-uniform, so a cyclic shift matches tracking curves well
    base = (np.arange(n) * (m - 1)) // max(n - 1, 1)
    j0 = int(np.argmin(np.hypot(b[:, 0] - a[0, 0], b[:, 1] - a[0, 1])))
    ub = None
    for direction in (1, -1):
        j = (j0 + direction * base) % max(m - 1, 1)
        u = np.hypot(a[:, 0] - b[j, 0], a[:, 1] - b[j, 1])
        ub = u if ub is None else np.minimum(ub, u)
    if float(ub.max()) == 0.0:
        return 0.0

    # decimated-polyline upper bound: dropping all but every D-th vertex
    # moves the polyline by at most D*spacing/2
    D = 10
    if m > 4 * D:
        a32 = a.astype(np.float32)
        b32 = np.ascontiguousarray(b[::D].astype(np.float32))
        scale = float(max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0))
        margin = 0.5 * D * spacing + 1e-5 * scale
        d_coarse = _points_to_segments(a32[:, 0], a32[:, 1], b32).astype(np.float64)
        np.minimum(ub, d_coarse + margin, out=ub)

    order = np.argsort(-ub)
    best = 0.0
    chunk = 2048
    for i in range(0, n, chunk):
        sel = order[i:i + chunk]
        sel = sel[ub[sel] > best]
        if len(sel) == 0:
            break
        d64 = _points_to_segments(a[sel, 0], a[sel, 1], b)
        best = max(best, float(d64.max()))
    return best


def hausdorff(a: np.ndarray, b: np.ndarray, max_spacing: float = 1e-3) -> float:
    """Symmetric Hausdorff distance between two polylines.

    Both inputs are resampled at arc length <= ``max_spacing`` and compared
    with exact point-to-segment distances in both directions.
    """
    ra = resample_polyline(np.asarray(a, float), max_spacing)
    rb = resample_polyline(np.asarray(b, float), max_spacing)
    if len(ra) < 2 or len(rb) < 2:
        da = np.hypot(ra[:, 0][:, None] - rb[:, 0][None, :], ra[:, 1][:, None] - rb[:, 1][None, :])
        return float(max(da.min(axis=1).max(), da.min(axis=0).max()))
    return max(_directed_hausdorff(ra, rb, max_spacing), _directed_hausdorff(rb, ra, max_spacing))


# ---------------------------------------------------------------------------
# Convergence and continuation studies on the local model
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceStudy:
    eps: list
    distances: list
    slope: float
    intercept: float
    monotone: bool
    failures: list


def _relaxation_section(mu: float) -> Section:
    level = min(0.05, 0.4 * mu)
    return Section(kind="horizontal", level=level, direction="increasing")


def relax_convergence_study(
    p,
    reg,
    mu: float,
    eps_ladder: Sequence[float],
    cfg: IntegratorConfig | None = None,
) -> ConvergenceStudy:
    """Hausdorff distance of the regularized cycle to its nonsmooth limit.

    For each epsilon in the ladder, the stable relaxation cycle of the
    smooth local model is located and compared (Hausdorff) with the
    nonsmooth cycle at the same mu; the least-squares slope of
    log(distance) against log(epsilon) is returned.
    """
    from . import normalform

    pws_cycle = normalform.build_pws_cycle(p, mu)
    sec = _relaxation_section(mu)

    # seed from the crossing of the nonsmooth cycle with the section
    pts = pws_cycle.points
    seed = None
    for i in range(len(pts) - 1):
        y0, y1 = pts[i, 1], pts[i + 1, 1]
        if (y0 - sec.level) * (y1 - sec.level) < 0 and y1 > y0:
            w = (sec.level - y0) / (y1 - y0)
            seed = pts[i, 0] + w * (pts[i + 1, 0] - pts[i, 0])
            break
    if seed is None:
        raise DetectionError("nonsmooth cycle does not cross the anchor section")

    eps_used, dists, failures = [], [], []
    guess = sec.point(seed)
    for eps in sorted(eps_ladder, reverse=True):
        cfg_eps = replace(cfg or IntegratorConfig(), layer_eps=eps)
        field = lambda x, y, _e=eps: normalform.smooth_field(p, reg, x, y, mu, _e)
        cyc = find_limit_cycle(field, sec, guess, cfg_eps, mu=mu, eps=eps)
        if cyc is None:
            failures.append(eps)
            continue
        guess = cyc.anchor
        eps_used.append(eps)
        dists.append(hausdorff(cyc.points, pws_cycle.points))

    if len(eps_used) >= 2:
        slope, intercept = np.polyfit(np.log(eps_used), np.log(dists), 1)
    else:
        slope, intercept = math.nan, math.nan
    monotone = all(d1 > d2 for d1, d2 in zip(dists, dists[1:]))
    return ConvergenceStudy(
        eps=eps_used, distances=dists, slope=float(slope),
        intercept=float(intercept), monotone=monotone, failures=failures,
    )


@dataclass
class CycleBranch:
    """A one-parameter family of limit cycles, ordered by increasing mu."""

    samples: list  # list[(mu, LimitCycle)]
    eps: float
    terminated_by: str  # "window edge" | "detection failure" | "period blow-up"

    def __post_init__(self):
        mus = [m for m, _ in self.samples]
        if any(m2 <= m1 for m1, m2 in zip(mus, mus[1:])):
            raise ValueError("branch samples must be strictly increasing in mu")


def continue_cycle_in_mu(
    p,
    reg,
    eps: float,
    mu_window: tuple,
    steps: int = 25,
    cfg: IntegratorConfig | None = None,
    period_cap: float = 1e3,
) -> CycleBranch:
    """Natural continuation of the stable cycle family, marching mu downward.

    Each detection is seeded at the previous anchor.  The branch terminates
    at the first failure; the cause is recorded rather than bridged.
    """
    from . import normalform

    mu_lo, mu_hi = float(mu_window[0]), float(mu_window[1])
    if not 0 < mu_lo < mu_hi:
        raise ValueError("mu window must satisfy 0 < mu_lo < mu_hi")
    mus = np.exp(np.linspace(math.log(mu_hi), math.log(mu_lo), steps))

    base_cfg = cfg or IntegratorConfig()
    samples = []
    terminated_by = "window edge"
    guess_along = None
    for mu in mus:
        sec = _relaxation_section(float(mu))
        if guess_along is None:
            pws_cycle = normalform.build_pws_cycle(p, float(mu))
            pts = pws_cycle.points
            for i in range(len(pts) - 1):
                y0, y1 = pts[i, 1], pts[i + 1, 1]
                if (y0 - sec.level) * (y1 - sec.level) < 0 and y1 > y0:
                    w = (sec.level - y0) / (y1 - y0)
                    guess_along = pts[i, 0] + w * (pts[i + 1, 0] - pts[i, 0])
                    break
            if guess_along is None:
                raise DetectionError("no section crossing on the seed cycle")
        cfg_eps = replace(base_cfg, layer_eps=eps)
        field = lambda x, y, _m=float(mu): normalform.smooth_field(p, reg, x, y, _m, eps)
        cyc = find_limit_cycle(field, sec, sec.point(guess_along), cfg_eps, mu=float(mu), eps=eps)
        if cyc is None:
            terminated_by = "detection failure"
            break
        if cyc.period > period_cap:
            terminated_by = "period blow-up"
            break
        samples.append((float(mu), cyc))
        # reseed on the next section level using the captured polyline
        guess_along = sec.along(*cyc.anchor)

    samples.reverse()
    return CycleBranch(samples=samples, eps=eps, terminated_by=terminated_by)


def continue_equilibrium_in_mu(
    p,
    reg,
    eps: float,
    mu_window: tuple,
    steps: int = 81,
    branch: str = "focus",
):
    """Newton continuation of an equilibrium family of the smooth local model.

    ``branch`` selects the seeding at the high end of the window: "focus"
    starts from the upper-plane equilibrium, "saddle" from the sliding
    saddle (only meaningful for gamma > 0).  Returns a list of
    (mu, (x, y), (eig1, eig2)); the list is truncated at branch loss.
    """
    from . import normalform

    mu_lo, mu_hi = float(mu_window[0]), float(mu_window[1])
    mus = np.linspace(mu_hi, mu_lo, steps)
    if branch == "focus":
        guess = (0.0, mu_hi / p.delta)
    elif branch == "saddle":
        if p.gamma <= 0:
            raise ValueError("saddle branch requires gamma > 0")
        guess = (-mu_hi / p.gamma, 0.0)
    else:
        raise ValueError(f"unknown branch {branch!r}")

    out = []
    for mu in mus:
        field = lambda x, y, _m=float(mu): normalform.smooth_field(p, reg, x, y, _m, eps)
        jac = lambda x, y, _m=float(mu): normalform.smooth_jacobian(p, reg, x, y, _m, eps)
        sol = find_equilibrium(field, jac, guess)
        if sol is None:
            break
        (xe, ye), eigs = sol
        # reject jumps to a different branch after a fold
        if out and math.hypot(xe - out[-1][1][0], ye - out[-1][1][1]) > 0.25:
            break
        out.append((float(mu), (xe, ye), eigs))
        guess = (xe, ye)
    return out
