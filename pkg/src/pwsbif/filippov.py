"""Nonsmooth-limit analysis of planar two-zone systems split by y = 0.

Classification of the switching line into crossing/sliding/tangency points,
the sliding flow, fold points, and detection plus classification of
boundary-focus collisions.  The switching line is fixed at y = 0; systems
with a curved switching set must be straightened by the caller first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import dynamics
from .errors import DegenerateError, DetectionError, NoCycleError

__all__ = [
    "PlanarVectorField",
    "PwsSystem",
    "FoldPoint",
    "BfCandidate",
    "classify_point",
    "sliding_field",
    "sliding_chi",
    "find_folds",
    "sliding_equilibria",
    "detect_bf",
    "classify_bf",
]


class PlanarVectorField:
    """A parameterized planar field value(x, y, alpha) -> (f1, f2).

    An analytic Jacobian (same arguments, returns a 2x2 nested tuple) is
    optional; a central finite-difference fallback is used otherwise.
    """

    def __init__(self, value: Callable, jacobian: Optional[Callable] = None, name: str = ""):
        self.value = value
        self._jacobian = jacobian
        self.name = name

    def __call__(self, x: float, y: float, alpha: float) -> tuple:
        return self.value(x, y, alpha)

    def jacobian(self, x: float, y: float, alpha: float):
        if self._jacobian is not None:
            return self._jacobian(x, y, alpha)
        return dynamics.fd_jacobian(lambda a, b: self.value(a, b, alpha), x, y)

    def d_alpha(self, x: float, y: float, alpha: float) -> tuple:
        h = 1e-7 * max(1.0, abs(alpha))
        fp = self.value(x, y, alpha + h)
        fm = self.value(x, y, alpha - h)
        return ((fp[0] - fm[0]) / (2 * h), (fp[1] - fm[1]) / (2 * h))


@dataclass(frozen=True)
class PwsSystem:
    """Two smooth planar fields glued along the switching line y = 0."""

    zplus: PlanarVectorField
    zminus: PlanarVectorField
    domain: tuple = ((-2.0, 2.0), (-2.0, 2.0))

    def __post_init__(self):
        (_, _), (ylo, yhi) = self.domain
        if not ylo < 0.0 < yhi:
            raise ValueError("domain must straddle the switching line y = 0")


@dataclass(frozen=True)
class FoldPoint:
    """Quadratic tangency of one field with the switching line."""

    x: float
    visibility: str  # "visible" | "invisible" | "degenerate"
    side: str        # "plus" | "minus"
    second_lie: float


@dataclass(frozen=True)
class BfCandidate:
    """A focus-boundary collision with its nondegeneracy data."""

    x: float
    alpha: float
    eigenvalues: tuple          # complex pair of the upper-field Jacobian
    determinant_condition: float
    sliding_derivative: float   # d/dx of the sliding field at the collision
    z2_minus: float
    classification: str         # "BF1".."BF5", "degenerate:<why>", "unclassified"
    degenerate: bool = False
    degenerate_reason: str = ""


def _lie_plus(sys: PwsSystem, x: float, alpha: float) -> float:
    return sys.zplus(x, 0.0, alpha)[1]


def _lie_minus(sys: PwsSystem, x: float, alpha: float) -> float:
    return sys.zminus(x, 0.0, alpha)[1]


def classify_point(sys: PwsSystem, x: float, alpha: float) -> str:
    """Classify (x, 0): "crossing", "sliding" or "tangency".

    The tangency tolerance scales with the local field magnitudes so the
    classification is dimensionless.
    """
    zp = sys.zplus(x, 0.0, alpha)
    zm = sys.zminus(x, 0.0, alpha)
    prod = zp[1] * zm[1]
    scale = math.hypot(*zp) * math.hypot(*zm)
    tol = 1e-12 * scale
    if prod > tol:
        return "crossing"
    if prod < -tol:
        return "sliding"
    return "tangency"


def sliding_chi(sys: PwsSystem, x: float, alpha: float) -> float:
    """Convex weight of the upper field in the sliding combination."""
    zp2 = _lie_plus(sys, x, alpha)
    zm2 = _lie_minus(sys, x, alpha)
    den = zm2 - zp2
    if abs(den) < 1e-14:
        raise DegenerateError(f"sliding combination degenerate at x = {x:g} (Z2- - Z2+ = {den:.2e})")
    return zm2 / den

def sliding_field(sys: PwsSystem, x: float, alpha: float) -> float:
    """Sliding flow on y = 0 in the x chart: det(Z+|Z-)/(Z2- - Z2+)."""
    zp = sys.zplus(x, 0.0, alpha)
    zm = sys.zminus(x, 0.0, alpha)
    den = zm[1] - zp[1]
    if abs(den) < 1e-14:
        raise DegenerateError(f"sliding field degenerate at x = {x:g} (Z2- - Z2+ = {den:.2e})")
    return (zp[0] * zm[1] - zm[0] * zp[1]) / den


def sliding_field_derivative(sys: PwsSystem, x: float, alpha: float, h: float = 1e-6) -> float:
    h = h * max(1.0, abs(x))
    return (sliding_field(sys, x + h, alpha) - sliding_field(sys, x - h, alpha)) / (2 * h)


def _refine_zero(fun, a: float, b: float, fa: float, fb: float, tol: float = 1e-12) -> float:
    """Secant refinement of a bracketed simple zero, with bisection fallback."""
    x0, f0, x1, f1 = a, fa, b, fb
    for _ in range(200):
        if abs(x1 - x0) <= tol:
            break
        if f1 != f0:
            xs = x1 - f1 * (x1 - x0) / (f1 - f0)
        else:
            xs = 0.5 * (a + b)
        if not (min(a, b) <= xs <= max(a, b)):
            xs = 0.5 * (a + b)
        fs = fun(xs)
        if fs == 0.0:
            return xs
        if (fs > 0) == (fa > 0):
            a, fa = xs, fs
        else:
            b, fb = xs, fs
        x0, f0, x1, f1 = x1, f1, xs, fs
    return 0.5 * (a + b)


def find_folds(
    sys: PwsSystem,
    x_interval: tuple,
    alpha: float,
    n_grid: int = 2001,
    second_lie_tol: float = 1e-10,
) -> list:
    """All simple tangencies of either field on the interval.

    Zeros of the normal components are bracketed on a uniform grid and
    refined to |dx| <= 1e-12.  Visibility follows the sign of the second
    Lie derivative: for the upper field positive means visible, for the
    lower field negative means visible.  Tangencies with a second Lie
    derivative below ``second_lie_tol`` are tagged degenerate.
    """
    lo, hi = float(x_interval[0]), float(x_interval[1])
    xs = np.linspace(lo, hi, n_grid)
    folds = []
    for side, lie, fld in (("plus", _lie_plus, sys.zplus), ("minus", _lie_minus, sys.zminus)):
        vals = np.array([lie(sys, float(x), alpha) for x in xs])
        for i in range(len(xs) - 1):
            f0, f1 = vals[i], vals[i + 1]
            if f0 == 0.0 and i > 0:
                x_root = float(xs[i])
            elif f0 * f1 < 0.0:
                x_root = _refine_zero(lambda v: lie(sys, v, alpha), float(xs[i]), float(xs[i + 1]), f0, f1)
            else:
                continue
            # second Lie derivative: grad(Z2) . Z at the tangency
            J = fld.jacobian(x_root, 0.0, alpha)
            z = fld(x_root, 0.0, alpha)
            second = J[1][0] * z[0] + J[1][1] * z[1]
            if abs(second) < second_lie_tol:
                vis = "degenerate"
            elif side == "plus":
                vis = "visible" if second > 0 else "invisible"
            else:
                vis = "visible" if second < 0 else "invisible"
            folds.append(FoldPoint(x=x_root, visibility=vis, side=side, second_lie=second))
    folds.sort(key=lambda fp: fp.x)
    return folds


def sliding_equilibria(
    sys: PwsSystem,
    alpha: float,
    x_interval: tuple,
    n_grid: int = 2001,
    neutral_tol: float = 1e-10,
) -> list:
    """Zeros of the sliding flow with their stability on the sliding set.

    Returns a list of (x, stability) with stability in
    {"stable", "unstable", "neutral"}.  The sliding-flow formula is
    evaluated on the whole interval; keeping the interval inside the
    actual sliding region is the caller's responsibility (zeros outside it
    are virtual continuations of the sliding flow).
    """
    lo, hi = float(x_interval[0]), float(x_interval[1])
    xs = np.linspace(lo, hi, n_grid)
    vals = np.full(len(xs), np.nan)
    for i, x in enumerate(xs):
        try:
            vals[i] = sliding_field(sys, float(x), alpha)
        except DegenerateError:
            pass
    out = []
    for i in range(len(xs) - 1):
        f0, f1 = vals[i], vals[i + 1]
        if np.isnan(f0) or np.isnan(f1) or f0 * f1 >= 0.0:
            continue
        x_root = _refine_zero(lambda v: sliding_field(sys, v, alpha), float(xs[i]), float(xs[i + 1]), f0, f1)
        d = sliding_field_derivative(sys, x_root, alpha)
        if abs(d) < neutral_tol:
            stability = "neutral"
        else:
            stability = "stable" if d < 0 else "unstable"
        out.append((x_root, stability))
    return out


def _newton_collision(sys: PwsSystem, x0: float, a0: float, max_iter: int = 60):
    """2D Newton on (x, alpha) for Z+((x,0),alpha) = 0."""
    x, a = x0, a0
    for _ in range(max_iter):
        f1, f2 = sys.zplus(x, 0.0, a)
        res = math.hypot(f1, f2)
        if res <= 1e-13:
            return x, a
        J = sys.zplus.jacobian(x, 0.0, a)
        da_col = sys.zplus.d_alpha(x, 0.0, a)
        j11, j12 = J[0][0], da_col[0]
        j21, j22 = J[1][0], da_col[1]
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            return None
        dx = (-f1 * j22 + f2 * j12) / det
        da = (-f2 * j11 + f1 * j21) / det
        step = math.hypot(dx, da)
        if step > 0.5:
            dx *= 0.5 / step
            da *= 0.5 / step
        x += dx
        a += da
    f1, f2 = sys.zplus(x, 0.0, a)
    if math.hypot(f1, f2) <= 1e-10:
        return x, a
    return None


def detect_bf(
    sys: PwsSystem,
    alpha_interval: tuple,
    x_interval: Optional[tuple] = None,
    n_scan: int = 41,
    cond_tol: float = 1e-8,
    classify: bool = True,
) -> Optional[BfCandidate]:
    """Locate a boundary collision of the upper-field equilibrium.

    Solves Z+((x, 0), alpha) = 0 for (x, alpha) by Newton from the best
    coarse-grid seed, then checks the collision nondegeneracy conditions:
    transversal lower field, transversal parameter unfolding, nonzero
    sliding-flow derivative, and complex eigenvalues with nonzero real and
    imaginary parts.  Quantities smaller than ``cond_tol`` mark the
    candidate degenerate, with the failing condition named.
    """
    a_lo, a_hi = float(alpha_interval[0]), float(alpha_interval[1])
    if x_interval is None:
        x_interval = sys.domain[0]
    x_lo, x_hi = float(x_interval[0]), float(x_interval[1])

    best = None
    for a in np.linspace(a_lo, a_hi, n_scan):
        for x in np.linspace(x_lo, x_hi, n_scan):
            f1, f2 = sys.zplus(float(x), 0.0, float(a))
            r = math.hypot(f1, f2)
            if best is None or r < best[0]:
                best = (r, float(x), float(a))
    sol = _newton_collision(sys, best[1], best[2])
    if sol is None:
        return None
    x_bf, a_bf = sol

    J = np.asarray(sys.zplus.jacobian(x_bf, 0.0, a_bf), dtype=float)
    eigs = np.linalg.eigvals(J)
    lam = complex(eigs[0]) if eigs[0].imag >= 0 else complex(eigs[1])
    z2m = _lie_minus(sys, x_bf, a_bf)
    da = sys.zplus.d_alpha(x_bf, 0.0, a_bf)
    dx = (J[0][0], J[1][0])
    det_cond = da[0] * dx[1] - da[1] * dx[0]
    # the sliding flow vanishes at the collision itself; differentiate across it
    h = 1e-6 * max(1.0, abs(x_bf))
    try:
        s_plus = sliding_field(sys, x_bf - h, a_bf)
        s_plus2 = sliding_field(sys, x_bf - 2 * h, a_bf)
        slid_deriv = (s_plus2 - s_plus) / (-h)
    except DegenerateError:
        slid_deriv = 0.0

    degenerate = False
    reasons = []
    if abs(z2m) < cond_tol:
        degenerate = True
        reasons.append("lower field tangent to the switching line")
    if abs(det_cond) < cond_tol:
        degenerate = True
        reasons.append("parameter unfolding determinant = 0")
    if abs(slid_deriv) < cond_tol:
        degenerate = True
        reasons.append("sliding derivative = 0")
    if abs(lam.imag) < cond_tol:
        degenerate = True
        reasons.append("colliding equilibrium is not a focus")
    if abs(lam.real) < cond_tol:
        degenerate = True
        reasons.append("focus is neutrally stable (Re lambda = 0)")

    cand = BfCandidate(
        x=x_bf, alpha=a_bf, eigenvalues=(lam, lam.conjugate()),
        determinant_condition=float(det_cond), sliding_derivative=float(slid_deriv),
        z2_minus=float(z2m),
        classification="degenerate:" + "; ".join(reasons) if degenerate else "unclassified",
        degenerate=degenerate, degenerate_reason="; ".join(reasons),
    )
    if degenerate or not classify:
        return cand
    label = classify_bf(sys, cand)
    return BfCandidate(
        x=cand.x, alpha=cand.alpha, eigenvalues=cand.eigenvalues,
        determinant_condition=cand.determinant_condition,
        sliding_derivative=cand.sliding_derivative, z2_minus=cand.z2_minus,
        classification=label, degenerate=False, degenerate_reason="",
    )


def _grazing_drop_point(sys: PwsSystem, x_fold: float, alpha: float) -> float:
    """x coordinate of the first return to y = 0 of the upper-field orbit
    grazing the visible fold, on the sliding side of the fold."""
    field = lambda a, b: sys.zplus(a, b, alpha)
    sec = dynamics.Section(kind="horizontal", level=0.0, direction="decreasing",
                           window=(-math.inf, x_fold - 1e-12))
    cfg = dynamics.IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, t_budget=1e3)
    traj = dynamics.integrate(field, (x_fold, 0.0), (0.0, cfg.t_budget), cfg,
                              events=[sec], stop_on=0, record=False, t_skip_events=1e-9)
    if traj.status != "event":
        raise DetectionError("grazing orbit has no return to the switching line")
    return traj.events[-1].x


def classify_bf(sys: PwsSystem, bf: BfCandidate, probe: float = 1e-2) -> str:
    """Assign a BF type to a nondegenerate collision.

    Stable sliding (lower field entering) with negative sliding derivative
    gives BF3 directly.  With positive sliding derivative, BF1 and BF2 are
    separated globally: the grazing orbit of the visible fold is integrated
    to its drop point x_d and compared with the sliding equilibrium x_s
    (BF1 when x_d > x_s).  Unstable sliding gives BF4/BF5 by the sign of
    the sliding derivative alone.
    """
    if bf.degenerate:
        raise DegenerateError(f"cannot classify degenerate candidate: {bf.degenerate_reason}")
    gamma_like = bf.sliding_derivative
    if bf.z2_minus < 0:
        return "BF4" if gamma_like < 0 else "BF5"
    if gamma_like < 0:
        return "BF3"

    # BF1 vs BF2: probe on whichever side of the collision has a visible fold
    for a_probe in (bf.alpha + probe, bf.alpha - probe):
        width = max(1.0, 10 * abs(bf.x))
        folds = find_folds(sys, (bf.x - width, bf.x + width), a_probe)
        visible = [fp for fp in folds if fp.side == "plus" and fp.visibility == "visible"]
        if not visible:
            continue
        fold = min(visible, key=lambda fp: abs(fp.x - bf.x))
        try:
            x_d = _grazing_drop_point(sys, fold.x, a_probe)
        except DetectionError:
            continue
        eqs = sliding_equilibria(sys, a_probe, (min(x_d, fold.x) - 0.5, max(x_d, fold.x) + 0.5))
        if not eqs:
            continue
        x_s = min((x for x, _ in eqs), key=lambda v: abs(v - bf.x))
        if abs(x_d - x_s) < 1e-8:
            return "degenerate:homoclinic boundary focus (x_d = x_s)"
        return "BF1" if x_d > x_s else "BF2"
    raise DetectionError("no visible fold found near the collision on either probe side")
