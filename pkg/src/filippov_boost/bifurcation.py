"""Hopf bifurcation, unstable sliding cycle and homoclinic loop at the two-fold.

The cycle and the loop both live on the sliding region, so all orbit work here
uses the planar normalized sliding field (polynomial, same orbits and
orientation as the Filippov field on the sliding region).  The pseudo-focus is
always encircled counter-clockwise.

Two sections of the line ``y = y_r`` are used:

* the right half ``x > a*y_r**2`` for the cycle's Poincare map, and
* the left half ``x < a*y_r**2`` for the separatrix gap, where the unstable
  separatrix of the two-fold arrives after going over the top of the focus and
  the stable one arrives when followed backwards.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .filippov import SigmaPoint
from .model import Params, ParameterError
from .singularities import (
    DegenerateConfiguration,
    QKind,
    bt_loads,
    hopf_gain,
    in_hopf_band,
    jacobian_planar,
    node_focus_gains,
    pseudo_equilibrium,
    q_kind_from_table,
    two_fold_point,
    two_fold_projection,
)

log = logging.getLogger(__name__)

RTOL = 1e-11
# return-map residuals below RETURN_NOISE * (1 + |x|) are treated as zero
RETURN_NOISE = 1e-9
ATOL = 1e-12


class BifurcationError(RuntimeError):
    pass


class CycleNotFound(BifurcationError):
    """The Poincare map has no fixed point on the section."""


class CycleTouchesBoundary(BifurcationError):
    """A candidate cycle leaves the sliding region."""


class HomoclinicError(BifurcationError):
    """Separatrix tracing or the homoclinic root search failed."""


class Criticality(enum.Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    DEGENERATE = "degenerate"


# --------------------------------------------------------------------------- Hopf


@dataclass(frozen=True)
class HopfReport:
    a: float
    k_H: float
    det_at_kH: float
    transversality: float
    sigma: float
    criticality: Criticality


def hopf_sigma(a: float, k: float, omega: float, y_r: float) -> float:
    """Stability number of the weak focus (positive means subcritical).

    Only meaningful for ``a`` strictly between the Bogdanov-Takens loads, where
    the square root is real.
    """
    w, yr = omega, y_r
    rad = w**3 * (a * yr**2 * (w - 2.0 * a) - 1.0) ** 3 / a**3
    if rad <= 0:
        raise ValueError("sigma undefined outside the Hopf band of a")
    poly = (
        -2.0 * a**2 * k**2 * yr
        + a * (2.0 * k**3 + k**2 * w * yr + k - 2.0 * w * yr)
        + w * (k + w * yr)
    )
    return -(3.0 * math.sqrt(2.0) * math.pi * w * poly) / (yr * (2.0 * a - w) * math.sqrt(rad))


def hopf_report(a: float, omega: float = 1.0, y_r: float = 4.0, tol: float = 1e-12) -> HopfReport:
    """Hopf conditions at ``k = k_H(a)``.

    Raises ``ValueError`` unless ``a`` lies strictly inside ``(a-, a+)``.
    """
    bt = bt_loads(omega, y_r)
    if bt is None or not bt[0] < a < bt[1]:
        raise ValueError(f"a={a} is outside the Hopf band {bt}")
    k_h = hopf_gain(a, omega, y_r)
    det = omega * (-1.0 + omega * y_r**2 * a - 2.0 * y_r**2 * a**2) / (2.0 * a)
    sigma = hopf_sigma(a, k_h, omega, y_r)
    if abs(sigma) <= tol:
        crit = Criticality.DEGENERATE
    elif sigma > 0:
        crit = Criticality.SUBCRITICAL
    else:
        crit = Criticality.SUPERCRITICAL
    return HopfReport(a, k_h, det, -2.0 * a * y_r, sigma, crit)


# ---------------------------------------------------------------------- orbit kit


def _planar_rhs(p: Params, sign: float):
    a, k, w, yr = p.a, p.k, p.omega, p.y_r

    def rhs(t, s):
        x, y = s[0], s[1]
        return [
            sign * (-x + a * y * y - w * y * (y - yr)),
            sign * (k * (x - a * y * y) + w * x * (y - yr)),
        ]

    return rhs


def _leave_events(p: Params):
    """Terminal events for leaving the closed sliding region."""
    a, k, w, yr = p.a, p.k, p.omega, p.y_r

    def below_s_minus(t, s):
        return (w - a) * s[1] + k - w * yr  # f3- on z = 0

    def beyond_s_plus(t, s):
        return -(s[0] + (w - a - k) * s[1] + k - w * yr)  # -f3+ on z = 0

    for ev in (below_s_minus, beyond_s_plus):
        ev.terminal = True
        ev.direction = -1.0
    return [below_s_minus, beyond_s_plus]


def sliding_margins(x, y, p: Params) -> np.ndarray:
    """``(f3-, -f3+)`` on the plane; both positive exactly on the sliding region."""
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.array([(w - a) * y + k - w * yr, -(x + (w - a - k) * y + k - w * yr)])


def section_edge(p: Params) -> float:
    """Where the line ``y = y_r`` meets ``S+``."""
    return (p.a + p.k - p.omega) * p.y_r - p.k + p.omega * p.y_r


def poincare_return(p: Params, x0: float, reverse: bool = True, *, s_max: float = 1e3,
                    rtol: float = RTOL, atol: float = ATOL) -> float:
    """First return to the right half of ``y = y_r`` (NaN if the orbit leaves the sliding region).

    ``reverse=True`` follows the flow backwards, which makes the unstable cycle
    attracting.
    """
    sign = -1.0 if reverse else 1.0

    def sec(t, s):
        return s[1] - p.y_r

    # forward crossings on the right half go upwards; the start point itself
    # registers as the first event
    sec.direction = sign
    sec.terminal = 2
    sol = solve_ivp(
        _planar_rhs(p, sign), (0.0, s_max), [x0, p.y_r], method="DOP853",
        rtol=rtol, atol=atol, events=[sec] + _leave_events(p),
    )
    if len(sol.t_events[0]) < 2:
        return math.nan
    x1 = sol.y_events[0][1][0]
    return x1 if x1 > p.a * p.y_r**2 else math.nan


def return_map_derivative(p: Params, x0: float, reverse: bool = True, h: float | None = None) -> float:
    """Central finite difference of :func:`poincare_return` at ``x0``.

    The step is halved until both neighbours return to the section.
    """
    h = 1e-6 * (1.0 + abs(x0)) if h is None else h
    for _ in range(20):
        hi = poincare_return(p, x0 + h, reverse=reverse)
        lo = poincare_return(p, x0 - h, reverse=reverse)
        if math.isfinite(hi) and math.isfinite(lo):
            return (hi - lo) / (2.0 * h)
        h *= 0.5
    return math.nan


# ------------------------------------------------------------------ limit cycle


@dataclass(frozen=True)
class LimitCycle:
    k: float
    anchor: SigmaPoint
    period: float  # in the converter's dimensionless time
    amplitude_x: float
    amplitude_y: float
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    multiplier: float  # derivative of the forward Poincare map at the anchor (via the backward map)
    min_distance_to_two_fold: float
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def stability(self) -> str:
        return "unstable" if abs(self.multiplier) > 1 else "stable"


def _scan_points(x_q: float, x_e: float, n: int) -> np.ndarray:
    w = x_e - x_q
    inner = np.geomspace(1e-4, 0.1, max(n // 3, 2))
    outer = np.linspace(0.1, 0.999, max(n - n // 3, 2))[1:]
    return x_q + w * np.concatenate([inner, outer])


def _refine_against_escape(g, x_in: float, x_out: float, n: int = 14):
    """Bracket a fixed point squeezed between a returning and a non-returning orbit.

    Near the homoclinic loop the cycle hugs the stable separatrix of the
    two-fold; beyond the separatrix orbits no longer return.
    """
    lo, hi = x_in, x_out
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if math.isfinite(g(mid)):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * (1.0 + abs(hi)):
            break
    xs = lo - (lo - x_in) * np.geomspace(1.0, 1e-9, n)
    xs = np.concatenate([[x_in], np.sort(xs)])
    gs = [g(x) for x in xs]
    for i in range(len(xs) - 1):
        if math.isfinite(gs[i]) and math.isfinite(gs[i + 1]) and gs[i] > 0 >= gs[i + 1]:
            return xs[i], xs[i + 1]
    return None


def _trace_cycle(p: Params, x0: float, n_samples: int = 2000):
    """Follow the cycle once forward; returns samples and the dimensionless period."""
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    base = _planar_rhs(p, 1.0)

    def rhs(t, s):
        dx, dy = base(t, s)
        return [dx, dy, k * s[1] - s[0]]  # d(tau)/ds = f3- - f3+

    def sec(t, s):
        return s[1] - yr

    sec.direction = 1.0
    sec.terminal = 2
    sol = solve_ivp(rhs, (0.0, 1e3), [x0, yr, 0.0], method="DOP853", rtol=RTOL, atol=ATOL,
                    events=sec, dense_output=True)
    if len(sol.t_events[0]) < 2:
        raise CycleNotFound("cycle candidate does not close")
    s_end = sol.t_events[0][1]
    ss = np.linspace(0.0, s_end, n_samples)
    pts = sol.sol(ss)
    return pts[:2].T, float(sol.y_events[0][1][2])


def find_limit_cycle(p: Params, guess: SigmaPoint | None = None, *, n_scan: int = 24) -> LimitCycle:
    """Locate the unstable sliding cycle around the pseudo-focus at gain ``p.k``.

    The backward Poincare map on the right half of ``y = y_r`` is scanned for a
    sign change of ``P(x) - x`` and the fixed point is polished with Brent's
    method.  With a ``guess`` on the section, the bracket closest to it wins.

    Raises
    ------
    CycleNotFound
        No fixed point on the section (gain outside the existence window).
    CycleTouchesBoundary
        The closed orbit found is not strictly inside the sliding region.
    """
    a, k, yr = p.a, p.k, p.y_r
    if k <= a * yr:
        raise CycleNotFound("pseudo-equilibrium is not on the sliding region")
    x_q = a * yr**2
    x_e = section_edge(p)
    xs = _scan_points(x_q, x_e, n_scan)
    if guess is not None:
        gx, gy = guess
        if abs(gy - yr) > 1e-9 * (1 + yr) or not x_q < gx < x_e:
            raise ValueError(f"guess {guess} is not on the section y=y_r, {x_q} < x < {x_e}")
        xs = np.unique(np.append(xs, gx))

    cache: dict[float, float] = {}

    def g(x):
        x = float(x)
        if x not in cache:
            cache[x] = poincare_return(p, x) - x
        return cache[x]

    gs = [g(x) for x in xs]
    brackets = []
    for i in range(len(xs) - 1):
        gi, gj = gs[i], gs[i + 1]
        # sign changes within integration noise are not resolved fixed points
        if not gi > RETURN_NOISE * (1.0 + abs(xs[i])):
            continue
        if math.isfinite(gj) and gj <= 0:
            brackets.append((xs[i], xs[i + 1]))
        elif not math.isfinite(gj):
            br = _refine_against_escape(g, xs[i], xs[i + 1])
            if br is not None:
                brackets.append(br)
    if not brackets:
        raise CycleNotFound(f"no fixed point of the return map at k={k}")
    if guess is not None:
        brackets.sort(key=lambda b: min(abs(b[0] - guess[0]), abs(b[1] - guess[0])))
    lo, hi = brackets[0]
    x_star = lo if g(lo) == 0 else brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)

    samples, period = _trace_cycle(p, x_star)
    margins = sliding_margins(samples[:, 0], samples[:, 1], p)
    if margins.min() <= 0:
        raise CycleTouchesBoundary(f"cycle at k={k} leaves the sliding region")

    multiplier = 1.0 / return_map_derivative(p, x_star, reverse=True)

    pt = two_fold_projection(p)
    dist = float(np.min(np.hypot(samples[:, 0] - pt.x, samples[:, 1] - pt.y)))
    xr = (float(samples[:, 0].min()), float(samples[:, 0].max()))
    yrng = (float(samples[:, 1].min()), float(samples[:, 1].max()))
    return LimitCycle(
        k=k,
        anchor=SigmaPoint(float(x_star), yr),
        period=period,
        amplitude_x=xr[1] - xr[0],
        amplitude_y=yrng[1] - yrng[0],
        x_range=xr,
        y_range=yrng,
        multiplier=float(multiplier),
        min_distance_to_two_fold=dist,
        samples=samples,
    )


# ------------------------------------------------------------------- homoclinic


@dataclass(frozen=True)
class SeparatrixTrace:
    """Left-section hits of the two separatrices of the two-fold saddle."""

    x_unstable: float
    x_stable: float
    inside_unstable: bool  # stayed in the closed sliding region up to the section
    inside_stable: bool

    @property
    def gap(self) -> float:
        return self.x_unstable - self.x_stable


def _saddle_directions(p: Params):
    pt = two_fold_projection(p)
    jac = jacobian_planar(pt, p)
    if np.linalg.det(jac) >= 0:
        raise HomoclinicError("two-fold projection is not a saddle of the sliding field")
    ev, vecs = np.linalg.eig(jac)
    grad_m = np.array([0.0, p.omega - p.a])  # gradient of f3- on the plane
    grad_p = np.array([1.0, p.omega - p.a - p.k])  # gradient of f3+ on the plane
    out = {}
    for i in range(2):
        v = np.real(vecs[:, i])
        v = v / np.linalg.norm(v)
        if grad_m @ v < 0:
            v = -v
        if grad_p @ v >= 0:
            raise HomoclinicError("saddle eigen-direction does not enter the sliding region")
        out["unstable" if ev[i].real > 0 else "stable"] = v
    return pt, out["unstable"], out["stable"]


def _hit_left_section(p: Params, start, sign: float, t_max: float = 1e3):
    x_q = p.a * p.y_r**2

    def sec(t, s):
        return s[1] - p.y_r

    sec.direction = -sign  # descending on the left side in forward time
    sec.terminal = True

    radius = 10.0 * (1.0 + math.hypot(x_q, p.y_r))

    def escape(t, s):
        return radius - math.hypot(s[0] - x_q, s[1] - p.y_r)

    escape.terminal = True
    sol = solve_ivp(_planar_rhs(p, sign), (0.0, t_max), start, method="DOP853",
                    rtol=RTOL, atol=1e-13, events=[sec, escape], dense_output=False)
    if not len(sol.t_events[0]):
        raise HomoclinicError(f"separatrix missed the section y=y_r at k={p.k}, a={p.a}")
    x_hit = float(sol.y_events[0][0][0])
    if x_hit >= x_q:
        raise HomoclinicError(f"separatrix crossed y=y_r on the wrong side at k={p.k}, a={p.a}")
    m = sliding_margins(sol.y[0], sol.y[1], p)
    inside = bool(m.min() >= -1e-9)
    return x_hit, inside


def trace_separatrices(p: Params, eps: float | None = None) -> SeparatrixTrace:
    if p.k <= p.a * p.y_r:
        raise HomoclinicError("saddle condition violated: need k > a*y_r")
    pt, vu, vs = _saddle_directions(p)
    if eps is None:
        eps = 1e-6 * (1.0 + math.hypot(pt.x, pt.y))
    base = np.array([pt.x, pt.y])
    xu, inu = _hit_left_section(p, base + eps * vu, 1.0)
    xs, ins = _hit_left_section(p, base + eps * vs, -1.0)
    return SeparatrixTrace(xu, xs, inu, ins)


def separatrix_gap(p: Params, eps: float | None = None) -> float:
    """Signed distance between the separatrices on the left section; zero at the loop."""
    return trace_separatrices(p, eps).gap


def homoclinic_k(a: float, omega: float = 1.0, y_r: float = 4.0, bracket: tuple[float, float] | None = None,
                 tol: float = 1e-6, eps: float | None = None, confirm_eps: bool = False) -> float:
    """Gain at which the cycle collides with the two-fold (homoclinic loop).

    With ``confirm_eps`` the root is recomputed with half the separatrix
    offset and a :class:`HomoclinicError` is raised if the two differ by more
    than ``tol``.
    """

    def gap(k, e=eps):
        return separatrix_gap(Params(a, k, omega, y_r), e)

    if bracket is None:
        if not in_hopf_band(Params(a, 1.0, omega, y_r)):
            raise HomoclinicError(f"a={a} is outside the Hopf band; no homoclinic loop")
        k_h = hopf_gain(a, omega, y_r)
        lo = k_h + 1e-6 * (1.0 + k_h)
        g_lo = gap(lo)
        step = 0.05
        hi = lo + step
        g_hi = gap(hi)
        tries = 0
        while g_hi <= 0:
            tries += 1
            if tries > 10:
                raise HomoclinicError(f"no sign change of the separatrix gap above k_H at a={a}")
            lo, g_lo = hi, g_hi
            step *= 2
            hi = lo + step
            g_hi = gap(hi)
    else:
        lo, hi = bracket
        if lo <= a * y_r:
            raise HomoclinicError("saddle condition violated: bracket must lie above a*y_r")
        g_lo, g_hi = gap(lo), gap(hi)
    if not (g_lo < 0 < g_hi or g_lo > 0 > g_hi):
        raise HomoclinicError(f"separatrix gap has no sign change on [{lo}, {hi}] (a={a})")
    k_hc = brentq(gap, lo, hi, xtol=tol)
    if confirm_eps:
        base_eps = eps if eps is not None else _default_eps(Params(a, k_hc, omega, y_r))
        k_half = brentq(lambda k: gap(k, 0.5 * base_eps), lo, hi, xtol=tol)
        if abs(k_half - k_hc) > tol:
            raise HomoclinicError(f"homoclinic gain depends on the separatrix offset: {k_hc} vs {k_half}")
    return float(k_hc)


def _default_eps(p: Params) -> float:
    pt = two_fold_projection(p)
    return 1e-6 * (1.0 + math.hypot(pt.x, pt.y))


# ------------------------------------------------------------- bifurcation set


def region_label(p: Params, k_hc: float | None) -> int | None:
    """Region 1..6 of the ``(a, k)`` plane; ``None`` on a boundary or if unknown.

    1 pseudo-saddle, 2 unstable node, 3 unstable focus, 4 stable node,
    5 stable focus surrounded by the unstable cycle, 6 stable focus without it.
    """
    kind = q_kind_from_table(p)
    simple = {
        QKind.PSEUDO_SADDLE: 1,
        QKind.UNSTABLE_NODE: 2,
        QKind.UNSTABLE_FOCUS: 3,
        QKind.STABLE_NODE: 4,
    }
    if kind in simple:
        return simple[kind]
    if kind is QKind.BOUNDARY:
        return None
    if not in_hopf_band(p):
        return 6
    if k_hc is None or not math.isfinite(k_hc):
        return None
    if abs(p.k - k_hc) <= 1e-9:
        return None
    return 5 if p.k < k_hc else 6


def classify_region(p: Params, tol: float = 1e-6) -> int | None:
    """Region label, computing the homoclinic gain when it matters."""
    k_hc = None
    if q_kind_from_table(p) is QKind.STABLE_FOCUS and in_hopf_band(p):
        k_hc = homoclinic_k(p.a, p.omega, p.y_r, tol=tol)
    return region_label(p, k_hc)


@dataclass
class BifurcationSet:
    omega: float
    y_r: float
    transcritical: np.ndarray
    hopf: np.ndarray
    k_minus: np.ndarray
    k_plus: np.ndarray
    homoclinic: np.ndarray
    bt_points: list[tuple[float, float]]
    failures: list[dict]
    a_grid: np.ndarray
    k_grid: np.ndarray
    labels: list[list[int | None]]  # labels[i][j] for (a_grid[i], k_grid[j])

    def homoclinic_gain(self, a: float) -> float | None:
        """Linear interpolation of the sampled homoclinic curve."""
        hc = self.homoclinic
        if len(hc) == 0 or not hc[0, 0] <= a <= hc[-1, 0]:
            return None
        return float(np.interp(a, hc[:, 0], hc[:, 1]))

    def region(self, a: float, k: float) -> int | None:
        return region_label(Params(a, k, self.omega, self.y_r), self.homoclinic_gain(a))

    def to_json(self) -> dict:
        def pts(arr):
            return [[float(u), float(v)] for u, v in arr]

        return {
            "omega": self.omega,
            "y_r": self.y_r,
            "curves": {
                "transcritical": pts(self.transcritical),
                "hopf": pts(self.hopf),
                "k_minus": pts(self.k_minus),
                "k_plus": pts(self.k_plus),
                "homoclinic": pts(self.homoclinic),
            },
            "bt_points": [[float(u), float(v)] for u, v in self.bt_points],
            "regions_grid": {
                "a": [float(v) for v in self.a_grid],
                "k": [float(v) for v in self.k_grid],
                "labels": self.labels,
            },
            "failures": self.failures,
        }


def continue_homoclinic(omega: float, y_r: float, a_values, tol: float = 1e-6):
    """Homoclinic gains along ``a_values``, warm-started from the neighbours.

    Continuation starts in the middle of ``a_values`` and walks outwards.
    Returns ``(points, failures)`` with ``points`` sorted by ``a``.
    """
    a_values = list(a_values)
    found: dict[int, float] = {}
    failures = []
    mid = len(a_values) // 2

    def solve(i, history):
        a = a_values[i]
        if len(history) >= 2:
            (a1, k1), (a2, k2) = history[-2], history[-1]
            guess = k2 + (k2 - k1) * (a - a2) / (a2 - a1)
        elif history:
            guess = history[-1][1]
        else:
            return homoclinic_k(a, omega, y_r, tol=tol)
        width = 5 * tol
        floor = max(hopf_gain(a, omega, y_r), a * y_r) + 1e-9
        for _ in range(14):
            lo, hi = max(guess - width, floor), guess + width
            try:
                return homoclinic_k(a, omega, y_r, bracket=(lo, hi), tol=tol)
            except HomoclinicError as exc:
                if "no sign change" not in str(exc):
                    raise
            width *= 4
        return homoclinic_k(a, omega, y_r, tol=tol)

    for order in (range(mid, len(a_values)), range(mid - 1, -1, -1)):
        history: list[tuple[float, float]] = []
        for i in order:
            try:
                k = solve(i, history)
            except (HomoclinicError, ValueError, ParameterError) as exc:
                failures.append({"a": float(a_values[i]), "reason": str(exc)})
                log.info("homoclinic continuation failed at a=%g: %s", a_values[i], exc)
                history = []
                continue
            found[i] = k
            history.append((a_values[i], k))
    pts = np.array([[a_values[i], found[i]] for i in sorted(found)]).reshape(-1, 2)
    failures.sort(key=lambda f: f["a"])
    return pts, failures


def bifurcation_set(omega: float = 1.0, y_r: float = 4.0, a_range: tuple[float, float] | None = None,
                    resolution: int = 200, tol: float = 1e-6, grid_resolution: int = 50,
                    k_range: tuple[float, float] | None = None) -> BifurcationSet:
    """Curves and region labels of the ``(a, k)`` plane.

    The homoclinic curve is continued on ``a- + i*(a+ - a-)/resolution``
    restricted to ``a_range``; analytic curves use the same number of samples
    over ``a_range``.
    """
    bt = bt_loads(omega, y_r)
    if bt is None:
        raise ValueError("y_r >= 2*sqrt(2)/omega is required for the Bogdanov-Takens points")
    a_m, a_p = bt
    if a_range is None:
        a_range = (0.25 * a_m, 0.5 * omega)
    if k_range is None:
        k_range = (0.05, 0.6 * omega * y_r)
    a_lo, a_hi = a_range
    a_lo = max(a_lo, 1e-6)
    a_hi = min(a_hi, 2.0 - 1e-6)

    a_line = np.linspace(a_lo, a_hi, resolution + 1)
    transcritical = np.column_stack([a_line, a_line * y_r])
    band = np.linspace(max(a_lo, a_m), min(a_hi, a_p), resolution + 1)
    hopf = np.column_stack([band, [hopf_gain(a, omega, y_r) for a in band]])
    km, kp = [], []
    for a in a_line:
        roots = node_focus_gains(a, omega, y_r)
        if roots is not None:
            km.append((a, roots[0]))
            kp.append((a, roots[1]))
    k_minus = np.array(km).reshape(-1, 2)
    k_plus = np.array(kp).reshape(-1, 2)

    step = (a_p - a_m) / resolution
    a_cont = [a_m + i * step for i in range(1, resolution) if a_lo <= a_m + i * step <= a_hi]
    homoclinic, failures = continue_homoclinic(omega, y_r, a_cont, tol=tol)

    out = BifurcationSet(
        omega=omega, y_r=y_r, transcritical=transcritical, hopf=hopf, k_minus=k_minus, k_plus=k_plus,
        homoclinic=homoclinic, bt_points=[(a_m, y_r * a_m), (a_p, y_r * a_p)], failures=failures,
        a_grid=np.linspace(a_lo, a_hi, grid_resolution), k_grid=np.linspace(*k_range, grid_resolution),
        labels=[],
    )
    out.labels = [[out.region(float(a), float(k)) for k in out.k_grid] for a in out.a_grid]
    return out


# ------------------------------------------------------------ diagram sweep


@dataclass(frozen=True)
class DiagramRecord:
    k: float
    q_x: float
    q_y: float
    q_kind: str
    pt_x: float
    pt_y: float
    cycle: bool
    cycle_amp_x: float
    cycle_amp_y: float
    cycle_x_min: float
    cycle_x_max: float
    cycle_y_min: float
    cycle_y_max: float


DIAGRAM_COLUMNS = [f.name for f in DiagramRecord.__dataclass_fields__.values()]


def _diagram_record(args) -> DiagramRecord:
    a, k, omega, y_r = args
    p = Params(a, k, omega, y_r)
    q = pseudo_equilibrium(p)
    nan = math.nan
    try:
        tf = two_fold_point(p)
        pt = (tf.x_t, tf.y_t)
    except DegenerateConfiguration:
        pt = (nan, nan)
    try:
        c = find_limit_cycle(p)
        cyc = (True, c.amplitude_x, c.amplitude_y, *c.x_range, *c.y_range)
    except (CycleNotFound, CycleTouchesBoundary):
        cyc = (False, nan, nan, nan, nan, nan, nan)
    return DiagramRecord(k, q.x, q.y, q.kind.value, *pt, *cyc)


def diagram_sweep(a: float, omega: float = 1.0, y_r: float = 4.0, k_range: tuple[float, float] = (1.3, 1.7),
                  resolution: int = 101, jobs: int = 1) -> list[DiagramRecord]:
    """One-parameter sweep in ``k``: pseudo-equilibrium, two-fold and cycle extent."""
    ks = np.linspace(k_range[0], k_range[1], resolution)
    tasks = [(a, float(k), omega, y_r) for k in ks]
    for t in tasks:
        Params(*t)  # validate up front
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_diagram_record, tasks))
    return [_diagram_record(t) for t in tasks]


def write_diagram_csv(records: list[DiagramRecord], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGRAM_COLUMNS)
        for r in records:
            row = []
            for name, v in asdict(r).items():
                if isinstance(v, bool):
                    row.append("1" if v else "0")
                elif isinstance(v, float):
                    row.append(format(v, ".17g"))
                else:
                    row.append(v)
            w.writerow(row)
    return path
