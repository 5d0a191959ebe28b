"""Tangency lines, cusp, two-fold point and pseudo-equilibrium of the converter.

All locations and stability quantities are closed forms in the parameters;
the numerical cross-checks (Lie-derivative signs, eigenvalues of
finite-difference Jacobians) live next to them as independent classifiers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .filippov import SigmaPoint, lie_derivative, planar_sliding_field
from .model import FieldSide, Params

BOUNDARY_TOL = 1e-9


class DegenerateConfiguration(ValueError):
    """A closed form is undefined for the given parameters."""


class TwoFoldKind(enum.Enum):
    # first word: visibility for f-, second word: for f+
    VISIBLE_INVISIBLE = "visible-invisible"
    VISIBLE_VISIBLE = "visible-visible"
    INVISIBLE_INVISIBLE = "invisible-invisible"
    INVISIBLE_VISIBLE = "invisible-visible"
    FOLD_INVISIBLE_CUSP = "fold invisible-cusp"
    FOLD_VISIBLE_CUSP = "fold visible-cusp"


class QKind(enum.Enum):
    PSEUDO_SADDLE = "pseudo-saddle"
    STABLE_NODE = "stable pseudo-node"
    UNSTABLE_NODE = "unstable pseudo-node"
    STABLE_FOCUS = "stable pseudo-focus"
    UNSTABLE_FOCUS = "unstable pseudo-focus"
    BOUNDARY = "boundary"


class QRegion(enum.Enum):
    SLIDING = "sliding"
    ESCAPING = "escaping"
    ON_TANGENCY = "on-tangency"


@dataclass(frozen=True)
class TangencyLines:
    """``S+ : x = plus_slope*y + plus_offset``; ``S- : y = minus_y`` (None when a == omega)."""

    plus_slope: float
    plus_offset: float
    minus_y: float | None

    def s_plus_x(self, y):
        return self.plus_slope * np.asarray(y, dtype=float) + self.plus_offset


@dataclass(frozen=True)
class CuspPoint:
    x_c: float
    y_c: float


@dataclass(frozen=True)
class TwoFoldPoint:
    x_t: float
    y_t: float
    kind: TwoFoldKind
    feasible: bool  # x_t > 0; outside that quadrant the kind comes from Lie-derivative signs


@dataclass(frozen=True)
class StabilityQuantities:
    det: float
    tr: float
    delta: float
    k_H: float
    k_minus: float | None
    k_plus: float | None
    a_minus: float | None
    a_plus: float | None


@dataclass(frozen=True)
class PseudoEquilibrium:
    x: float
    y: float
    region: QRegion
    kind: QKind
    quantities: StabilityQuantities

    @property
    def location(self) -> tuple[float, float, float]:
        return (self.x, self.y, 0.0)


def tangency_lines(p: Params) -> TangencyLines:
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    minus_y = None if a == w else (k - w * yr) / (a - w)
    return TangencyLines(a + k - w, -k + w * yr, minus_y)


def cusp_point(p: Params) -> CuspPoint:
    """Cusp of ``f+`` on ``S+``; folds are visible below it and invisible above."""
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    den = (a + k - w) * (k - w) + 1.0
    if den == 0:
        raise DegenerateConfiguration("cusp point undefined: (a+k-w)(k-w)+1 == 0")
    y_c = ((a + k - w) * (k - w * yr) + 1.0) / den
    x_c = (w * (yr - 1.0) + a * (1.0 + (a + k - w) * (k - w * yr))) / den
    return CuspPoint(x_c, y_c)


def a_c(k: float, p: Params) -> float:
    """Load value at which the two-fold becomes a fold-cusp, for gain ``k``."""
    w, yr = p.omega, p.y_r
    d = k - w * yr
    if d == 0:
        raise DegenerateConfiguration("a_c undefined at k == omega*y_r")
    rad = 1.0 + d * (2.0 * w + (4.0 + (w - 2.0 * k) ** 2) * d)
    if rad < 0:
        raise DegenerateConfiguration(f"a_c radicand is negative ({rad})")
    return (-1.0 + w * d + math.sqrt(rad)) / (2.0 * d)


def _two_fold_location(p: Params) -> tuple[float, float]:
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    if a == w:
        raise DegenerateConfiguration("two-fold undefined at a == omega (S- does not exist)")
    if k == w * yr:
        raise DegenerateConfiguration("two-fold degenerate at k == omega*y_r")
    y_t = (k - w * yr) / (a - w)
    return k * y_t, y_t


def two_fold_kind_from_table(p: Params, tol: float = BOUNDARY_TOL) -> TwoFoldKind | None:
    """Kind of the two-fold from the parameter inequalities alone.

    Returns ``None`` outside the quadrants where the two-fold has ``x_t > 0``
    (``a < omega, k < omega*y_r`` or ``a > omega, k > omega*y_r``).
    """
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    if abs(k - w * yr) <= tol or abs(a - w) <= tol:
        raise DegenerateConfiguration("two-fold degenerate (a == omega or k == omega*y_r)")
    ac = a_c(k, p)
    below = k < w * yr
    if abs(a - ac) <= tol:
        return TwoFoldKind.FOLD_VISIBLE_CUSP if below else TwoFoldKind.FOLD_INVISIBLE_CUSP
    if below:
        if a >= w:
            return None
        return TwoFoldKind.VISIBLE_INVISIBLE if a > ac else TwoFoldKind.VISIBLE_VISIBLE
    if a <= w:
        return None
    return TwoFoldKind.INVISIBLE_INVISIBLE if a < ac else TwoFoldKind.INVISIBLE_VISIBLE


def two_fold_kind_from_lie(p: Params, tol: float = BOUNDARY_TOL) -> TwoFoldKind:
    """Kind of the two-fold from the signs of the second Lie derivatives there.

    A fold of ``f+`` is visible when ``L^2 h > 0`` (the orbit bends back into
    ``z > 0``); a fold of ``f-`` is visible when ``L^2 h < 0``.
    """
    x_t, y_t = _two_fold_location(p)
    s = (x_t, y_t, 0.0)
    l2p = float(lie_derivative(FieldSide.PLUS, 2, s, p))
    l2m = float(lie_derivative(FieldSide.MINUS, 2, s, p))
    minus_visible = l2m < 0
    if abs(l2p) <= tol:
        return TwoFoldKind.FOLD_VISIBLE_CUSP if minus_visible else TwoFoldKind.FOLD_INVISIBLE_CUSP
    plus_visible = l2p > 0
    return {
        (True, False): TwoFoldKind.VISIBLE_INVISIBLE,
        (True, True): TwoFoldKind.VISIBLE_VISIBLE,
        (False, False): TwoFoldKind.INVISIBLE_INVISIBLE,
        (False, True): TwoFoldKind.INVISIBLE_VISIBLE,
    }[(minus_visible, plus_visible)]


def two_fold_point(p: Params) -> TwoFoldPoint:
    x_t, y_t = _two_fold_location(p)
    kind = two_fold_kind_from_table(p)
    feasible = kind is not None
    if kind is None:
        kind = two_fold_kind_from_lie(p)
    return TwoFoldPoint(x_t, y_t, kind, feasible)


def hopf_gain(a: float, omega: float, y_r: float) -> float:
    """Gain at which the trace of the Jacobian at the pseudo-equilibrium vanishes."""
    return (a * omega * y_r**2 - 1.0) / (2.0 * a * y_r)


def node_focus_gains(a: float, omega: float, y_r: float) -> tuple[float, float] | None:
    """Roots ``(k-, k+)`` of the discriminant in ``k``; ``None`` when ``a > omega/2``."""
    rad = omega * (1.0 + 2.0 * a**2 * y_r**2) * (omega - 2.0 * a)
    if rad < 0:
        return None
    k_h = hopf_gain(a, omega, y_r)
    root = math.sqrt(rad)
    den = 2.0 * a**2 * y_r
    return k_h + (omega - root) / den, k_h + (omega + root) / den


def bt_loads(omega: float, y_r: float) -> tuple[float, float] | None:
    """Loads ``(a-, a+)`` of the two Bogdanov-Takens points, if ``y_r >= 2*sqrt(2)/omega``."""
    rad = omega**2 * y_r**2 - 8.0
    if rad < 0:
        return None
    root = math.sqrt(rad)
    return (omega * y_r - root) / (4.0 * y_r), (omega * y_r + root) / (4.0 * y_r)


def stability_quantities(p: Params) -> StabilityQuantities:
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    det = w * yr * (k - a * yr)
    tr = -1.0 + a * yr * (w * yr - 2.0 * k)
    kmp = node_focus_gains(a, w, yr)
    amp = bt_loads(w, yr)
    return StabilityQuantities(
        det=det,
        tr=tr,
        delta=tr * tr - 4.0 * det,
        k_H=hopf_gain(a, w, yr),
        k_minus=kmp[0] if kmp else None,
        k_plus=kmp[1] if kmp else None,
        a_minus=amp[0] if amp else None,
        a_plus=amp[1] if amp else None,
    )


def in_hopf_band(p: Params) -> bool:
    amp = bt_loads(p.omega, p.y_r)
    return amp is not None and amp[0] < p.a < amp[1]


def q_kind_from_table(p: Params, tol: float = BOUNDARY_TOL) -> QKind:
    """Type of the pseudo-equilibrium from the closed-form parameter conditions.

    Parameter points within ``tol`` of a boundary curve get ``QKind.BOUNDARY``.
    """
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    q = stability_quantities(p)
    near = [k - a * yr]
    if q.a_minus is not None:
        near += [a - q.a_minus, a - q.a_plus]
    if q.k_minus is not None:
        near += [k - q.k_minus, k - q.k_plus]
    if in_hopf_band(p):
        near.append(k - q.k_H)
    if any(abs(d) <= tol for d in near):
        return QKind.BOUNDARY

    if k < a * yr:
        return QKind.PSEUDO_SADDLE
    if a >= w / 2 or q.k_minus is None:
        return QKind.STABLE_NODE
    hopf_band = in_hopf_band(p)
    if k > q.k_plus:
        return QKind.STABLE_NODE
    if k < q.k_minus:
        return QKind.UNSTABLE_NODE if hopf_band else QKind.STABLE_NODE
    if hopf_band:
        return QKind.STABLE_FOCUS if k > q.k_H else QKind.UNSTABLE_FOCUS
    return QKind.STABLE_FOCUS


def finite_difference_jacobian(fun, pt, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a planar field ``fun((x, y)) -> (2,)``."""
    pt = np.asarray(pt, dtype=float)
    jac = np.empty((2, 2))
    for j in range(2):
        step = h * (1.0 + abs(pt[j]))
        e = np.zeros(2)
        e[j] = step
        jac[:, j] = (np.asarray(fun(pt + e)) - np.asarray(fun(pt - e))) / (2.0 * step)
    return jac


def classify_by_eigenvalues(jac: np.ndarray) -> QKind:
    ev = np.linalg.eigvals(jac)
    if np.linalg.det(jac) < 0:
        return QKind.PSEUDO_SADDLE
    stable = bool(np.all(ev.real < 0))
    if np.any(np.abs(ev.imag) > 0):
        return QKind.STABLE_FOCUS if stable else QKind.UNSTABLE_FOCUS
    return QKind.STABLE_NODE if stable else QKind.UNSTABLE_NODE


def q_kind_from_eigenvalues(p: Params) -> QKind:
    """Type of the pseudo-equilibrium from a finite-difference Jacobian.

    On the escaping region the normalized field is reversed, as is its
    Jacobian.
    """
    q = (p.a * p.y_r**2, p.y_r)
    jac = finite_difference_jacobian(lambda v: planar_sliding_field(v, p), q)
    if p.k < p.a * p.y_r:
        jac = -jac
    return classify_by_eigenvalues(jac)


def pseudo_equilibrium(p: Params, tol: float = BOUNDARY_TOL) -> PseudoEquilibrium:
    """Operating point ``(a*y_r**2, y_r, 0)`` with its region and closed-form type label."""
    a, k, yr = p.a, p.k, p.y_r
    margin = k - a * yr
    if abs(margin) <= tol:
        region = QRegion.ON_TANGENCY
    elif margin > 0:
        region = QRegion.SLIDING
    else:
        region = QRegion.ESCAPING
    return PseudoEquilibrium(a * yr**2, yr, region, q_kind_from_table(p, tol), stability_quantities(p))


def jacobian_planar(pt, p: Params) -> np.ndarray:
    """Exact Jacobian of the planar normalized sliding field."""
    x, y = pt
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    return np.array(
        [
            [-1.0, 2.0 * a * y - w * (2.0 * y - yr)],
            [k + w * (y - yr), -2.0 * k * a * y + w * x],
        ]
    )


def two_fold_projection(p: Params) -> SigmaPoint:
    x_t, y_t = _two_fold_location(p)
    return SigmaPoint(x_t, y_t)


def saddle_determinant(p: Params) -> float:
    """Determinant of the planar Jacobian at the two-fold projection, in closed form."""
    _, y_t = _two_fold_location(p)
    return -p.omega * (p.k - p.a * p.y_r) * y_t


def loop_trace(p: Params) -> float:
    """Trace at the two-fold projection; nonzero means a simple homoclinic loop."""
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    return k * (2.0 * a - w) * (w * yr - k) / (a - w) - 1.0
