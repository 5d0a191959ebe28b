"""Filippov convention on the switching plane ``z = 0``.

Points of the plane are classified by the signs of the normal components
``f3+`` and ``f3-``; on the sliding region the motion follows the convex
combination of the two fields that is tangent to the plane.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from .model import FieldSide, Params, f3_minus, f3_plus, f_minus, f_plus


class RegionKind(enum.Enum):
    CROSSING_UP = "crossing-up"
    CROSSING_DOWN = "crossing-down"
    SLIDING = "sliding"
    ESCAPING = "escaping"
    TANGENCY_PLUS = "tangency-plus"
    TANGENCY_MINUS = "tangency-minus"
    DOUBLE_TANGENCY = "double-tangency"


class SigmaPoint(NamedTuple):
    """A point ``(x, y, 0)`` of the switching plane."""

    x: float
    y: float


class SlidingFieldUndefined(ValueError):
    """The convex combination degenerates (``f3- == f3+``, i.e. ``x == k y``)."""


def default_tol(x, y) -> float:
    return 1e-9 * (1.0 + float(np.hypot(x, y)))


def lie_derivative(side: FieldSide, order: int, s, p: Params):
    """``L^m h`` of ``h(x, y, z) = z`` along ``f+`` or ``f-``, for ``m`` in 1..3.

    Closed forms obtained by differentiating the model by hand; arrays of
    states of shape ``(3, ...)`` are accepted.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order!r}")
    s = np.asarray(s, dtype=float)
    x, y, z = s[0], s[1], s[2]
    a, k, w = p.a, p.k, p.omega
    if side is FieldSide.PLUS:
        l1 = f3_plus(x, y, z, p)
        if order == 1:
            return l1
        c = w - a - k
        if order == 2:
            return (1.0 - y) + c * (x - a * y) - w * l1
        return (c - w) * (1.0 - y) - (1.0 + (a + w) * c) * (x - a * y) + w * w * l1
    l1 = f3_minus(x, y, z, p)
    if order == 1:
        return l1
    if order == 2:
        return -a * (w - a) * y - w * l1
    return a * (w - a) * (w + a) * y + w * w * l1


def classify_sigma_point(pt, p: Params, tol: float | None = None) -> RegionKind:
    x, y = pt
    if tol is None:
        tol = default_tol(x, y)
    if tol <= 0:
        raise ValueError("tol must be positive")
    fp = f3_plus(x, y, 0.0, p)
    fm = f3_minus(x, y, 0.0, p)
    zp, zm = abs(fp) <= tol, abs(fm) <= tol
    if zp and zm:
        return RegionKind.DOUBLE_TANGENCY
    if zp:
        return RegionKind.TANGENCY_PLUS
    if zm:
        return RegionKind.TANGENCY_MINUS
    if fp > 0 and fm > 0:
        return RegionKind.CROSSING_UP
    if fp < 0 and fm < 0:
        return RegionKind.CROSSING_DOWN
    if fp < 0 < fm:
        return RegionKind.SLIDING
    return RegionKind.ESCAPING


def sliding_field_3d(pt, p: Params, tol: float = 1e-13) -> np.ndarray:
    """Filippov sliding field built from the convex combination of ``f+`` and ``f-``.

    Works for arrays of points too (``pt`` of shape ``(2, ...)``).  Raises
    :class:`SlidingFieldUndefined` where ``f3- - f3+`` vanishes.
    """
    x, y = np.asarray(pt[0], dtype=float), np.asarray(pt[1], dtype=float)
    s = np.array([x, y, np.zeros_like(x)])
    fp, fm = f_plus(s, p), f_minus(s, p)
    den = fm[2] - fp[2]
    scale = tol * (1.0 + np.abs(x) + p.k * np.abs(y))
    if np.any(np.abs(den) <= scale):
        raise SlidingFieldUndefined(
            "sliding field undefined where f3- == f3+ (double tangency / x == k*y)"
        )
    return np.array(
        [
            (fp[0] * fm[2] - fm[0] * fp[2]) / den,
            (fp[1] * fm[2] - fm[1] * fp[2]) / den,
            np.zeros_like(den),
        ]
    )


def sliding_field_closed_form(pt, p: Params) -> np.ndarray:
    """Simplified rational form of the sliding field on ``z = 0``."""
    x, y = np.asarray(pt[0], dtype=float), np.asarray(pt[1], dtype=float)
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    den = x - k * y
    return np.array(
        [
            (x - a * y**2 + w * y * (y - yr)) / den,
            (-k * (x - a * y**2) - w * x * (y - yr)) / den,
            np.zeros_like(den),
        ]
    )


def planar_sliding_field(pt, p: Params) -> np.ndarray:
    """Polynomial (normalized) sliding field on the plane.

    Equals ``(f3- - f3+)`` times the first two components of the sliding
    field, so it has the same orbits and orientation on the sliding region and
    extends smoothly to the whole plane.
    """
    x, y = np.asarray(pt[0], dtype=float), np.asarray(pt[1], dtype=float)
    a, k, w, yr = p.a, p.k, p.omega, p.y_r
    return np.array(
        [
            -x + a * y**2 - w * y * (y - yr),
            k * (x - a * y**2) + w * x * (y - yr),
        ]
    )


def planar_sliding_field_generic(pt, p: Params) -> np.ndarray:
    """``(f1+ f3- - f1- f3+, f2+ f3- - f2- f3+)`` evaluated from the two fields directly."""
    x, y = np.asarray(pt[0], dtype=float), np.asarray(pt[1], dtype=float)
    s = np.array([x, y, np.zeros_like(x)])
    fp, fm = f_plus(s, p), f_minus(s, p)
    return np.array([fp[0] * fm[2] - fm[0] * fp[2], fp[1] * fm[2] - fm[1] * fp[2]])


def escaping_field(pt, p: Params) -> np.ndarray:
    """Normalized field on the escaping region (reversed planar sliding field)."""
    return -planar_sliding_field(pt, p)
