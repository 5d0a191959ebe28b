"""Dimensionless boost converter with sliding-mode control and a washout filter.

The converter is written in the normalized variables

    x  -- inductor current,
    y  -- output (capacitor) voltage,
    z  -- switching coordinate built from the washout-filtered current,

and the switch position ``u`` is 1 above the switching plane ``z = 0`` and 0
below it.  Everything downstream (Filippov convention, singularities,
bifurcations) is driven by the four numbers held in :class:`Params`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np


class ParameterError(ValueError):
    """Raised when a parameter set violates its admissible ranges."""


@dataclass(frozen=True)
class PhysicalParams:
    """Circuit values of the converter (SI units)."""

    V_in: float
    V_ref: float
    R: float
    L: float
    C: float
    omega_F: float
    K: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{f.name} must be finite and > 0, got {value!r}")
        if self.V_ref <= self.V_in:
            raise ParameterError(
                f"V_ref must exceed V_in for a boost converter ({self.V_ref} <= {self.V_in})"
            )


@dataclass(frozen=True)
class Params:
    """Dimensionless parameters.

    Attributes
    ----------
    a : float
        Load, ``sqrt(L/C) / R``; admissible range ``0 < a < 2``.
    k : float
        Control gain, ``K sqrt(C/L)``; ``k > 0``.
    omega : float
        Washout cut-off, ``omega_F sqrt(LC)``; ``0 < omega <= 1``.
    y_r : float
        Voltage reference ratio ``V_ref / V_in``; ``y_r > 1``.
    """

    a: float
    k: float
    omega: float = 1.0
    y_r: float = 4.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ParameterError(f"{f.name} must be finite, got {value!r}")
        if not 0 < self.omega <= 1:
            raise ParameterError(f"omega must lie in (0, 1], got {self.omega}")
        if not self.y_r > 1:
            raise ParameterError(f"y_r must be > 1, got {self.y_r}")
        if not self.k > 0:
            raise ParameterError(f"k must be > 0, got {self.k}")
        if not 0 < self.a < 2:
            raise ParameterError(f"a must lie in (0, 2), got {self.a}")

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)


class State(NamedTuple):
    x: float
    y: float
    z: float


class FieldSide(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def _xyz(s):
    s = np.asarray(s, dtype=float)
    return s[0], s[1], s[2]


def f3_plus(x, y, z, p: Params):
    """Third component of the field used above the switching plane."""
    return x + (p.omega - p.a - p.k) * y - p.omega * z + p.k - p.omega * p.y_r


def f3_minus(x, y, z, p: Params):
    """Third component of the field used below the switching plane."""
    return (p.omega - p.a) * y - p.omega * z + p.k - p.omega * p.y_r


def f_plus(s, p: Params) -> np.ndarray:
    """Vector field with the switch on (``u = 1``).

    ``s`` may be a single state or an array of shape ``(3, ...)``.
    """
    x, y, z = _xyz(s)
    return np.array([1.0 - y + 0.0 * x, x - p.a * y, f3_plus(x, y, z, p)])


def f_minus(s, p: Params) -> np.ndarray:
    """Vector field with the switch off (``u = 0``)."""
    x, y, z = _xyz(s)
    return np.array([1.0 + 0.0 * x, -p.a * y + 0.0 * x, f3_minus(x, y, z, p)])


def field(side: FieldSide, s, p: Params) -> np.ndarray:
    return f_plus(s, p) if side is FieldSide.PLUS else f_minus(s, p)


def control_u(z: float) -> float:
    """Switch position ``(1 + sign z) / 2``; the value on the plane itself is 1/2."""
    return 0.5 * (1.0 + float(np.sign(z)))


def full_model(s, p: Params, u: float) -> np.ndarray:
    """Right-hand side of the converter for an arbitrary switch value ``u``."""
    x, y, z = _xyz(s)
    return np.array(
        [
            1.0 - u * y,
            u * x - p.a * y,
            u * (x - p.k * y) + (p.omega - p.a) * y - p.omega * z + p.k - p.omega * p.y_r,
        ]
    )


def normalize(pp: PhysicalParams) -> Params:
    """Map circuit values onto the dimensionless parameters."""
    r = math.sqrt(pp.L / pp.C)
    return Params(
        a=r / pp.R,
        k=pp.K / r,
        omega=pp.omega_F * math.sqrt(pp.L * pp.C),
        y_r=pp.V_ref / pp.V_in,
    )


def denormalize(p: Params, V_in: float, L: float, C: float) -> PhysicalParams:
    """Inverse of :func:`normalize` given the three scales it eliminates."""
    r = math.sqrt(L / C)
    return PhysicalParams(
        V_in=V_in,
        V_ref=p.y_r * V_in,
        R=r / p.a,
        L=L,
        C=C,
        omega_F=p.omega / math.sqrt(L * C),
        K=p.k * r,
    )


def time_scale(pp: PhysicalParams) -> float:
    """Seconds per unit of dimensionless time."""
    return math.sqrt(pp.C * pp.L)


def to_physical_state(s, pp: PhysicalParams) -> tuple[float, float, float]:
    """Return ``(i_L, v_C, z_F)`` for a dimensionless state."""
    x, y, z = _xyz(s)
    i_L = pp.V_in * math.sqrt(pp.C / pp.L) * x
    v_C = pp.V_in * y
    z_F = i_L + (v_C - pp.V_ref - pp.V_in * z) / pp.K
    return float(i_L), float(v_C), float(z_F)


def to_dimensionless_state(i_L: float, v_C: float, z_F: float, pp: PhysicalParams) -> State:
    x = i_L / (pp.V_in * math.sqrt(pp.C / pp.L))
    y = v_C / pp.V_in
    z = (v_C - pp.V_ref - pp.K * (z_F - i_L)) / pp.V_in
    return State(x, y, z)


def physical_rhs(i_L: float, v_C: float, z_F: float, pp: PhysicalParams, u: float):
    """Circuit equations in SI units (used to cross-check the normalization)."""
    return (
        (pp.V_in - u * v_C) / pp.L,
        (u * i_L - v_C / pp.R) / pp.C,
        pp.omega_F * (i_L - z_F),
    )
