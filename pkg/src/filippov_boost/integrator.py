"""Event-driven integration of the nonsmooth converter.

The orbit is a chain of segments.  Off the switching plane the smooth field of
the current half-space is integrated with an adaptive 8(5,3) Runge-Kutta
method and the plane is located as a terminal event.  On the sliding region
the state is pinned to ``z = 0`` and the two-dimensional Filippov field is
integrated, with ``f3+`` and ``f3-`` as exit events.
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .filippov import lie_derivative
from .model import FieldSide, Params, f3_minus, f3_plus

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    FLOW_PLUS = "P"
    FLOW_MINUS = "M"
    SLIDING = "S"


class Event(enum.Enum):
    HIT_SIGMA = "hit-sigma"
    EXIT_SLIDING_AT_S_PLUS = "exit-sliding-at-s-plus"
    EXIT_SLIDING_AT_S_MINUS = "exit-sliding-at-s-minus"
    DOUBLE_TANGENCY = "double-tangency"
    REACHED_TMAX = "reached-tmax"
    CONVERGED_TO_EQUILIBRIUM = "converged-to-equilibrium"


class IntegrationError(RuntimeError):
    """Numerical failure or an inconsistent mode transition."""


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``eq_tol`` is the speed below which a sliding orbit is declared to have
    reached a pseudo-equilibrium.
    """

    t_max: float = 1000.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    event_tol: float = 1e-10
    max_step: float = math.inf
    eq_tol: float = 1e-9
    max_segments: int = 100_000

    def __post_init__(self):
        for name in ("t_max", "rel_tol", "abs_tol", "event_tol", "max_step", "eq_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_segments < 1:
            raise ValueError("max_segments must be >= 1")


@dataclass
class TrajectorySegment:
    mode: Mode
    t: np.ndarray
    states: np.ndarray  # shape (n, 3)
    event: Event

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class Trajectory:
    """Concatenation helper around a list of segments."""

    segments: list[TrajectorySegment] = field(default_factory=list)

    @property
    def t(self) -> np.ndarray:
        return np.concatenate([s.t for s in self.segments])

    @property
    def states(self) -> np.ndarray:
        return np.concatenate([s.states for s in self.segments])

    @property
    def modes(self) -> list[Mode]:
        return [s.mode for s in self.segments for _ in range(len(s.t))]


def _plus_rhs(p: Params):
    a, k, w, yr = p.a, p.k, p.omega, p.y_r

    def rhs(t, s):
        x, y, z = s
        return [1.0 - y, x - a * y, x + (w - a - k) * y - w * z + k - w * yr]

    return rhs


def _minus_rhs(p: Params):
    a, k, w, yr = p.a, p.k, p.omega, p.y_r

    def rhs(t, s):
        x, y, z = s
        return [1.0, -a * y, (w - a) * y - w * z + k - w * yr]

    return rhs


def _sliding_rhs(p: Params):
    a, k, w, yr = p.a, p.k, p.omega, p.y_r

    def rhs(t, s):
        x, y = s
        den = k * y - x  # f3- - f3+ on z = 0, positive on the sliding region
        return [
            (-x + a * y * y - w * y * (y - yr)) / den,
            (k * (x - a * y * y) + w * x * (y - yr)) / den,
        ]

    return rhs


def _l2(side: FieldSide, x: float, y: float, p: Params) -> float:
    return float(lie_derivative(side, 2, (x, y, 0.0), p))


def _mode_on_sigma(x: float, y: float, p: Params, tol: float, came_from: Mode | None):
    """Decide how an orbit sitting on ``z = 0`` continues.

    Returns a :class:`Mode` or ``Event.DOUBLE_TANGENCY``.
    """
    fp = f3_plus(x, y, 0.0, p)
    fm = f3_minus(x, y, 0.0, p)
    zp, zm = abs(fp) <= tol, abs(fm) <= tol
    if zp and zm:
        return Event.DOUBLE_TANGENCY

    if came_from is Mode.FLOW_PLUS and fp > tol:
        raise IntegrationError(
            f"orbit reached z=0 from above with f3+={fp:.3e} > 0 (would enter the escaping region)"
        )
    if came_from is Mode.FLOW_MINUS and fm < -tol:
        raise IntegrationError(
            f"orbit reached z=0 from below with f3-={fm:.3e} < 0 (would enter the escaping region)"
        )

    # Tangencies: L^2 h decides whether the smooth orbit leaves the plane.
    if zp:
        plus_leaves = _l2(FieldSide.PLUS, x, y, p) > 0
        if plus_leaves:
            return Mode.FLOW_PLUS
        fp = -1.0  # invisible fold of f+: behaves as if f+ points down
    if zm:
        minus_leaves = _l2(FieldSide.MINUS, x, y, p) < 0
        if minus_leaves:
            return Mode.FLOW_MINUS
        fm = 1.0

    if fp < 0 < fm:
        return Mode.SLIDING
    if fp > 0 and fm > 0:
        return Mode.FLOW_PLUS
    if fp < 0 and fm < 0:
        return Mode.FLOW_MINUS
    # Escaping region: only reachable as an initial condition.  Forward motion
    # is not unique; pick the upper half-space deterministically.
    if came_from is not None:
        raise IntegrationError("orbit entered the escaping region from off the plane")
    log.warning("initial point (%g, %g) lies on the escaping region; continuing with f+", x, y)
    return Mode.FLOW_PLUS


def _check(sol, what: str):
    if sol.status == -1:
        raise IntegrationError(f"{what} integration failed: {sol.message}")


def _polish_crossing(rhs, hit, t_prev: float, s_prev, t_ev: float, s_ev):
    """Relocate a plane crossing by re-integrating the last step at tight tolerance.

    The event found on the dense output of the main integration is only as
    accurate as ``rel_tol``; the local re-integration brings ``|z|`` at the
    crossing down to roughly 1e-13.
    """
    span = t_ev - t_prev
    sol = solve_ivp(rhs, (t_prev, t_ev + span + 1e-9), np.asarray(s_prev, dtype=float),
                    method="DOP853", rtol=1e-13, atol=1e-15, events=hit)
    if sol.status == 1 and len(sol.t_events[0]):
        return float(sol.t_events[0][-1]), sol.y_events[0][-1].copy()
    return t_ev, s_ev


def _flow(mode: Mode, s0, t0: float, t_end: float, p: Params, cfg: SimConfig):
    rhs = _plus_rhs(p) if mode is Mode.FLOW_PLUS else _minus_rhs(p)

    def hit(t, s):
        return s[2]

    hit.terminal = True
    hit.direction = -1.0 if mode is Mode.FLOW_PLUS else 1.0
    sol = solve_ivp(
        rhs,
        (t0, t_end),
        np.asarray(s0, dtype=float),
        method="DOP853",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        events=hit,
    )
    _check(sol, mode.name)
    t = sol.t
    states = sol.y.T.copy()
    if sol.status == 1:
        t_ev = sol.t_events[0][-1]
        s_ev = sol.y_events[0][-1].copy()
        if len(t) >= 2:
            t_ev, s_ev = _polish_crossing(rhs, hit, t[-2], states[-2], t_ev, s_ev)
        s_ev[2] = 0.0
        t[-1] = t_ev
        states[-1] = s_ev
        return TrajectorySegment(mode, t, states, Event.HIT_SIGMA)
    return TrajectorySegment(mode, t, states, Event.REACHED_TMAX)


def _slide(xy0, t0: float, t_end: float, p: Params, cfg: SimConfig):
    rhs = _sliding_rhs(p)
    a, k, w, yr = p.a, p.k, p.omega, p.y_r

    def exit_plus(t, s):
        return s[0] + (w - a - k) * s[1] + k - w * yr

    exit_plus.terminal = True
    exit_plus.direction = 1.0

    def exit_minus(t, s):
        return (w - a) * s[1] + k - w * yr

    exit_minus.terminal = True
    exit_minus.direction = -1.0

    def settled(t, s):
        return math.hypot(*rhs(t, s)) - cfg.eq_tol

    settled.terminal = True
    settled.direction = -1.0

    if math.hypot(*rhs(t0, xy0)) <= cfg.eq_tol:
        states = np.array([[xy0[0], xy0[1], 0.0]])
        return TrajectorySegment(Mode.SLIDING, np.array([t0]), states, Event.CONVERGED_TO_EQUILIBRIUM)

    sol = solve_ivp(
        rhs,
        (t0, t_end),
        np.asarray(xy0, dtype=float),
        method="DOP853",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        events=(exit_plus, exit_minus, settled),
    )
    _check(sol, "sliding")
    t = sol.t
    states = np.column_stack([sol.y.T, np.zeros(len(t))])
    if sol.status == 0:
        return TrajectorySegment(Mode.SLIDING, t, states, Event.REACHED_TMAX)

    fired = [i for i, te in enumerate(sol.t_events) if len(te)]
    i = min(fired, key=lambda j: sol.t_events[j][-1])
    xy = sol.y_events[i][-1]
    t[-1] = sol.t_events[i][-1]
    states[-1] = (xy[0], xy[1], 0.0)
    if i == 2:
        return TrajectorySegment(Mode.SLIDING, t, states, Event.CONVERGED_TO_EQUILIBRIUM)
    fp = f3_plus(xy[0], xy[1], 0.0, p)
    fm = f3_minus(xy[0], xy[1], 0.0, p)
    if abs(fp) <= cfg.event_tol and abs(fm) <= cfg.event_tol:
        return TrajectorySegment(Mode.SLIDING, t, states, Event.DOUBLE_TANGENCY)
    event = Event.EXIT_SLIDING_AT_S_PLUS if i == 0 else Event.EXIT_SLIDING_AT_S_MINUS
    return TrajectorySegment(Mode.SLIDING, t, states, event)


def simulate(s0, p: Params, cfg: SimConfig | None = None) -> list[TrajectorySegment]:
    """Integrate the Filippov system from ``s0`` up to ``cfg.t_max``.

    Parameters
    ----------
    s0 : sequence of 3 floats
        Initial state ``(x, y, z)``.
    p : Params
    cfg : SimConfig, optional

    Returns
    -------
    list of TrajectorySegment
        Consecutive segments; the last one carries the terminal event
        (``REACHED_TMAX``, ``CONVERGED_TO_EQUILIBRIUM`` or ``DOUBLE_TANGENCY``).

    Raises
    ------
    IntegrationError
        On step-size failure, on an impossible entry into the escaping region,
        or when ``cfg.max_segments`` is exceeded.
    """
    cfg = cfg or SimConfig()
    s = np.asarray(s0, dtype=float).copy()
    if s.shape != (3,):
        raise ValueError("initial state must have three components")
    t = 0.0
    came_from: Mode | None = None

    if abs(s[2]) <= cfg.event_tol:
        s[2] = 0.0
        mode = _mode_on_sigma(s[0], s[1], p, cfg.event_tol, None)
        if mode is Event.DOUBLE_TANGENCY:
            return [TrajectorySegment(Mode.SLIDING, np.array([t]), s[None, :], Event.DOUBLE_TANGENCY)]
    else:
        mode = Mode.FLOW_PLUS if s[2] > 0 else Mode.FLOW_MINUS

    segments: list[TrajectorySegment] = []
    while True:
        if len(segments) >= cfg.max_segments:
            raise IntegrationError(f"exceeded {cfg.max_segments} segments at t={t:g}")
        if mode is Mode.SLIDING:
            seg = _slide(s[:2], t, cfg.t_max, p, cfg)
        else:
            seg = _flow(mode, s, t, cfg.t_max, p, cfg)
        segments.append(seg)
        log.debug("segment %s ended at t=%.6g with %s", seg.mode.value, seg.t[-1], seg.event.value)
        t = float(seg.t[-1])
        s = seg.end.copy()
        if seg.event in (Event.REACHED_TMAX, Event.CONVERGED_TO_EQUILIBRIUM, Event.DOUBLE_TANGENCY):
            return segments
        if t >= cfg.t_max:
            seg.event = Event.REACHED_TMAX
            return segments

        if seg.event is Event.EXIT_SLIDING_AT_S_PLUS:
            mode = Mode.FLOW_PLUS
        elif seg.event is Event.EXIT_SLIDING_AT_S_MINUS:
            mode = Mode.FLOW_MINUS
        else:
            came_from = seg.mode
            nxt = _mode_on_sigma(s[0], s[1], p, cfg.event_tol, came_from)
            if nxt is Event.DOUBLE_TANGENCY:
                segments.append(
                    TrajectorySegment(Mode.SLIDING, np.array([t]), s[None, :].copy(), Event.DOUBLE_TANGENCY)
                )
                return segments
            mode = nxt


def write_trajectory_csv(segments: list[TrajectorySegment], path) -> Path:
    """Write ``tau,x,y,z,mode`` rows with round-trip exact (17 digit) numbers."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "x", "y", "z", "mode"])
        for seg in segments:
            for tau, st in zip(seg.t, seg.states):
                w.writerow([format(float(tau), ".17g")] + [format(float(v), ".17g") for v in st] + [seg.mode.value])
    return path


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["tau"]) for r in rows])
    states = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
    return t, states, [r["mode"] for r in rows]
