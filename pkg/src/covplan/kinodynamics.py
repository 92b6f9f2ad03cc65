"""Execution-time estimates from closed-form rest-to-rest motion profiles.

The vehicle stops at every turn vertex; each straight run between stops is
flown as one rest-to-rest profile. With unbounded jerk this is the
trapezoidal (or triangular) velocity profile, otherwise the standard
seven-phase jerk-limited S-curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidSpecError
from .geometry import TURN_TOL, Point, dedupe, heading_change


@dataclass(frozen=True)
class MotionLimits:
    v_max: float = 5.0
    a_max: float = 2.5
    j_max: float = math.inf

    def __post_init__(self):
        for name in ("v_max", "a_max", "j_max"):
            v = getattr(self, name)
            if not v > 0 or math.isnan(v):
                raise InvalidSpecError(f"{name} must be strictly positive, got {v}")
        if math.isinf(self.v_max) or math.isinf(self.a_max):
            raise InvalidSpecError("only j_max may be infinite")


@dataclass(frozen=True)
class TimingProfile:
    durations: tuple[float, ...]  # one per rest-to-rest run
    total: float
    stop_vertices: tuple[int, ...]  # indices into the deduplicated polyline
    run_lengths: tuple[float, ...] = ()


@dataclass(frozen=True)
class SCurvePhases:
    """Phase durations of a symmetric rest-to-rest profile."""

    t_jerk: float  # each of the four jerk phases
    t_accel: float  # each of the two constant-acceleration phases
    t_cruise: float
    v_peak: float

    @property
    def total(self) -> float:
        return 4 * self.t_jerk + 2 * self.t_accel + self.t_cruise


def trapezoid_time(d: float, v: float, a: float) -> float:
    """Rest-to-rest time with bounded velocity and acceleration."""
    if d <= 0:
        return 0.0
    if d <= v * v / a:
        return 2.0 * math.sqrt(d / a)
    return d / v + v / a


def scurve_phases(d: float, v: float, a: float, j: float) -> SCurvePhases:
    """Time-optimal symmetric seven-phase profile covering distance ``d``."""
    if d <= 0:
        return SCurvePhases(0.0, 0.0, 0.0, 0.0)
    if math.isinf(j):
        if d <= v * v / a:
            vp = math.sqrt(a * d)
            return SCurvePhases(0.0, vp / a, 0.0, vp)
        return SCurvePhases(0.0, v / a, d / v - v / a, v)

    def ramp(vp):
        # (jerk time, constant-accel time) to reach vp from rest
        if vp * j <= a * a:
            return math.sqrt(vp / j), 0.0
        return a / j, vp / a - a / j

    tj, ta = ramp(v)
    d_ramps = v * (2 * tj + ta)  # accelerate to v and back down
    if d >= d_ramps:
        return SCurvePhases(tj, ta, (d - d_ramps) / v, v)
    # v_max not reached; peak speed solves d = vp * (2 tj + ta)
    vp = (d * math.sqrt(j) / 2.0) ** (2.0 / 3.0)
    if vp * j <= a * a:
        return SCurvePhases(math.sqrt(vp / j), 0.0, 0.0, vp)
    vp = 0.5 * a * (-a / j + math.sqrt((a / j) ** 2 + 4.0 * d / a))
    return SCurvePhases(a / j, vp / a - a / j, 0.0, vp)


def rest_to_rest_time(d: float, limits: MotionLimits) -> float:
    if math.isinf(limits.j_max):
        return trapezoid_time(d, limits.v_max, limits.a_max)
    return scurve_phases(d, limits.v_max, limits.a_max, limits.j_max).total


def time_parameterize(polyline: Sequence[Point], limits: MotionLimits, tol: float = TURN_TOL) -> TimingProfile:
    """Split at turn vertices and time each straight run from rest to rest."""
    pts = dedupe(polyline)
    if len(pts) < 2:
        return TimingProfile((), 0.0, (0,) if pts else (), ())
    stops = [0]
    runs = []
    run = 0.0
    for k in range(1, len(pts)):
        run += math.hypot(pts[k][0] - pts[k - 1][0], pts[k][1] - pts[k - 1][1])
        last = k == len(pts) - 1
        if last or heading_change(pts[k - 1], pts[k], pts[k + 1]) > tol:
            stops.append(k)
            runs.append(run)
            run = 0.0
    durations = tuple(rest_to_rest_time(d, limits) for d in runs)
    return TimingProfile(durations, math.fsum(durations), tuple(stops), tuple(runs))
