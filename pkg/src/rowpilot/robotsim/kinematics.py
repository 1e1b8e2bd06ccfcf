"""Differential-drive kinematics with exact arc integration."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

# Below this yaw rate (rad/s) the arc radius exceeds ~1 km for our speeds and
# the straight-line limit is numerically safer than dividing by omega.
_OMEGA_EPS = 1e-9


@dataclass(frozen=True)
class RobotState:
    """Pose and drive geometry of the tracked platform.

    `heading_rad` is measured counterclockwise from the +x axis; forward motion
    moves the robot along (cos heading, sin heading). `track_width_m` is the
    lateral distance between the two track centerlines and sets how a speed
    differential maps to yaw rate.
    """

    x: float = 0.0
    y: float = 0.0
    heading_rad: float = math.pi / 2
    speed_mps: float = 0.14
    track_width_m: float = 0.10

    def forward(self) -> tuple[float, float]:
        return math.cos(self.heading_rad), math.sin(self.heading_rad)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def step_kinematics(s: RobotState, cmd: tuple[float, float], dt: float) -> RobotState:
    """Advance one tick under track speeds cmd = (v_left, v_right).

    Integrates the exact circular arc rather than the Euler tangent, so a
    constant command traces the same circle regardless of step size: equal
    speeds go straight, opposite speeds spin in place, anything else follows
    an arc of radius v/omega.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    vl, vr = cmd
    v = 0.5 * (vl + vr)
    omega = (vr - vl) / s.track_width_m
    th0 = s.heading_rad
    if abs(omega) < _OMEGA_EPS:
        x = s.x + v * math.cos(th0) * dt
        y = s.y + v * math.sin(th0) * dt
        th1 = th0
    else:
        th1 = th0 + omega * dt
        r = v / omega
        x = s.x + r * (math.sin(th1) - math.sin(th0))
        y = s.y - r * (math.cos(th1) - math.cos(th0))
    return replace(s, x=x, y=y, heading_rad=wrap_angle(th1))


def arc_endpoint(s: RobotState, cmd: tuple[float, float], t: float) -> tuple[float, float, float]:
    """Closed-form pose after driving a constant command for time t.

    Returns (x, y, heading). Same math as one big `step_kinematics` step; kept
    separate so tests can compare many small steps against a single evaluation.
    """
    end = step_kinematics(s, cmd, t)
    return end.x, end.y, end.heading_rad
