"""Mission phase machine: boustrophedon row coverage, return, dock, charge.

The mission logic only sees what the real robot would: camera-derived
bearings, the gyro heading estimate, odometry, battery voltage and the bumper
switch. `RobotState` is passed in solely for drive geometry (track width);
nothing here reads the true pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .control import PidGains, PidState, pid_heading, pid_reset
from .kinematics import RobotState, wrap_angle

ROW_FOLLOW = "ROW_FOLLOW"
TURN_A = "TURN_A"
NEXT_ROW_ENTRY = "NEXT_ROW_ENTRY"
TURN_B = "TURN_B"
RETURN_HOME = "RETURN_HOME"
DOCK_ALIGN = "DOCK_ALIGN"
RAMP = "RAMP"
CHARGING = "CHARGING"
DONE = "DONE"

PHASES = (
    ROW_FOLLOW,
    TURN_A,
    NEXT_ROW_ENTRY,
    TURN_B,
    RETURN_HOME,
    DOCK_ALIGN,
    RAMP,
    CHARGING,
    DONE,
)

_ALLOWED = {
    ROW_FOLLOW: {TURN_A, RETURN_HOME, DONE},
    TURN_A: {NEXT_ROW_ENTRY},
    NEXT_ROW_ENTRY: {TURN_B},
    TURN_B: {ROW_FOLLOW},
    RETURN_HOME: {DOCK_ALIGN},
    DOCK_ALIGN: {RAMP},
    RAMP: {CHARGING, DONE},
    CHARGING: {DONE},
    DONE: set(),
}


def allowed_transitions() -> dict:
    """Copy of the legal phase graph, for tests and documentation."""
    return {k: set(v) for k, v in _ALLOWED.items()}


@dataclass(frozen=True)
class MissionPlan:
    """Static mission parameters, frozen for the whole episode."""

    n_aisles: int = 5
    aisle_width_m: float = 0.24
    headland_m: float = 0.45
    row_end_threshold: float = 2300.0
    arm_factor: float = 1.5
    # Row-entry guard: hold the turn-out heading for a short blind run, then
    # only steer on frames whose green area looks like the in-corridor view.
    # From the headland the camera sees across several rows and the area
    # inflates well past 10k; straddling a row deflates it. Steering on those
    # frames can capture the wrong aisle, so they are ignored.
    entry_blind_m: float = 0.3
    steer_area_lo: float = 3000.0
    steer_area_hi: float = 9800.0
    turn_rate_rps: float = 0.7
    turn_tol_rad: float = math.radians(2.5)
    ramp_enter_m: float = 0.35
    speed_normal_mps: float = 0.14
    speed_low_mps: float = 0.09
    dock_enabled: bool = False
    gains: PidGains = PidGains()


@dataclass(frozen=True)
class Percepts:
    """Everything the mission layer is allowed to know this tick.

    Vision fields hold the last processed frame's values between frames;
    `fresh_vision` marks the ticks where they were just recomputed. Bearings
    are pinhole angles (rad), positive to the robot's right.
    """

    t: float
    odo_m: float
    imu_heading: float
    battery_v: float
    battery_low: bool
    fresh_vision: bool = False
    bearing_rad: Optional[float] = None
    deviation_deg: Optional[float] = None
    green_smoothed: Optional[float] = None
    row_end: bool = False
    dock_bearing_rad: Optional[float] = None
    dock_distance_m: Optional[float] = None
    home_bearing_rad: Optional[float] = None
    home_dist_m: Optional[float] = None
    home_done: bool = False
    contact: bool = False
    captured: bool = False


@dataclass(frozen=True)
class MissionState:
    """Mission memory between ticks.

    Turn targets come from an absolute 90-degree ladder in the gyro frame:
    `base_heading` is the estimate at mission start and `quarter` counts the
    quarter-turns taken since. Because the ladder lives entirely in the
    estimate frame, any drift the gyro accumulates rotates every later turn
    by the same amount in the real world; vision re-anchors the robot inside
    a row, but the turns themselves inherit the estimate's error.
    """

    plan: MissionPlan = field(default_factory=MissionPlan)
    phase: str = ROW_FOLLOW
    aisle: int = 0
    outbound: bool = True
    turn_dir: int = -1
    stage: int = 0
    heading_ref: float = math.pi / 2
    base_heading: float = math.pi / 2
    quarter: int = 0
    phase_odo: float = 0.0
    armed: bool = False
    pid: PidState = PidState()
    done_reason: str = ""

    def ladder_target(self, quarter: int) -> float:
        return wrap_angle(self.base_heading + quarter * math.pi / 2)

    @staticmethod
    def dock_trial(plan: MissionPlan, heading_ref: float) -> "MissionState":
        """Start state for a standalone docking approach (no row work)."""
        return MissionState(
            plan=plan, phase=DOCK_ALIGN, heading_ref=heading_ref, base_heading=heading_ref
        )


def _goto(m: MissionState, phase: str, odo: float, **kw) -> MissionState:
    if phase not in _ALLOWED[m.phase]:
        raise RuntimeError(f"illegal mission transition {m.phase} -> {phase}")
    return replace(m, phase=phase, stage=0, phase_odo=odo, pid=pid_reset(), **kw)


def _tracks(v: float, omega: float, width: float) -> tuple[float, float]:
    half = 0.5 * omega * width
    return v - half, v + half


def _hold(m: MissionState, p: Percepts, v: float, width: float, dt: float):
    """Drive at v while steering the IMU estimate onto heading_ref."""
    err = wrap_angle(m.heading_ref - p.imu_heading)
    omega, pid = pid_heading(m.plan.gains, m.pid, err, dt)
    return _tracks(v, omega, width), replace(m, pid=pid)


def mission_step(
    m: MissionState, p: Percepts, s: RobotState, dt: float = 0.05
) -> tuple[MissionState, tuple[float, float]]:
    """One control tick: returns the updated mission state and track speeds."""
    plan = m.plan
    w = s.track_width_m
    v = plan.speed_low_mps if p.battery_low else plan.speed_normal_mps

    if m.phase == ROW_FOLLOW:
        if p.battery_low and plan.dock_enabled:
            return _goto(m, RETURN_HOME, p.odo_m), (0.0, 0.0)
        armed = m.armed or (
            p.green_smoothed is not None
            and p.green_smoothed > plan.arm_factor * plan.row_end_threshold
        )
        m = replace(m, armed=armed)
        if armed and p.row_end:
            if m.aisle >= plan.n_aisles - 1:
                if plan.dock_enabled:
                    return _goto(m, RETURN_HOME, p.odo_m), (0.0, 0.0)
                return _goto(m, DONE, p.odo_m, done_reason="field_complete"), (0.0, 0.0)
            return _goto(m, TURN_A, p.odo_m), _tracks(v, 0.0, w)
        if m.stage == 0 and p.odo_m - m.phase_odo >= plan.entry_blind_m:
            m = replace(m, stage=1)
        in_band = (
            p.green_smoothed is not None
            and plan.steer_area_lo <= p.green_smoothed <= plan.steer_area_hi
        )
        if m.stage == 1 and p.fresh_vision and p.bearing_rad is not None and in_band:
            m = replace(m, heading_ref=wrap_angle(p.imu_heading - p.bearing_rad))
        cmd, m = _hold(m, p, v, w, dt)
        return m, cmd

    if m.phase == TURN_A:
        if m.stage == 0:
            if p.odo_m - m.phase_odo < plan.headland_m:
                cmd, m = _hold(m, p, v, w, dt)
                return m, cmd
            q = m.quarter + m.turn_dir
            m = replace(
                m, stage=1, heading_ref=m.ladder_target(q), quarter=q, pid=pid_reset()
            )
        err = wrap_angle(m.heading_ref - p.imu_heading)
        if abs(err) <= plan.turn_tol_rad:
            return _goto(m, NEXT_ROW_ENTRY, p.odo_m), (0.0, 0.0)
        omega = math.copysign(min(plan.turn_rate_rps, 2.0 * abs(err)), err)
        return m, _tracks(0.0, omega, w)

    if m.phase == NEXT_ROW_ENTRY:
        if p.odo_m - m.phase_odo >= plan.aisle_width_m:
            q = m.quarter + m.turn_dir
            return (
                _goto(m, TURN_B, p.odo_m, heading_ref=m.ladder_target(q), quarter=q),
                (0.0, 0.0),
            )
        cmd, m = _hold(m, p, v, w, dt)
        return m, cmd

    if m.phase == TURN_B:
        err = wrap_angle(m.heading_ref - p.imu_heading)
        if abs(err) <= plan.turn_tol_rad:
            m2 = _goto(
                m,
                ROW_FOLLOW,
                p.odo_m,
                aisle=m.aisle + 1,
                outbound=not m.outbound,
                turn_dir=-m.turn_dir,
                armed=False,
            )
            return m2, (0.0, 0.0)
        omega = math.copysign(min(plan.turn_rate_rps, 2.0 * abs(err)), err)
        return m, _tracks(0.0, omega, w)

    if m.phase == RETURN_HOME:
        if p.home_done:
            return _goto(m, DOCK_ALIGN, p.odo_m), (0.0, 0.0)
        if p.home_bearing_rad is not None:
            m = replace(m, heading_ref=wrap_angle(p.imu_heading + p.home_bearing_rad))
        cmd, m = _hold(m, p, v, w, dt)
        return m, cmd

    if m.phase == DOCK_ALIGN:
        if p.contact or (
            p.dock_distance_m is not None and p.dock_distance_m <= plan.ramp_enter_m
        ):
            return _goto(m, RAMP, p.odo_m), (0.0, 0.0)
        if p.fresh_vision and p.dock_bearing_rad is not None:
            m = replace(m, heading_ref=wrap_angle(p.imu_heading - p.dock_bearing_rad))
        # no beacon this frame: DriveStraight, i.e. keep holding the last reference
        cmd, m = _hold(m, p, plan.speed_low_mps, w, dt)
        return m, cmd

    if m.phase == RAMP:
        if p.contact:
            if p.captured:
                return _goto(m, CHARGING, p.odo_m), (0.0, 0.0)
            return _goto(m, DONE, p.odo_m, done_reason="dock_miss"), (0.0, 0.0)
        cmd, m = _hold(m, p, plan.speed_low_mps, w, dt)
        return m, cmd

    if m.phase == CHARGING:
        if p.battery_v >= 16.8 - 1e-9:
            return _goto(m, DONE, p.odo_m, done_reason="charged"), (0.0, 0.0)
        return m, (0.0, 0.0)

    if m.phase == DONE:
        return m, (0.0, 0.0)

    raise RuntimeError(f"unknown mission phase {m.phase!r}")
