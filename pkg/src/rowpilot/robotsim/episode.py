"""Closed-loop episodes: render, perceive, decide, integrate, log.

`run_episode` drives the full boustrophedon mission over a synthetic field;
`run_dock_trial` runs just the visual docking approach in the station frame.
Both produce an `EpisodeLog` whose JSONL serialization is byte-identical for
the same config and seed: nothing in the log depends on wall-clock time.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import dockdetect as dd
from .. import hsvadapt as ha
from .. import imgcore as ic
from .. import rowdetect as rd
from ..fieldsim import (
    FieldConfig,
    Pose,
    dock_camera,
    estimate_distance,
    gen_field_frame,
    render_dock_scene,
    weed_list,
)
from ..fieldsim.noise import hash_u64
from ..util import canonical_json, config_hash, rng_for
from .kinematics import RobotState, step_kinematics, wrap_angle
from .mission import (
    CHARGING,
    DOCK_ALIGN,
    DONE,
    RAMP,
    RETURN_HOME,
    ROW_FOLLOW,
    MissionPlan,
    MissionState,
    Percepts,
    mission_step,
)
from .sensors import BatteryModel, ImuModel, bump_cell, bump_event, imu_read
from .spray import SprayState, duplicate_fraction, spray_trigger

# Station-red band for the docking detector: the S floor rejects white glare
# cores that the wide-open default band would count as beacon pixels.
_DOCK_RED = ic.HsvRange(((0, 80, 60, 30, 255, 255), (160, 80, 60, 179, 255, 255)))


def dock_detector_params() -> dd.DefCircleParams:
    """Detector configuration used by the simulator's docking approach.

    min_r is dropped well below the stock floor: a beacon seen from 3 m out
    projects to about 10 px and the fitted radius jitters around the default
    cutoff, which makes dots flicker in and out of acceptance at exactly the
    range where the approach needs all three.
    """
    return dd.DefCircleParams(
        red_band=_DOCK_RED, neighborhood_factor=1.0, red_area_frac=0.6, min_r=6.0
    )


@dataclass(frozen=True)
class EpisodeConfig:
    field: FieldConfig = dc_field(default_factory=FieldConfig)
    plan: Optional[MissionPlan] = None
    dt_s: float = 0.05
    perception_every: int = 10
    max_sim_s: float = 900.0
    chassis_width_m: float = 0.12
    track_width_m: float = 0.10
    start_y_m: float = 0.30
    calibrate: bool = True
    imu_noise_rps: float = 0.005
    imu_bias_rps: float = 0.0
    drift_per_bump_rps: float = 0.0
    bump_prob: float = 0.3
    spray_radius_m: float = 0.031
    spray_delay_s: float = 0.4
    spray_jitter_s: float = 0.1
    funnel_tol_m: float = 0.03
    stop_on_collision: bool = False
    battery_start_v: float = 16.8
    battery_discharge_v_per_s: Optional[float] = None
    # (x, face_y) of the charging station in field coordinates, facing +y.
    # None disables the return/dock tail of the mission.
    dock_station: Optional[Tuple[float, float]] = None

    def mission_plan(self) -> MissionPlan:
        if self.plan is not None:
            return self.plan
        return MissionPlan(
            n_aisles=self.field.n_rows - 1,
            aisle_width_m=self.field.aisle_width_m,
            dock_enabled=self.dock_station is not None,
        )


@dataclass
class EpisodeLog:
    seed: int
    config_hash: str
    records: List[dict] = dc_field(default_factory=list)
    events: List[dict] = dc_field(default_factory=list)
    path: List[Tuple[float, float, float, float, str]] = dc_field(default_factory=list)
    summary: Dict = dc_field(default_factory=dict)

    def to_jsonl(self) -> bytes:
        lines = [canonical_json({"kind": "header", "seed": self.seed, "config": self.config_hash})]
        lines += [canonical_json(r) for r in self.records]
        lines += [canonical_json(e) for e in self.events]
        lines.append(
            canonical_json(
                {
                    "kind": "path",
                    "t": [p[0] for p in self.path],
                    "x": [p[1] for p in self.path],
                    "y": [p[2] for p in self.path],
                    "heading": [p[3] for p in self.path],
                    "phase": [p[4] for p in self.path],
                }
            )
        )
        lines.append(canonical_json({"kind": "summary", **self.summary}))
        return ("\n".join(lines) + "\n").encode()


def _frame_seed(seed: int, salt: int, tick: int) -> int:
    return int(hash_u64(int(seed), int(salt), int(tick)) & ((1 << 63) - 1))


def in_crop_band(cfg: FieldConfig, x: float, y: float, chassis_width_m: float) -> bool:
    """Whether a chassis centered at (x, y) overlaps any crop row band."""
    if y < -0.05 or y > cfg.row_length_m + 0.05:
        return False
    reach = 0.5 * chassis_width_m + cfg.plant_radius_m
    for j in range(cfg.n_rows):
        if abs(x - float(cfg.row_x(j, y))) < reach:
            return True
    return False


def crop_collisions(
    path: Sequence[Tuple[float, float]], cfg: FieldConfig, chassis_width_m: float
) -> int:
    """Count band-entry events along a pose path (out -> in transitions).

    This is the same test the episode loop applies tick by tick, so the count
    can be re-derived from a logged path and compared against the summary.
    """
    n = 0
    inside = False
    for x, y in path:
        hit = in_crop_band(cfg, float(x), float(y), chassis_width_m)
        if hit and not inside:
            n += 1
        inside = hit
    return n


def coverage_fraction(
    path: Sequence[Tuple[float, float, float, float, str]], cfg: FieldConfig
) -> float:
    """Fraction of aisles traversed end to end while row-following.

    An aisle counts as covered when the logged row-following path inside its
    corridor reaches both the near end (y <= 0.5) and the far end
    (y >= row_length - 0.5).
    """
    n_aisles = cfg.n_rows - 1
    covered = 0
    for i in range(n_aisles):
        lo_seen = False
        hi_seen = False
        for _, x, y, _, phase in path:
            if phase != ROW_FOLLOW:
                continue
            if abs(x - float(cfg.aisle_center_x(i, y))) > 0.08:
                continue
            if y <= 0.5:
                lo_seen = True
            if y >= cfg.row_length_m - 0.5:
                hi_seen = True
            if lo_seen and hi_seen:
                covered += 1
                break
    return covered / n_aisles


class _Held:
    """Last processed frame's vision outputs, held between perception ticks."""

    def __init__(self):
        self.clear()

    def clear(self):
        self.bearing: Optional[float] = None
        self.deviation: Optional[float] = None
        self.smoothed: Optional[float] = None
        self.row_end = False
        self.dock_bearing: Optional[float] = None
        self.dock_dist: Optional[float] = None


class _VisionState:
    """Segmentation band plus the warmup calibration buffer.

    The first well-tracked frames feed the calibration sampler; once the
    buffer is full the band update runs and the resulting range is what
    every later frame is segmented with.
    """

    def __init__(self, rng, enabled: bool):
        self.calib = ha.CalibrationState(active=rd.PreprocessParams().band)
        self.rng = rng
        self.warmed = not enabled


def _field_percept(
    cfg: EpisodeConfig,
    state: RobotState,
    held: _Held,
    vision: _VisionState,
    history: List[int],
    seed: int,
    tick: int,
    t: float,
) -> None:
    cam = cfg.field.camera
    frame = gen_field_frame(
        cfg.field,
        Pose(state.x, state.y, state.heading_rad),
        seed=_frame_seed(seed, 401, tick),
        hours=t / 3600.0,
    )
    prep = rd.segment_green(frame.image, rd.PreprocessParams(band=vision.calib.active))
    history.append(rd.green_area(prep.mask))
    held.smoothed = rd.smoothed_area(history)
    held.row_end = rd.row_end(history)
    try:
        c1, c2 = rd.contour_pair(prep.mask)
    except rd.NoSecondCropline:
        held.bearing = None
        held.deviation = None
        return
    tp = rd.TargetPoint((c1.cx + c2.cx) / 2.0, (c1.cy + c2.cy) / 2.0)
    held.bearing = math.atan2(tp.x - cam.cx, cam.focal_px)
    held.deviation = rd.deviation_deg(tp, cam.width, cam.height)
    if not vision.warmed:
        hsv = ic.rgb_to_hsv(frame.image)
        ha.record_sample(
            hsv,
            (c1.cx, c1.cy),
            (c2.cx, c2.cy),
            (c1.area, c2.area),
            held.deviation,
            vision.calib,
            vision.rng,
            timestamp=t,
        )
        if len(vision.calib.samples) >= 10:
            ha.prior_update(vision.calib)
            if vision.calib.fallback_needed:
                try:
                    vision.calib.active = ha.apply_fallback(vision.calib, hsv)
                except ha.DegenerateHistogram:
                    pass
            vision.warmed = True


def _dock_percept(
    cfg: EpisodeConfig,
    dock_pose: Pose,
    held: _Held,
    params: dd.DefCircleParams,
    seed: int,
    tick: int,
) -> None:
    cam = dock_camera(cfg.field)
    frame = render_dock_scene(cfg.field, dock_pose, seed=_frame_seed(seed, 402, tick))
    res = dd.def_circle(frame.image, params)
    if res.target is None:
        held.dock_bearing = None
        return
    held.dock_bearing = math.atan2(res.target[0] - cam.cx, cam.focal_px)
    held.dock_dist = estimate_distance(cfg.field, max(c.r for c in res.accepted))


def _config_digest(cfg: EpisodeConfig) -> str:
    return config_hash(dataclasses.asdict(cfg))


def run_episode(cfg: EpisodeConfig, seed: int) -> EpisodeLog:
    """Run one full mission and return its log."""
    plan = cfg.mission_plan()
    log = EpisodeLog(seed=seed, config_hash=_config_digest(cfg))
    rng_imu = rng_for(seed, 301)
    rng_spray = rng_for(seed, 302)

    state = RobotState(
        x=float(cfg.field.aisle_center_x(0, cfg.start_y_m)),
        y=cfg.start_y_m,
        heading_rad=math.pi / 2,
        speed_mps=plan.speed_normal_mps,
        track_width_m=cfg.track_width_m,
    )
    imu = ImuModel(
        bias_rps=cfg.imu_bias_rps,
        drift_per_bump_rps=cfg.drift_per_bump_rps,
        noise_sigma_rps=cfg.imu_noise_rps,
    )
    imu.start(state, rng_imu)
    battery = BatteryModel(voltage_v=cfg.battery_start_v)
    if cfg.battery_discharge_v_per_s is not None:
        battery.discharge_v_per_s = cfg.battery_discharge_v_per_s
    mission = MissionState(plan=plan)
    sprayst = SprayState(cfg.spray_delay_s, cfg.spray_jitter_s)
    weeds = weed_list(cfg.field)
    dock_params = dock_detector_params()

    held = _Held()
    vision = _VisionState(rng_for(seed, 303), cfg.calibrate)
    history: List[int] = []
    odo = 0.0
    est_x, est_y = state.x, state.y
    crumbs: List[Tuple[float, float]] = [(est_x, est_y)]
    crumb_odo = 0.0
    waypoints: List[Tuple[float, float]] = []
    last_cell = bump_cell(state.x, state.y)
    collisions = 0
    inside = False
    spray_events = []
    n_bumps = 0
    done_reason = "timeout"
    docked = False

    sx, sy = cfg.dock_station if cfg.dock_station is not None else (0.0, 0.0)

    def dock_pose() -> Pose:
        # station frame: rotate the field frame by pi about the face center
        return Pose(sx - state.x, sy - state.y, wrap_angle(state.heading_rad + math.pi))

    n_ticks = int(round(cfg.max_sim_s / cfg.dt_s))
    for tick in range(n_ticks):
        t = tick * cfg.dt_s
        if not cfg.field.pose_in_bounds(Pose(state.x, state.y, state.heading_rad)):
            # badly drifted runs can leave the renderable area entirely;
            # treat that as a geofence stop rather than crashing perception
            done_reason = "out_of_bounds"
            log.events.append({"kind": "lost", "t": t, "x": state.x, "y": state.y})
            break
        fresh = False
        if tick % cfg.perception_every == 0:
            if mission.phase == ROW_FOLLOW:
                _field_percept(cfg, state, held, vision, history, seed, tick, t)
                fresh = True
            elif mission.phase == DOCK_ALIGN and cfg.dock_station is not None:
                dp = dock_pose()
                if dp.y < -0.40:
                    _dock_percept(cfg, dp, held, dock_params, seed, tick)
                    fresh = True

        contact = False
        captured = False
        if cfg.dock_station is not None and mission.phase in (DOCK_ALIGN, RAMP):
            dp = dock_pose()
            contact = dp.y >= -0.025
            captured = contact and abs(dp.x) <= cfg.funnel_tol_m

        home_bearing = None
        home_dist = None
        home_done = False
        if mission.phase == RETURN_HOME:
            if not waypoints:
                home_done = True
            else:
                wx, wy = waypoints[0]
                home_dist = math.hypot(wx - est_x, wy - est_y)
                if home_dist < 0.2:
                    waypoints.pop(0)
                    home_done = not waypoints
                else:
                    home_bearing = wrap_angle(
                        math.atan2(wy - est_y, wx - est_x) - imu.estimate_rad
                    )

        p = Percepts(
            t=t,
            odo_m=odo,
            imu_heading=imu.estimate_rad,
            battery_v=battery.voltage_v,
            battery_low=battery.low,
            fresh_vision=fresh,
            bearing_rad=held.bearing,
            deviation_deg=held.deviation,
            green_smoothed=held.smoothed,
            row_end=held.row_end,
            dock_bearing_rad=held.dock_bearing,
            dock_distance_m=held.dock_dist,
            home_bearing_rad=home_bearing,
            home_dist_m=home_dist,
            home_done=home_done,
            contact=contact,
            captured=captured,
        )

        mission2, cmd = mission_step(mission, p, state, cfg.dt_s)
        if mission2.phase != mission.phase:
            log.events.append(
                {"kind": "phase", "t": t, "from": mission.phase, "to": mission2.phase}
            )
            held.clear()
            history.clear()
            if mission2.phase == RETURN_HOME:
                waypoints = list(reversed(crumbs)) + [
                    (float(cfg.field.aisle_center_x(0, 0.0)), -0.15)
                ]
        mission = mission2

        if tick % cfg.perception_every == 0:
            log.records.append(
                {
                    "kind": "tick",
                    "t": t,
                    "x": state.x,
                    "y": state.y,
                    "heading": state.heading_rad,
                    "imu": imu.estimate_rad,
                    "phase": mission.phase,
                    "aisle": mission.aisle,
                    "odo": odo,
                    "battery_v": battery.voltage_v,
                    "cmd": list(cmd),
                    "smoothed": held.smoothed,
                    "row_end": held.row_end,
                    "deviation_deg": held.deviation,
                }
            )
        log.path.append((t, state.x, state.y, state.heading_rad, mission.phase))

        if mission.phase == CHARGING:
            docked = True
        if mission.phase == DONE:
            done_reason = mission.done_reason
            break

        v_mean = 0.5 * (cmd[0] + cmd[1])
        state = dataclasses.replace(
            step_kinematics(state, cmd, cfg.dt_s), speed_mps=abs(v_mean)
        )
        odo += abs(v_mean) * cfg.dt_s
        est_x += v_mean * math.cos(imu.estimate_rad) * cfg.dt_s
        est_y += v_mean * math.sin(imu.estimate_rad) * cfg.dt_s
        if mission.phase not in (RETURN_HOME, DOCK_ALIGN, RAMP) and odo - crumb_odo >= 0.5:
            crumbs.append((est_x, est_y))
            crumb_odo = odo

        cell = bump_cell(state.x, state.y)
        bump = cell != last_cell and bump_event(cell, cfg.field.world_seed, cfg.bump_prob)
        last_cell = cell
        if bump:
            n_bumps += 1
            log.events.append({"kind": "bump", "t": t})
        imu_read(state, imu, cfg.dt_s, bump)

        battery.tick(cfg.dt_s)
        if mission.phase == CHARGING:
            battery.recharge(cfg.dt_s)

        if len(weeds) and mission.phase == ROW_FOLLOW:
            d2 = (weeds[:, 0] - state.x) ** 2 + (weeds[:, 1] - state.y) ** 2
            hits = np.nonzero(d2 < cfg.spray_radius_m**2)[0]
            for ev in spray_trigger(sprayst, t, (int(i) for i in hits), rng_spray):
                battery.spray()
                spray_events.append(ev)
                log.events.append(
                    {"kind": "spray", "t": ev.t, "weed": ev.weed, "duplicate": ev.duplicate}
                )

        hit = in_crop_band(cfg.field, state.x, state.y, cfg.chassis_width_m)
        if hit and not inside:
            collisions += 1
            log.events.append({"kind": "collision", "t": t, "x": state.x, "y": state.y})
        inside = hit
        if hit and cfg.stop_on_collision:
            done_reason = "collision_stop"
            break

    log.summary = {
        "sim_time_s": round(len(log.path) * cfg.dt_s, 6),
        "collisions": collisions,
        "coverage": coverage_fraction(log.path, cfg.field),
        "sprays": len(spray_events),
        "duplicate_fraction": duplicate_fraction(spray_events),
        "bumps": n_bumps,
        "final_phase": mission.phase,
        "done_reason": done_reason,
        "docked": docked if cfg.dock_station is not None else None,
        "battery_v": battery.voltage_v,
        "odo_m": odo,
    }
    return log


def run_dock_trial(
    cfg: EpisodeConfig,
    seed: int,
    distance_m: float = 3.0,
    offset_m: float = 0.0,
    heading_err_rad: float = 0.0,
    max_sim_s: float = 120.0,
) -> EpisodeLog:
    """Run a standalone docking approach in the station frame.

    The robot starts `distance_m` in front of the face with the given lateral
    offset, already in DOCK_ALIGN. Success means bumper contact with the face
    inside the funnel tolerance; the summary carries `docked` plus the final
    lateral offset.
    """
    plan = cfg.mission_plan()
    log = EpisodeLog(seed=seed, config_hash=_config_digest(cfg))
    rng_imu = rng_for(seed, 301)

    state = RobotState(
        x=offset_m,
        y=-distance_m,
        heading_rad=math.pi / 2 + heading_err_rad,
        speed_mps=plan.speed_low_mps,
        track_width_m=cfg.track_width_m,
    )
    imu = ImuModel(noise_sigma_rps=cfg.imu_noise_rps)
    imu.start(state, rng_imu)
    battery = BatteryModel(voltage_v=cfg.battery_start_v)
    mission = MissionState.dock_trial(plan, heading_ref=state.heading_rad)
    dock_params = dock_detector_params()
    held = _Held()

    docked = False
    done_reason = "timeout"
    n_ticks = int(round(max_sim_s / cfg.dt_s))
    for tick in range(n_ticks):
        t = tick * cfg.dt_s
        fresh = False
        if tick % cfg.perception_every == 0 and state.y < -0.40 and mission.phase == DOCK_ALIGN:
            _dock_percept(
                cfg, Pose(state.x, state.y, state.heading_rad), held, dock_params, seed, tick
            )
            fresh = True

        contact = state.y >= -0.025
        captured = contact and abs(state.x) <= cfg.funnel_tol_m
        p = Percepts(
            t=t,
            odo_m=0.0,
            imu_heading=imu.estimate_rad,
            battery_v=battery.voltage_v,
            battery_low=battery.low,
            fresh_vision=fresh,
            dock_bearing_rad=held.dock_bearing,
            dock_distance_m=held.dock_dist,
            contact=contact,
            captured=captured,
        )
        mission2, cmd = mission_step(mission, p, state, cfg.dt_s)
        if mission2.phase != mission.phase:
            log.events.append(
                {"kind": "phase", "t": t, "from": mission.phase, "to": mission2.phase}
            )
        mission = mission2

        if tick % cfg.perception_every == 0:
            log.records.append(
                {
                    "kind": "tick",
                    "t": t,
                    "x": state.x,
                    "y": state.y,
                    "heading": state.heading_rad,
                    "imu": imu.estimate_rad,
                    "phase": mission.phase,
                    "dock_bearing": held.dock_bearing,
                    "dock_dist": held.dock_dist,
                }
            )
        log.path.append((t, state.x, state.y, state.heading_rad, mission.phase))

        if mission.phase == CHARGING:
            docked = True
            done_reason = "docked"
            break
        if mission.phase == DONE:
            done_reason = mission.done_reason
            break

        state = step_kinematics(state, cmd, cfg.dt_s)
        imu_read(state, imu, cfg.dt_s)
        battery.tick(cfg.dt_s)

    log.summary = {
        "sim_time_s": round(len(log.path) * cfg.dt_s, 6),
        "docked": docked,
        "done_reason": done_reason,
        "final_offset_m": state.x,
        "final_y_m": state.y,
        "start_distance_m": distance_m,
        "start_offset_m": offset_m,
    }
    return log
