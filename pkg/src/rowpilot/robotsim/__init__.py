"""Closed-loop differential-drive simulator: kinematics, sensors, control, mission logic."""

from .kinematics import RobotState, step_kinematics, arc_endpoint
from .sensors import DRIFT_PER_BUMP_DEFAULT_RPS, ImuModel, BatteryModel, bump_event
from .control import PidGains, PidState, pid_heading, pid_reset
from .spray import SprayEvent, SprayState, spray_trigger, duplicate_fraction
from .mission import (
    ROW_FOLLOW,
    TURN_A,
    NEXT_ROW_ENTRY,
    TURN_B,
    RETURN_HOME,
    DOCK_ALIGN,
    RAMP,
    CHARGING,
    DONE,
    PHASES,
    MissionState,
    Percepts,
    mission_step,
)
from .episode import (
    EpisodeConfig,
    EpisodeLog,
    run_episode,
    run_dock_trial,
    crop_collisions,
    coverage_fraction,
)

__all__ = [
    "RobotState",
    "step_kinematics",
    "arc_endpoint",
    "DRIFT_PER_BUMP_DEFAULT_RPS",
    "ImuModel",
    "BatteryModel",
    "bump_event",
    "PidGains",
    "PidState",
    "pid_heading",
    "pid_reset",
    "SprayEvent",
    "SprayState",
    "spray_trigger",
    "duplicate_fraction",
    "ROW_FOLLOW",
    "TURN_A",
    "NEXT_ROW_ENTRY",
    "TURN_B",
    "RETURN_HOME",
    "DOCK_ALIGN",
    "RAMP",
    "CHARGING",
    "DONE",
    "PHASES",
    "MissionState",
    "Percepts",
    "mission_step",
    "EpisodeConfig",
    "EpisodeLog",
    "run_episode",
    "run_dock_trial",
    "crop_collisions",
    "coverage_fraction",
]
