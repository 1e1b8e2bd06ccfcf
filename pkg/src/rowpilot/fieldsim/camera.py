"""Pinhole camera shared by the scene generators and the robot simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CameraConfig:
    """Forward-facing camera on the chassis.

    `tilt_deg` is measured from vertical, so 90 means a level optical axis and
    smaller values pitch the view down toward the ground.
    """

    height_m: float = 0.12
    tilt_deg: float = 75.0
    hfov_deg: float = 136.0
    width: int = 360
    height: int = 240

    def __post_init__(self) -> None:
        if not 0.0 <= self.tilt_deg <= 120.0:
            raise ValueError(f"tilt_deg must be in [0, 120], got {self.tilt_deg}")
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError(f"hfov_deg must be in (0, 180), got {self.hfov_deg}")
        if self.height_m <= 0.0:
            raise ValueError("camera height must be positive")
        if self.width < 16 or self.height < 16:
            raise ValueError("frame size too small")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(math.radians(self.hfov_deg) / 2.0)

    @property
    def cx(self) -> float:
        return (self.width - 1) / 2.0

    @property
    def cy(self) -> float:
        return (self.height - 1) / 2.0

    @property
    def pitch_down_rad(self) -> float:
        return math.radians(90.0 - self.tilt_deg)


@dataclass(frozen=True)
class Pose:
    """Chassis pose on the ground plane; heading is CCW radians from +x.

    Crop rows run along +y, so a robot driving up an aisle has heading pi/2.
    """

    x: float
    y: float
    heading: float


def camera_basis(pose: Pose, cam: CameraConfig):
    """Camera origin and (right, down, forward) unit axes in world coordinates."""
    psi = pose.heading
    beta = cam.pitch_down_rad
    cb, sb = math.cos(beta), math.sin(beta)
    cp, sp = math.cos(psi), math.sin(psi)
    forward = np.array([cp * cb, sp * cb, -sb])
    right = np.array([sp, -cp, 0.0])
    down = np.cross(forward, right)
    origin = np.array([pose.x, pose.y, cam.height_m])
    return origin, right, down, forward


def project_points(pts: np.ndarray, pose: Pose, cam: CameraConfig):
    """Project world points (n, 3) to pixel coordinates.

    Returns (u, v, depth); depth is distance along the optical axis and points
    with depth <= 0 are behind the camera (u, v meaningless there).
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    origin, right, down, forward = camera_basis(pose, cam)
    rel = pts - origin
    depth = rel @ forward
    f = cam.focal_px
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cam.cx + f * (rel @ right) / depth
        v = cam.cy + f * (rel @ down) / depth
    return u, v, depth


def pixel_rays(pose: Pose, cam: CameraConfig):
    """Per-pixel world-space ray directions, shape (h, w, 3), plus the origin."""
    origin, right, down, forward = camera_basis(pose, cam)
    f = cam.focal_px
    u = (np.arange(cam.width, dtype=np.float64) - cam.cx) / f
    v = (np.arange(cam.height, dtype=np.float64) - cam.cy) / f
    d = (
        forward[None, None, :]
        + right[None, None, :] * u[None, :, None]
        + down[None, None, :] * v[:, None, None]
    )
    return origin, d


def vanishing_point(direction, pose: Pose, cam: CameraConfig):
    """Pixel where a world direction converges, or None if it points backward."""
    d = np.asarray(direction, dtype=np.float64)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ValueError("zero direction has no vanishing point")
    d = d / norm
    _, right, down, forward = camera_basis(pose, cam)
    depth = float(d @ forward)
    if depth <= 1e-9:
        return None
    f = cam.focal_px
    u = cam.cx + f * float(d @ right) / depth
    v = cam.cy + f * float(d @ down) / depth
    return (u, v)
