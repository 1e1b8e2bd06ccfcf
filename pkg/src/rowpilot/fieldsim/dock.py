"""Charging-station scene renderer with projected beacon labels."""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np

from ..util import rng_for
from .camera import CameraConfig, Pose, camera_basis, pixel_rays
from .field import FieldConfig, FrameWithLabels
from .noise import lattice_noise

# Everything except the beacons has to stay comfortably under the bright
# threshold after local equalization, which maps a material roughly to its
# rank inside each tile. Mid-gray values (ramp, sky, funnel) land near the
# top of dark tiles and get pushed within noise reach of the cutoff, so all
# the station materials are kept well below the beacon red.
_GROUND_RGB = np.array([88.0, 82.0, 72.0])
_RAMP_RGB = np.array([108.0, 106.0, 102.0])
_FACE_RGB = np.array([52.0, 54.0, 58.0])
_FUNNEL_RGB = np.array([20.0, 44.0, 118.0])
_DOT_RGB = np.array([232.0, 28.0, 24.0])
_SKY_RGB = np.array([128.0, 136.0, 150.0])


def dock_camera(cfg: FieldConfig) -> CameraConfig:
    """The docking view: same sensor, level axis, narrow lens."""
    return replace(cfg.camera, tilt_deg=90.0, hfov_deg=cfg.dock.hfov_deg)


def beacon_centers(cfg: FieldConfig) -> np.ndarray:
    """World coordinates of the three beacons; the face is the plane y = 0."""
    d = cfg.dock
    return np.array(
        [
            [-d.dot_spacing_m, 0.0, d.dot_height_m],
            [0.0, 0.0, d.dot_height_m],
            [d.dot_spacing_m, 0.0, d.dot_height_m],
        ]
    )


def render_dock_scene(cfg: FieldConfig, pose: Pose, seed: int) -> FrameWithLabels:
    """Render the station from an arbitrary pose in station coordinates.

    The station face occupies the plane y = 0 (robot side is y < 0). Labels
    are the beacons whose projected disks land fully inside the frame.
    """
    if pose.y >= -0.02:
        raise ValueError("camera must be in front of the station face")
    d = cfg.dock
    cam = dock_camera(cfg)
    origin, rays = pixel_rays(pose, cam)

    img = np.empty((cam.height, cam.width, 3), dtype=np.float64)
    img[:] = _SKY_RGB

    dz = rays[..., 2]
    dy = rays[..., 1]
    hit_g = dz < -1e-9
    t_g = np.where(hit_g, -cam.height_m / np.where(hit_g, dz, -1.0), np.inf)
    t_f = np.where(dy > 1e-9, (0.0 - origin[1]) / np.where(dy > 1e-9, dy, 1.0), np.inf)
    fx = origin[0] + t_f * rays[..., 0]
    fz = origin[2] + t_f * rays[..., 2]
    on_face = (
        np.isfinite(t_f)
        & (np.abs(fx) <= d.face_width_m / 2)
        & (fz >= 0.0)
        & (fz <= d.face_height_m)
    )

    gx = origin[0] + t_g * rays[..., 0]
    gy = origin[1] + t_g * rays[..., 1]
    ground = hit_g & ~(on_face & (t_f < t_g))
    gshade = (0.8 + 0.35 * lattice_noise(gx[ground], gy[ground], 0.04, 61))[:, None]
    img[ground] = _GROUND_RGB * gshade
    ramp = ground & (np.abs(gx) < 0.16) & (gy > -0.3) & (gy < 0.0)
    img[ramp] = _RAMP_RGB * (0.9 + 0.2 * lattice_noise(gx[ramp], gy[ramp], 0.03, 62))[:, None]

    face = on_face & (t_f < t_g)
    img[face] = _FACE_RGB * (0.9 + 0.25 * lattice_noise(fx[face], fz[face], 0.02, 63))[:, None]

    # funnel top ends clear of the beacon row so their pixels never touch
    half_top, half_bot = 0.15, 0.035
    z0, z1 = 0.03, 0.075
    frac = np.clip((fz - z0) / (z1 - z0), 0.0, 1.0)
    half = half_bot + (half_top - half_bot) * frac
    funnel = face & (fz >= z0) & (fz <= z1) & (np.abs(fx) <= half)
    img[funnel] = _FUNNEL_RGB * (0.9 + 0.2 * lattice_noise(fx[funnel], fz[funnel], 0.015, 64))[:, None]

    mask = np.zeros(img.shape[:2], dtype=np.uint8)
    for bx, by, bz in beacon_centers(cfg):
        dot = face & ((fx - bx) ** 2 + (fz - bz) ** 2 <= d.dot_radius_m**2)
        img[dot] = _DOT_RGB
        mask[dot] = 255

    rng = rng_for(seed, 103)
    n_glare = int(rng.integers(0, d.glare_max + 1)) if rng.random() < d.glare_rate else 0
    for _ in range(n_glare):
        cx = float(rng.uniform(0.15, 0.85)) * cam.width
        cy = float(rng.uniform(0.05, 0.95)) * cam.height
        r = float(rng.uniform(10.0, 24.0))
        peak = float(rng.uniform(130.0, 225.0))
        # most spots bloom until the sensor clamps, leaving a washed-out
        # disk with a crisp rim; the rest stay soft halos
        shoulder = 1.5 if rng.random() < 0.8 else r / 4.0
        yy, xx = np.ogrid[: cam.height, : cam.width]
        dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        fall = np.clip((r - dist) / shoulder, 0.0, 1.0)
        img += (peak * fall)[..., None]

    img += rng.normal(0.0, 2.2, size=img.shape)
    image = np.clip(np.round(img), 0, 255).astype(np.uint8)

    circles = _beacon_labels(cfg, pose, cam)
    meta = {"pose": [pose.x, pose.y, pose.heading], "glare": n_glare}
    return FrameWithLabels(
        image=image, vp=None, row_mask=mask, circles=circles, seed=seed, meta=meta
    )


# Beacons this close to the frame edge are out of scope for labels; the
# value matches the detector's border gate so both sides agree on which
# circles count.
_LABEL_MARGIN = 2.0


def _beacon_labels(cfg: FieldConfig, pose: Pose, cam: CameraConfig) -> tuple:
    origin, right, down, forward = camera_basis(pose, cam)
    m = _LABEL_MARGIN
    labels = []
    for c in beacon_centers(cfg):
        rel = c - origin
        depth = float(rel @ forward)
        if depth <= 0.05:
            continue
        u = cam.cx + cam.focal_px * float(rel @ right) / depth
        v = cam.cy + cam.focal_px * float(rel @ down) / depth
        r = cam.focal_px * cfg.dock.dot_radius_m / depth
        if u - r < m or u + r > cam.width - 1 - m or v - r < m or v + r > cam.height - 1 - m:
            continue
        labels.append((float(u), float(v), float(r)))
    return tuple(labels)


def gen_dock_frame(
    cfg: FieldConfig,
    distance: float,
    offset: float,
    seed: int,
    heading_err: float = 0.0,
) -> FrameWithLabels:
    """Approach view from `distance` meters out, `offset` meters to the right.

    `heading_err` rotates the camera away from straight-at-the-face (radians,
    CCW). Deterministic in all arguments.
    """
    if distance <= 0.0:
        raise ValueError("distance must be positive")
    pose = Pose(offset, -distance, math.pi / 2 + heading_err)
    frame = render_dock_scene(cfg, pose, seed)
    frame.meta["distance"] = distance
    frame.meta["offset"] = offset
    frame.meta["heading_err"] = heading_err
    return frame


def estimate_distance(cfg: FieldConfig, radius_px: float) -> Optional[float]:
    """Invert the beacon projection: apparent radius -> axis distance."""
    if radius_px <= 0.0:
        return None
    return dock_camera(cfg).focal_px * cfg.dock.dot_radius_m / radius_px
