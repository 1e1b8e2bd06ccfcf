"""Crop-field renderer with exact geometric labels.

The scene model is analytic: crop rows are parabolic arcs of elliptical plant
blobs, weeds and stones come from a world-keyed hash, and every label (the row
vanishing point, the crop pixel mask) is recomputed from the same model that
painted the pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import draw
from ..imgcore import hsv_to_rgb
from ..util import rng_for
from .camera import CameraConfig, Pose, pixel_rays, project_points, vanishing_point
from .noise import hash01, lattice_noise

# dry gray loam: desaturated so plant/soil blur blends leave the green band
# about as fast as plant/sky blends do, keeping the segmented canopy band
# vertically symmetric instead of growing only its bottom edge
_SOIL_RGB = np.array([84.0, 82.0, 78.0])
# pale sage overcast: desaturated enough to stay outside the green band, but
# hue-adjacent so plant/sky blur blends stay inside it (keeps the segmented
# band vertically symmetric instead of eroding only its top edge)
_SKY_RGB = np.array([138.0, 146.0, 132.0])
_STONE_RGB = np.array([112.0, 108.0, 100.0])
_MAX_DRAW_DEPTH = 12.0


@dataclass(frozen=True)
class DockSceneConfig:
    """Charging-station scene: three red beacons over a funnel on a dark face.

    The docking camera reuses the chassis camera's sensor but a longer lens,
    so the beacons stay several pixels wide out to the approach distance.
    """

    hfov_deg: float = 45.0
    dot_radius_m: float = 0.072
    dot_spacing_m: float = 0.19
    dot_height_m: float = 0.16
    face_width_m: float = 0.60
    face_height_m: float = 0.30
    glare_rate: float = 0.7
    glare_max: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError("hfov_deg must be in (0, 180)")
        if self.dot_radius_m <= 0.0 or self.dot_spacing_m <= 2 * self.dot_radius_m:
            raise ValueError("beacons must not overlap")
        if not 0 <= self.glare_max <= 8 or not 0.0 <= self.glare_rate <= 1.0:
            raise ValueError("glare settings out of range")


@dataclass(frozen=True)
class FieldConfig:
    """Field layout, vegetation, illumination and camera in one bundle.

    Rows run along +y from y=0 to y=row_length_m, spaced one aisle width apart
    in x starting at x=0. `row_curvature` bends every row by the same parabola
    x(y) = x0 + curvature * y^2 / 2, i.e. curvature is 1/m at the row start.
    """

    aisle_width_m: float = 0.24
    row_length_m: float = 3.0
    row_curvature: float = 0.0
    n_rows: int = 6
    plant_height_m: float = 0.24
    plant_radius_m: float = 0.036
    plant_spacing_m: float = 0.05
    plant_hue: float = 62.0
    visibility_m: float = 0.38
    weed_density: float = 0.25
    stone_density: float = 0.15
    base_v_scale: float = 1.0
    hue_drift_per_hour: float = 0.0
    world_seed: int = 0
    camera: CameraConfig = field(default_factory=CameraConfig)
    dock: DockSceneConfig = field(default_factory=DockSceneConfig)

    def __post_init__(self) -> None:
        if not 0.20 <= self.aisle_width_m <= 0.25:
            raise ValueError(f"aisle_width_m must be in [0.20, 0.25], got {self.aisle_width_m}")
        if self.row_length_m <= 0.0:
            raise ValueError("row_length_m must be positive")
        if self.n_rows < 2:
            raise ValueError("need at least two rows")
        if self.plant_height_m <= 0.0 or self.plant_radius_m <= 0.0:
            raise ValueError("plant size must be positive")
        if self.plant_spacing_m <= 0.0:
            raise ValueError("plant_spacing_m must be positive")
        if self.weed_density < 0.0 or self.stone_density < 0.0:
            raise ValueError("densities must be non-negative")
        if self.base_v_scale <= 0.0:
            raise ValueError("base_v_scale must be positive")
        if self.visibility_m <= 0.1:
            raise ValueError("visibility_m must exceed 0.1")

    @property
    def field_width_m(self) -> float:
        return (self.n_rows - 1) * self.aisle_width_m

    def row_x(self, row: int, y) -> np.ndarray:
        """Centerline x of a row at height y along the field."""
        return row * self.aisle_width_m + 0.5 * self.row_curvature * np.square(y)

    def aisle_center_x(self, aisle: int, y) -> np.ndarray:
        return (aisle + 0.5) * self.aisle_width_m + 0.5 * self.row_curvature * np.square(y)

    def row_direction(self, y: float) -> np.ndarray:
        """Unit tangent of the rows at height y (curvature bends it)."""
        d = np.array([self.row_curvature * y, 1.0, 0.0])
        return d / np.linalg.norm(d)

    def pose_in_bounds(self, pose: Pose) -> bool:
        return (
            -0.6 <= pose.x <= self.field_width_m + 0.6
            and -1.2 <= pose.y <= self.row_length_m + 1.2
        )


@dataclass(frozen=True)
class FrameWithLabels:
    """Rendered frame plus the ground truth the renderer knows about it."""

    image: np.ndarray
    vp: Optional[tuple]
    row_mask: np.ndarray
    circles: tuple
    seed: int
    meta: dict


def _hsv1(h: float, s: float, v: float) -> np.ndarray:
    px = np.array([[[h, s, v]]], dtype=np.uint8)
    return hsv_to_rgb(px)[0, 0].astype(np.float64)


def plant_list(cfg: FieldConfig) -> np.ndarray:
    """All plants as rows (x, y, radius_m, height_m, hue_jitter, v_jitter).

    Placement is keyed by (world_seed, row, index) so the same config always
    grows the same field no matter which frames get rendered.
    """
    n_per_row = max(1, int(round(cfg.row_length_m / cfg.plant_spacing_m)))
    rows = np.repeat(np.arange(cfg.n_rows), n_per_row)
    idx = np.tile(np.arange(n_per_row), cfg.n_rows)
    base_y = (idx + 0.5) * cfg.row_length_m / n_per_row
    jy = (hash01(rows, idx, cfg.world_seed, 11) - 0.5) * 0.5 * cfg.plant_spacing_m
    jx = (hash01(rows, idx, cfg.world_seed, 12) - 0.5) * 0.012
    size = 0.85 + 0.3 * hash01(rows, idx, cfg.world_seed, 13)
    hue_j = (hash01(rows, idx, cfg.world_seed, 14) - 0.5) * 8.0
    v_j = (hash01(rows, idx, cfg.world_seed, 15) - 0.5) * 30.0
    y = np.clip(base_y + jy, 0.0, cfg.row_length_m)
    x = cfg.row_x(rows, y) + jx
    return np.column_stack(
        [x, y, cfg.plant_radius_m * size, cfg.plant_height_m * size, hue_j, v_j]
    )


def weed_list(cfg: FieldConfig) -> np.ndarray:
    """Weeds as rows (x, y, radius_m), one candidate per 0.25 m ground cell.

    The list covers the full field rectangle including the aisles; the robot
    simulator treats the same coordinates as spray targets.
    """
    cell = 0.25
    pad = 0.3
    nx = int(math.ceil((cfg.field_width_m + 2 * pad) / cell))
    ny = int(math.ceil((cfg.row_length_m + 2 * pad) / cell))
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    p = cfg.weed_density * cell * cell
    keep = hash01(ix, iy, cfg.world_seed, 21) < p
    ix, iy = ix[keep], iy[keep]
    x = -pad + (ix + hash01(ix, iy, cfg.world_seed, 22)) * cell
    y = -pad + (iy + hash01(ix, iy, cfg.world_seed, 23)) * cell
    r = 0.008 + 0.014 * hash01(ix, iy, cfg.world_seed, 24)
    return np.column_stack([x, y, r])


def _ground_and_sky(cfg: FieldConfig, pose: Pose, hours: float):
    """Ray-cast the ground plane; returns (image float64, X, Y, ground mask)."""
    cam = cfg.camera
    origin, d = pixel_rays(pose, cam)
    dz = d[..., 2]
    ground = dz < -1e-9
    t = np.where(ground, -cam.height_m / np.where(ground, dz, -1.0), np.inf)
    X = origin[0] + t * d[..., 0]
    Y = origin[1] + t * d[..., 1]

    img = np.empty((cam.height, cam.width, 3), dtype=np.float64)
    vv = (np.arange(cam.height, dtype=np.float64) / cam.height)[:, None, None]
    img[:] = _SKY_RGB * (0.82 + 0.3 * vv)

    gx, gy = X[ground], Y[ground]
    shade = 0.75 + 0.4 * lattice_noise(gx, gy, 0.035, cfg.world_seed * 7 + 1)
    fine = 0.9 + 0.2 * lattice_noise(gx * 3.7, gy * 3.7, 0.035, cfg.world_seed * 7 + 2)
    soil = _SOIL_RGB[None, :] * (shade * fine)[:, None]

    stone_cell = 0.3
    p_stone = cfg.stone_density * stone_cell * stone_cell
    sx = np.floor(gx / stone_cell).astype(np.int64)
    sy = np.floor(gy / stone_cell).astype(np.int64)
    has_stone = hash01(sx, sy, cfg.world_seed, 31) < p_stone
    cxs = (sx + hash01(sx, sy, cfg.world_seed, 32)) * stone_cell
    cys = (sy + hash01(sx, sy, cfg.world_seed, 33)) * stone_cell
    rs = 0.015 + 0.03 * hash01(sx, sy, cfg.world_seed, 34)
    on_stone = has_stone & ((gx - cxs) ** 2 + (gy - cys) ** 2 < rs**2)
    soil[on_stone] = _STONE_RGB * (0.8 + 0.4 * hash01(sx[on_stone], sy[on_stone], 35))[:, None]

    # distant ground fades into the sky so the horizon is not a hard seam
    dist = t[ground]
    haze = np.clip((dist - 6.0) / 10.0, 0.0, 1.0)[:, None]
    img[ground] = soil * (1.0 - haze) + _SKY_RGB[None, :] * haze
    return img, X, Y, ground


def _paint_weeds(cfg: FieldConfig, pose: Pose, img, X, Y, ground, hours: float) -> None:
    if cfg.weed_density <= 0.0:
        return
    weeds = weed_list(cfg)
    if len(weeds) == 0:
        return
    gx, gy = X[ground], Y[ground]
    hit = np.zeros(gx.shape, dtype=bool)
    hue = np.zeros(gx.shape, dtype=np.float64)
    for k, (wx, wy, wr) in enumerate(weeds):
        m = (gx - wx) ** 2 + (gy - wy) ** 2 < wr * wr
        if m.any():
            hit |= m
            hue[m] = 40.0 + 14.0 * float(hash01(k, cfg.world_seed, 41))
    if not hit.any():
        return
    # weeds wash out with the same forward-depth fade as the crop so the far
    # aisle carries no stray green
    depth = (gx[hit] - pose.x) * math.cos(pose.heading) + (gy[hit] - pose.y) * math.sin(
        pose.heading
    )
    factor = np.clip((cfg.visibility_m - depth) / (0.28 * cfg.visibility_m), 0.0, 1.0)
    h = np.clip(hue[hit] + cfg.hue_drift_per_hour * hours, 0, 179)
    hsv = np.stack([h, np.full(h.shape, 150.0), np.full(h.shape, 110.0)], axis=-1)
    hsv = _HAZE_HSV[None, :] + (hsv - _HAZE_HSV[None, :]) * factor[:, None]
    px = np.clip(np.round(hsv), 0, 255).astype(np.uint8)
    rgb = hsv_to_rgb(px[None, :, :])[0].astype(np.float64)
    sub = img[ground]
    sub[hit] = rgb
    img[ground] = sub


_HAZE_HSV = np.array([12.0, 36.0, 100.0])
_NEAR_BLUR_M = 0.11


def _near_foliage(cfg: FieldConfig, pose: Pose):
    """Pixels whose ray passes through a hedge within _NEAR_BLUR_M meters.

    Foliage brushing past the lens is far inside the focus distance, so it
    reads as a dark smudge that blocks everything behind it. Treating each row
    as a continuous slab here (rather than per-plant sprites) keeps the near
    field free of see-through gaps that would expose the outer rows. Rows are
    taken as locally straight at the camera's y; fine for the short reach.
    """
    cam = cfg.camera
    origin, dirs = pixel_rays(pose, cam)
    # dirs = forward + u*right + v*down, so the ray parameter t equals the
    # forward depth of the point reached
    dx, dy, dz = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    ox, oy, oz = origin[0], origin[1], origin[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_zlow = (0.0 - oz) / dz
        t_zhigh = (cfg.plant_height_m - oz) / dz
        tz_in = np.fmin(t_zlow, t_zhigh)
        tz_out = np.fmax(t_zlow, t_zhigh)
        tz_in = np.where(np.abs(dz) < 1e-12, 0.0, tz_in)
        tz_out = np.where(np.abs(dz) < 1e-12, np.inf, tz_out)
        t_ylow = (0.0 - oy) / dy
        t_yhigh = (cfg.row_length_m - oy) / dy
        ty_in = np.fmin(t_ylow, t_yhigh)
        ty_out = np.fmax(t_ylow, t_yhigh)
        y_par = np.abs(dy) < 1e-12
        y_inside = 0.0 <= oy <= cfg.row_length_m
        ty_in = np.where(y_par, 0.0 if y_inside else np.inf, ty_in)
        ty_out = np.where(y_par, np.inf if y_inside else -np.inf, ty_out)
    tz_in = np.maximum(tz_in, ty_in)
    tz_out = np.minimum(tz_out, ty_out)
    blocked = np.zeros(dx.shape, dtype=bool)
    for row in range(cfg.n_rows):
        xj = float(cfg.row_x(row, pose.y))
        if abs(xj - ox) > cfg.plant_radius_m + _NEAR_BLUR_M * 3.0:
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (xj - cfg.plant_radius_m - ox) / dx
            t2 = (xj + cfg.plant_radius_m - ox) / dx
            tx_in = np.fmin(t1, t2)
            tx_out = np.fmax(t1, t2)
            parallel = np.abs(dx) < 1e-12
            inside = abs(ox - xj) <= cfg.plant_radius_m
            tx_in = np.where(parallel, 0.0 if inside else np.inf, tx_in)
            tx_out = np.where(parallel, np.inf if inside else -np.inf, tx_out)
        t_in = np.maximum(np.maximum(tx_in, tz_in), 0.01)
        t_out = np.minimum(tx_out, tz_out)
        blocked |= (t_in < t_out) & (t_in <= _NEAR_BLUR_M)
    return blocked


def _paint_plants(cfg: FieldConfig, pose: Pose, img, mask, hours: float) -> None:
    """Paint plant sprites near-to-far occluded, fading out at visibility_m.

    The fade desaturates distant crop toward a soil haze the way defocus and
    atmospheric scatter wash out a low camera's long view; it also keeps the
    segmentable canopy inside the range where neighboring rows stay separate
    in the image. Ground-truth mask pixels are only the unfaded plants.
    """
    plants = plant_list(cfg)
    cam = cfg.camera
    centers = np.column_stack([plants[:, 0], plants[:, 1], plants[:, 3] / 2.0])
    u, v, depth = project_points(centers, pose, cam)
    f = cam.focal_px
    rx = f * plants[:, 2] / np.maximum(depth, 1e-9)
    ry = f * (plants[:, 3] / 2.0) / np.maximum(depth, 1e-9)
    factor = np.clip((cfg.visibility_m - depth) / (0.28 * cfg.visibility_m), 0.0, 1.0)
    vis = (
        (depth > 0.12)
        & (factor > 0.02)
        & (u + rx > -2)
        & (u - rx < cam.width + 2)
        & (v + ry > -2)
        & (v - ry < cam.height + 2)
    )
    order = np.argsort(-depth[vis])
    idx = np.nonzero(vis)[0][order]
    drift = cfg.hue_drift_per_hour * hours
    for i in idx:
        hsv = np.array(
            [
                min(179.0, max(0.0, cfg.plant_hue + plants[i, 4] + drift)),
                175.0,
                min(255.0, max(0.0, 128.0 + plants[i, 5])),
            ]
        )
        hsv = _HAZE_HSV + (hsv - _HAZE_HSV) * factor[i]
        rgb = _hsv1(hsv[0], hsv[1], hsv[2])
        draw.draw_ellipse(img, u[i], v[i], rx[i], ry[i], rgb)
        if factor[i] >= 0.5:
            draw.draw_ellipse(mask, u[i], v[i], rx[i], ry[i], 255)


def _label_vp(cfg: FieldConfig, pose: Pose) -> Optional[tuple]:
    """Vanishing point of the row tangent, or None when no crop lies ahead."""
    d = cfg.row_direction(pose.y)
    heading_fwd = np.array([math.cos(pose.heading), math.sin(pose.heading), 0.0])
    along = float(heading_fwd @ d)
    remaining = cfg.row_length_m - pose.y if along >= 0.0 else pose.y
    if remaining < 0.25:
        return None
    vp = vanishing_point(d if along >= 0.0 else -d, pose, cfg.camera)
    if vp is None:
        return None
    w, h = cfg.camera.width, cfg.camera.height
    if not (-w <= vp[0] <= 2 * w and -h <= vp[1] <= 2 * h):
        return None
    return vp


def gen_field_frame(
    cfg: FieldConfig, pose: Pose, seed: int, hours: float = 0.0
) -> FrameWithLabels:
    """Render one labeled frame from `pose`.

    Deterministic in (cfg, pose, seed, hours). `hours` advances the slow
    illumination drift; the per-frame seed only feeds sensor noise.
    """
    if not cfg.pose_in_bounds(pose):
        raise ValueError(
            f"pose ({pose.x:.2f}, {pose.y:.2f}) is outside the field plus headland"
        )
    img, X, Y, ground = _ground_and_sky(cfg, pose, hours)
    _paint_weeds(cfg, pose, img, X, Y, ground, hours)
    mask = np.zeros(img.shape[:2], dtype=np.uint8)
    _paint_plants(cfg, pose, img, mask, hours)

    near = _near_foliage(cfg, pose)
    if near.any():
        h, w = near.shape
        tex = lattice_noise(
            np.broadcast_to(np.arange(w, dtype=np.float64), (h, w))[near],
            np.broadcast_to(np.arange(h, dtype=np.float64)[:, None], (h, w))[near],
            9.0,
            cfg.world_seed * 7 + 5,
        )
        img[near] = _hsv1(62.0, 55.0, 30.0)[None, :] * (0.8 + 0.5 * tex)[:, None]
        mask[near] = 0

    rng = rng_for(seed, 101)
    img = img * cfg.base_v_scale + rng.normal(0.0, 2.2, size=img.shape)
    image = np.clip(np.round(img), 0, 255).astype(np.uint8)

    vp = _label_vp(cfg, pose)
    aisle = int(np.clip(round(pose.x / cfg.aisle_width_m - 0.5), 0, cfg.n_rows - 2))
    meta = {
        "pose": [pose.x, pose.y, pose.heading],
        "hours": hours,
        "offset": float(pose.x - cfg.aisle_center_x(aisle, pose.y)),
        "distance_to_end": float(cfg.row_length_m - pose.y),
    }
    return FrameWithLabels(
        image=image, vp=vp, row_mask=mask, circles=(), seed=seed, meta=meta
    )
