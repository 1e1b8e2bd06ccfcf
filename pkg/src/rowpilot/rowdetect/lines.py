"""Vanishing-point baselines: probabilistic Hough segments, a compact
gradient-orientation segment detector, and corner+RANSAC line fitting."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..imgcore import as_gray, sobel_gradients
from .contour import TargetPoint


class NoVanishingPoint(ValueError):
    """No usable pair of cropline candidates was found."""


@dataclass(frozen=True)
class Segment:
    x0: float
    y0: float
    x1: float
    y1: float
    weight: float = 1.0

    @property
    def length(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    @property
    def slope(self) -> float:
        dx = self.x1 - self.x0
        if dx == 0:
            return float("inf")
        return (self.y1 - self.y0) / dx

    @property
    def mid_x(self) -> float:
        return (self.x0 + self.x1) / 2.0


def slope_filter(segments, center_x: float, s_min: float = 0.3, s_max: float = 5.0) -> list:
    """Keep cropline-plausible segments.

    Left of center must slope up-right (negative in image coords), right of
    center up-left (positive); magnitudes outside [s_min, s_max] are noise
    (horizontals, stems).
    """
    out = []
    for s in segments:
        m = s.slope
        if not np.isfinite(m):
            continue
        if not s_min <= abs(m) <= s_max:
            continue
        if (s.mid_x < center_x) == (m < 0):
            out.append(s)
    return out


def _intersect(p0, d0, p1, d1) -> tuple[float, float]:
    det = d1[0] * d0[1] - d0[0] * d1[1]
    if abs(det) < 1e-12:
        raise NoVanishingPoint("candidate lines are parallel")
    t = ((p1[0] - p0[0]) * -d1[1] + (p1[1] - p0[1]) * d1[0]) / det
    return (float(p0[0] + t * d0[0]), float(p0[1] + t * d0[1]))


def _segment_ray(s: Segment):
    return np.array([s.x0, s.y0], dtype=float), np.array([s.x1 - s.x0, s.y1 - s.y0], dtype=float)


def _check_extent(x: float, y: float, w: int, h: int, margin: float = 1.0) -> None:
    if not (-margin * w <= x <= (1 + margin) * w and -margin * h <= y <= (1 + margin) * h):
        raise NoVanishingPoint(f"intersection ({x:.0f},{y:.0f}) far outside frame")


def _pick_sides(segments, w: int):
    left = [s for s in segments if s.mid_x < w / 2.0]
    right = [s for s in segments if s.mid_x >= w / 2.0]
    if not left or not right:
        raise NoVanishingPoint("need a candidate on each side")
    key = lambda s: (s.weight, s.length)
    return max(left, key=key), max(right, key=key)


def _weighted_tls(points: np.ndarray, weights: np.ndarray):
    """Total-least-squares line through weighted points: (centroid, direction)."""
    wsum = weights.sum()
    c = (points * weights[:, None]).sum(axis=0) / wsum
    d = points - c
    cov = (d * weights[:, None]).T @ d / wsum
    vals, vecs = np.linalg.eigh(cov)
    return c, vecs[:, int(np.argmax(vals))]


# ---------------------------------------------------------------------------
# probabilistic Hough


@dataclass(frozen=True)
class PhtParams:
    rho: float = 2.0
    theta_deg: float = 2.0
    votes: int = 16
    min_len: float = 20.0
    max_gap: int = 8


def pht_segments(edges: np.ndarray, rng=None, params: PhtParams = PhtParams()) -> list[Segment]:
    """Progressive probabilistic Hough: random voting, walk, unvote, repeat."""
    edges = as_gray(edges)
    if rng is None:
        rng = np.random.default_rng(0)
    pts = np.argwhere(edges > 0)
    if len(pts) == 0:
        return []
    h, w = edges.shape
    diag = float(np.ceil(np.hypot(h, w)))
    thetas = np.deg2rad(np.arange(0.0, 180.0, params.theta_deg))
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    cols = np.arange(thetas.size)
    n_rho = int(np.ceil(2 * diag / params.rho)) + 2
    acc = np.zeros((n_rho, thetas.size), dtype=np.int32)
    alive = edges > 0
    voted = np.zeros_like(alive)
    segments = []

    def _bins(x, y):
        return np.round((x * cos_t + y * sin_t + diag) / params.rho).astype(np.intp)

    for i in rng.permutation(len(pts)):
        y, x = int(pts[i][0]), int(pts[i][1])
        if not alive[y, x]:
            continue
        rbins = _bins(x, y)
        acc[rbins, cols] += 1
        voted[y, x] = True
        j = int(np.argmax(acc[rbins, cols]))
        if acc[rbins[j], j] < params.votes:
            continue
        dx, dy = -sin_t[j], cos_t[j]
        # real edges wobble a pixel or two around the fitted line, so the
        # walk also accepts hits one pixel to either side of the ideal track
        if abs(dx) >= abs(dy):
            perp = ((0, 1), (0, -1))
        else:
            perp = ((1, 0), (-1, 0))
        run = [(x, y)]
        ends = []
        for sgn in (1.0, -1.0):
            last = (x, y)
            gap, t = 0, 1
            while True:
                xi = int(round(x + sgn * dx * t))
                yi = int(round(y + sgn * dy * t))
                t += 1
                if not (0 <= xi < w and 0 <= yi < h):
                    break
                hit = None
                if alive[yi, xi]:
                    hit = (xi, yi)
                else:
                    for ox, oy in perp:
                        xn, yn = xi + ox, yi + oy
                        if 0 <= xn < w and 0 <= yn < h and alive[yn, xn]:
                            hit = (xn, yn)
                            break
                if hit is not None:
                    last = hit
                    run.append(hit)
                    gap = 0
                else:
                    gap += 1
                    if gap > params.max_gap:
                        break
            ends.append(last)
        for px, py in run:
            if alive[py, px]:
                alive[py, px] = False
                if voted[py, px]:
                    acc[_bins(px, py), cols] -= 1
                    voted[py, px] = False
        (ax, ay), (bx, by) = ends
        seg = Segment(float(ax), float(ay), float(bx), float(by), weight=float(len(run)))
        if seg.length >= params.min_len:
            segments.append(seg)
    return segments


def pht_vanishing(
    edges: np.ndarray,
    rng=None,
    params: PhtParams = PhtParams(),
    s_min: float = 0.3,
    s_max: float = 5.0,
) -> TargetPoint:
    """Strongest slope-plausible line per side, intersected."""
    edges = as_gray(edges)
    h, w = edges.shape
    segs = slope_filter(pht_segments(edges, rng, params), w / 2.0, s_min, s_max)
    if not segs:
        raise NoVanishingPoint("no segments after slope filtering")
    lbest, rbest = _pick_sides(segs, w)
    x, y = _intersect(*_segment_ray(lbest), *_segment_ray(rbest))
    _check_extent(x, y, w, h)
    return TargetPoint(x, y, kind="vanishing")


# ---------------------------------------------------------------------------
# compact segment detector


@dataclass(frozen=True)
class LsdParams:
    mag_floor: float = 8.0
    angle_tol_deg: float = 22.5
    min_len: float = 15.0
    min_region: int = 20


def _circ_diff(a: float, b: float) -> float:
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def lsd_segments(gray: np.ndarray, params: LsdParams = LsdParams()) -> list[Segment]:
    """Grow regions of agreeing gradient orientation, fit each by its axis."""
    gray = as_gray(gray)
    gx, gy = sobel_gradients(gray)
    mag = np.hypot(gx, gy) * 0.25
    ang = np.mod(np.degrees(np.arctan2(gy, gx)), 180.0)
    strong = mag > params.mag_floor
    h, w = gray.shape
    used = ~strong
    sy, sx = np.nonzero(strong)
    if len(sx) == 0:
        return []
    order = np.argsort(-mag[sy, sx], kind="stable")
    segments = []
    for idx in order:
        y0, x0 = int(sy[idx]), int(sx[idx])
        if used[y0, x0]:
            continue
        used[y0, x0] = True
        region = [(x0, y0)]
        a0 = np.deg2rad(2.0 * ang[y0, x0])
        ssin, scos = np.sin(a0), np.cos(a0)
        stack = [(x0, y0)]
        while stack:
            cx, cy = stack.pop()
            mean_ang = np.degrees(np.arctan2(ssin, scos)) / 2.0 % 180.0
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h and not used[ny, nx]:
                        if _circ_diff(ang[ny, nx], mean_ang) <= params.angle_tol_deg:
                            used[ny, nx] = True
                            region.append((nx, ny))
                            a = np.deg2rad(2.0 * ang[ny, nx])
                            ssin += np.sin(a)
                            scos += np.cos(a)
                            stack.append((nx, ny))
        if len(region) < params.min_region:
            continue
        pts = np.asarray(region, dtype=float)
        c, direction = _weighted_tls(pts, np.ones(len(pts)))
        proj = (pts - c) @ direction
        p0 = c + direction * proj.min()
        p1 = c + direction * proj.max()
        seg = Segment(p0[0], p0[1], p1[0], p1[1], weight=float(len(region)))
        if seg.length >= params.min_len:
            segments.append(seg)
    return segments


def lsd_vanishing(
    gray: np.ndarray,
    params: LsdParams = LsdParams(),
    s_min: float = 0.3,
    s_max: float = 5.0,
) -> TargetPoint:
    """Slope-filtered segments merged per side by length-weighted fit."""
    gray = as_gray(gray)
    h, w = gray.shape
    segs = slope_filter(lsd_segments(gray, params), w / 2.0, s_min, s_max)
    left = [s for s in segs if s.mid_x < w / 2.0]
    right = [s for s in segs if s.mid_x >= w / 2.0]
    if not left or not right:
        raise NoVanishingPoint("need a segment on each side")

    def _merge(side):
        pts = np.array([[q.x0, q.y0] for q in side] + [[q.x1, q.y1] for q in side])
        wts = np.array([q.length for q in side] * 2)
        return _weighted_tls(pts, wts)

    x, y = _intersect(*_merge(left), *_merge(right))
    _check_extent(x, y, w, h)
    return TargetPoint(x, y, kind="vanishing")


# ---------------------------------------------------------------------------
# corner features + RANSAC


@dataclass(frozen=True)
class FpeParams:
    max_corners: int = 120
    quality: float = 0.01
    nms_size: int = 5
    ransac_iters: int = 200
    inlier_px: float = 2.0
    min_inliers: int = 5


def harris_corners(gray: np.ndarray, params: FpeParams = FpeParams()) -> np.ndarray:
    """Corner coordinates (x, y), strongest response first."""
    gray = as_gray(gray)
    gx, gy = sobel_gradients(gray)
    ixx = ndimage.uniform_filter(gx * gx, size=3, mode="nearest")
    iyy = ndimage.uniform_filter(gy * gy, size=3, mode="nearest")
    ixy = ndimage.uniform_filter(gx * gy, size=3, mode="nearest")
    resp = ixx * iyy - ixy * ixy - 0.04 * (ixx + iyy) ** 2
    peak = resp.max()
    if peak <= 0:
        return np.empty((0, 2))
    local = resp == ndimage.maximum_filter(resp, size=params.nms_size, mode="nearest")
    keep = local & (resp > params.quality * peak)
    ys, xs = np.nonzero(keep)
    order = np.argsort(-resp[ys, xs], kind="stable")[: params.max_corners]
    return np.stack([xs[order], ys[order]], axis=1).astype(float)


def _ransac_line(points: np.ndarray, rng, params: FpeParams):
    n = len(points)
    if n < 2:
        raise NoVanishingPoint("too few corner features")
    best_count, best_inliers = 0, None
    for _ in range(params.ransac_iters):
        i, j = rng.choice(n, size=2, replace=False)
        p, q = points[i], points[j]
        d = q - p
        norm = np.hypot(d[0], d[1])
        if norm < 1e-9:
            continue
        normal = np.array([-d[1], d[0]]) / norm
        dist = np.abs((points - p) @ normal)
        inliers = dist <= params.inlier_px
        count = int(inliers.sum())
        if count > best_count:
            best_count, best_inliers = count, inliers
    if best_inliers is None or best_count < params.min_inliers:
        raise NoVanishingPoint(f"best line has {best_count} inliers")
    return _weighted_tls(points[best_inliers], np.ones(best_count))


def fpe_vanishing(gray: np.ndarray, rng=None, params: FpeParams = FpeParams()) -> TargetPoint:
    """Corners split at the vertical midline, one RANSAC line per side."""
    gray = as_gray(gray)
    h, w = gray.shape
    if rng is None:
        rng = np.random.default_rng(0)
    corners = harris_corners(gray, params)
    left = corners[corners[:, 0] < w / 2.0]
    right = corners[corners[:, 0] >= w / 2.0]
    if len(left) < params.min_inliers or len(right) < params.min_inliers:
        raise NoVanishingPoint("too few corners on one side")
    x, y = _intersect(*_ransac_line(left, rng, params), *_ransac_line(right, rng, params))
    _check_extent(x, y, w, h)
    return TargetPoint(x, y, kind="vanishing")
