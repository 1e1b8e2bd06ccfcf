"""Docking-station detection by circle definition.

Bright blobs become contours; a contour is a circle candidate when its
minimum enclosing circle is tight (low variance of point-to-center distance)
and its radius is plausible. Candidates must then sit on red pixels (the
station's dot pattern); if nothing survives, a gradient-voting circle Hough
gets a chance before the caller is told to keep driving straight.
"""

import random
from dataclasses import dataclass, field

import numpy as np

from . import imgcore as ic
from .rowdetect.contour import find_contours


@dataclass(frozen=True)
class CircleCandidate:
    cx: float
    cy: float
    r: float
    ofs: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"radius must be positive, got {self.r}")
        if self.ofs < 0:
            raise ValueError(f"ofs must be nonnegative, got {self.ofs}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)


@dataclass(frozen=True)
class DefCircleParams:
    min_pts: int = 20
    max_ofs: float = 100.0
    min_r: float = 10.0
    max_r: float = 100000.0
    binarize_t: int = 180
    red_band: ic.HsvRange = field(default_factory=lambda: ic.RED_DOCK)
    red_area_frac: float = 0.3
    neighborhood_factor: float = 2.0
    border_margin: float = 2.0
    width: int = 360
    height: int = 240
    clahe_clip: float = 2.0
    clahe_tiles: tuple[int, int] = (8, 8)
    hough_r_min: int = 8
    hough_r_max: int = 60
    hough_vote_frac: float = 0.6
    blue_filter: bool = False
    blue_band: ic.HsvRange = field(default_factory=lambda: ic.HsvRange.single(100, 80, 60, 130, 255, 255))
    blue_reach: float = 4.0

    def __post_init__(self):
        if self.min_pts < 3:
            raise ValueError("min_pts must be at least 3")
        if self.min_r >= self.max_r:
            raise ValueError("min_r must be below max_r")


@dataclass(frozen=True)
class DockResult:
    accepted: tuple[CircleCandidate, ...]
    target: tuple[float, float] | None
    directive: str | None

    def __post_init__(self):
        if (self.target is None) == (self.directive is None):
            raise ValueError("exactly one of target/directive must be set")
        if bool(self.accepted) != (self.target is not None):
            raise ValueError("target present iff circles accepted")


DRIVE_STRAIGHT = "straight"


# ---------------------------------------------------------------------------
# minimum enclosing circle (move-to-front Welzl, deterministic shuffle)


def _contains(c, p) -> bool:
    return np.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * (1 + 1e-12) + 1e-12


def _diameter_circle(a, b):
    cx, cy = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
    r = max(np.hypot(a[0] - cx, a[1] - cy), np.hypot(b[0] - cx, b[1] - cy))
    return (cx, cy, r)


def _circumcircle(a, b, c):
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if d == 0:
        return None
    a2, b2, c2 = a[0] ** 2 + a[1] ** 2, b[0] ** 2 + b[1] ** 2, c[0] ** 2 + c[1] ** 2
    ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d
    uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d
    r = max(
        np.hypot(a[0] - ux, a[1] - uy),
        np.hypot(b[0] - ux, b[1] - uy),
        np.hypot(c[0] - ux, c[1] - uy),
    )
    return (ux, uy, r)


def _circle_two_fixed(pts, p, q):
    circ = _diameter_circle(p, q)
    left = right = None
    px, py = p
    dx, dy = q[0] - px, q[1] - py
    for r_ in pts:
        if _contains(circ, r_):
            continue
        cross = dx * (r_[1] - py) - dy * (r_[0] - px)
        c = _circumcircle(p, q, r_)
        if c is None:
            continue
        cc = dx * (c[1] - py) - dy * (c[0] - px)
        if cross > 0 and (left is None or cc > dx * (left[1] - py) - dy * (left[0] - px)):
            left = c
        elif cross < 0 and (right is None or cc < dx * (right[1] - py) - dy * (right[0] - px)):
            right = c
    if left is None:
        return circ if right is None else right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_one_fixed(pts, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(pts):
        if not _contains(c, q):
            c = _diameter_circle(p, q) if c[2] == 0.0 else _circle_two_fixed(pts[: i + 1], p, q)
    return c


def min_enclosing_circle(points) -> tuple[tuple[float, float], float]:
    """Smallest circle containing every point (expected linear time)."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if not pts:
        raise ValueError("no points")
    shuffled = pts[:]
    random.Random(177).shuffle(shuffled)
    c = None
    for i, p in enumerate(shuffled):
        if c is None or not _contains(c, p):
            c = _circle_one_fixed(shuffled[: i + 1], p)
    return ((c[0], c[1]), c[2])


def distance_variance(points, center) -> float:
    """Population variance of point-to-center Euclidean distances."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("no points")
    d = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    return float(np.var(d))


# ---------------------------------------------------------------------------
# red-neighborhood validation


def red_area_near(hsv: np.ndarray, cand: CircleCandidate, red: ic.HsvRange, factor: float = 2.0) -> int:
    """Red-band pixel count inside the disk of radius factor*r around cn."""
    hsv = ic.as_rgb(hsv)
    h, w = hsv.shape[:2]
    rr = factor * cand.r
    x0 = max(0, int(np.floor(cand.cx - rr)))
    x1 = min(w - 1, int(np.ceil(cand.cx + rr)))
    y0 = max(0, int(np.floor(cand.cy - rr)))
    y1 = min(h - 1, int(np.ceil(cand.cy + rr)))
    if x1 < x0 or y1 < y0:
        return 0
    sub = ic.in_range(hsv[y0 : y1 + 1, x0 : x1 + 1], red)
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    inside = (xx - cand.cx) ** 2 + (yy - cand.cy) ** 2 <= rr * rr
    return int(np.count_nonzero((sub > 0) & inside))


def _passes_color_gates(hsv, cand: CircleCandidate, params: DefCircleParams) -> bool:
    floor = params.red_area_frac * np.pi * cand.r * cand.r
    if red_area_near(hsv, cand, params.red_band, params.neighborhood_factor) <= floor:
        return False
    if params.blue_filter:
        blue = red_area_near(hsv, cand, params.blue_band, params.blue_reach)
        if blue == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# circle Hough fallback


def hough_circles(
    gray: np.ndarray,
    r_min: int = 8,
    r_max: int = 60,
    vote_thresh: float = 0.6,
    canny_low: float = 50.0,
    canny_high: float = 150.0,
) -> list[CircleCandidate]:
    """Gradient-direction circle voting; strongest candidates first.

    vote_thresh is the accepted fraction of a perfect perimeter's votes.
    """
    gray = ic.as_gray(gray)
    if r_min >= r_max:
        raise ValueError("r_min must be below r_max")
    edges = ic.canny(gray, canny_low, canny_high)
    ys, xs = np.nonzero(edges)
    if len(xs) == 0:
        return []
    h, w = gray.shape
    gx, gy = ic.sobel_gradients(gray)
    mag = np.hypot(gx[ys, xs], gy[ys, xs])
    mag[mag == 0] = 1.0
    ux, uy = gx[ys, xs] / mag, gy[ys, xs] / mag
    radii = np.arange(int(r_min), int(r_max) + 1)
    acc = np.zeros((h, w, radii.size), dtype=np.float32)
    for sign in (1.0, -1.0):
        for ri, r in enumerate(radii):
            cx = np.round(xs + sign * r * ux).astype(np.intp)
            cy = np.round(ys + sign * r * uy).astype(np.intp)
            ok = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
            np.add.at(acc, (cy[ok], cx[ok], ri), 1.0)
    from scipy import ndimage

    # quantization smears votes over neighboring bins; pool before testing
    pooled = ndimage.uniform_filter(acc, size=3, mode="constant") * 27.0
    perimeter = 2.0 * np.pi * radii
    strength = pooled / perimeter.astype(np.float32)
    peaks = (strength == ndimage.maximum_filter(strength, size=3, mode="nearest")) & (
        pooled >= vote_thresh * perimeter - 0.5
    )
    py, px, pr = np.nonzero(peaks)
    if len(py) == 0:
        return []
    s = strength[py, px, pr]
    order = np.lexsort((pr, px, py, -s))
    out = []
    for i in order:
        ccx, ccy, r = float(px[i]), float(py[i]), float(radii[pr[i]])
        d = np.hypot(xs - ccx, ys - ccy)
        support = np.abs(d - r) <= 1.5
        if not support.any():
            continue
        ofs = float(np.var(d[support]))
        out.append(CircleCandidate(ccx, ccy, r, ofs))
    return dedup_candidates(out, preserve_order=True)


# ---------------------------------------------------------------------------
# candidate selection


def fully_inside(cand: CircleCandidate, width: int, height: int, margin: float = 2.0) -> bool:
    """True when the fitted circle extent stays clear of the frame border."""
    return (
        cand.cx - cand.r >= margin
        and cand.cx + cand.r <= width - 1 - margin
        and cand.cy - cand.r >= margin
        and cand.cy + cand.r <= height - 1 - margin
    )


def dedup_candidates(cands, preserve_order: bool = False) -> list[CircleCandidate]:
    """Merge near-coincident circles (centers closer than half the larger
    radius), keeping the lower-ofs one."""
    order = cands if preserve_order else sorted(cands, key=lambda c: (c.ofs, c.r, c.cx, c.cy))
    kept = []
    for c in order:
        if all(
            np.hypot(c.cx - k.cx, c.cy - k.cy) >= max(c.r, k.r) / 2.0 for k in kept
        ):
            kept.append(c)
    return kept


def contour_candidates(binary: np.ndarray, params: DefCircleParams) -> list[CircleCandidate]:
    """Circle candidates from boundary geometry alone.

    Overlapping candidates are all returned; deduplication is left to the
    caller so it can run after any color validation.
    """
    h, w = ic.as_gray(binary).shape
    m = params.border_margin
    out = []
    for contour in find_contours(binary):
        if len(contour.points) <= params.min_pts:
            continue
        center, r = min_enclosing_circle(contour.points)
        if not params.min_r < r <= params.max_r:
            continue
        # a circle clipped by the frame edge has biased geometry: the
        # enclosing circle of the visible arc lands inside the frame, so
        # test the fitted extent rather than the contour points
        if not fully_inside(CircleCandidate(center[0], center[1], r, 0.0), w, h, m):
            continue
        ofs = distance_variance(contour.points, center)
        if ofs < params.max_ofs:
            out.append(CircleCandidate(center[0], center[1], r, ofs))
    return out


def dock_target(circles) -> tuple[float, float]:
    """Arithmetic mean of circle centers."""
    circles = list(circles)
    if not circles:
        raise ValueError("no circles")
    return (
        float(np.mean([c.cx for c in circles])),
        float(np.mean([c.cy for c in circles])),
    )


def def_circle(frame: np.ndarray, params: DefCircleParams = DefCircleParams()) -> DockResult:
    """Full detection pass over one RGB frame.

    Geometric candidates are validated against red pixels on the original
    (non-equalized) colors; the Hough stage runs only when that leaves
    nothing, and an empty final set yields the drive-straight directive.
    """
    rgb = ic.as_rgb(frame)
    if rgb.shape[:2] != (params.height, params.width):
        rgb = ic.resize(rgb, params.width, params.height)
    equalized = ic.clahe(rgb, params.clahe_clip, params.clahe_tiles)
    gray = ic.value_channel(equalized)
    binary = ic.binarize(gray, params.binarize_t)
    hsv = ic.rgb_to_hsv(rgb)

    # gate first, dedup after: a sloppy bright blob can sit closer to ideal
    # roundness than the beacon it overlaps, and deduping on geometry alone
    # would let it swallow the real circle before the color check kills it
    accepted = dedup_candidates(
        [c for c in contour_candidates(binary, params) if _passes_color_gates(hsv, c, params)]
    )
    if not accepted:
        fallback = hough_circles(
            gray, params.hough_r_min, params.hough_r_max, params.hough_vote_frac
        )
        accepted = dedup_candidates(
            [
                c
                for c in fallback
                if fully_inside(c, params.width, params.height, params.border_margin)
                and _passes_color_gates(hsv, c, params)
            ],
            preserve_order=True,
        )
    if not accepted:
        return DockResult((), None, DRIVE_STRAIGHT)
    accepted = sorted(accepted, key=lambda c: (c.cx, c.cy))
    return DockResult(tuple(accepted), dock_target(accepted), None)
