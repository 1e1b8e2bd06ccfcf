"""Contour/moment route: boundary tracing, centroids, the between-row target
point, and the green-area row-end rule."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=int)

# Moore neighborhood in clockwise screen order (y grows downward), from west.
_CLOCKWISE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))


class NoSecondCropline(ValueError):
    """Fewer than two usable crop components; caller holds its heading."""


@dataclass(frozen=True)
class Contour:
    """Outer boundary chain of one connected component, clockwise."""

    component_id: int
    points: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class MomentSet:
    m00: int
    m10: int
    m01: int


@dataclass(frozen=True)
class TargetPoint:
    x: float
    y: float
    kind: str = "contour"

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError(f"non-finite target ({self.x}, {self.y})")
        if self.kind not in ("contour", "vanishing"):
            raise ValueError(f"unknown target kind {self.kind!r}")


@dataclass(frozen=True)
class RegionStat:
    component_id: int
    area: int
    cx: float
    cy: float


def _label(mask: np.ndarray):
    return ndimage.label(np.asarray(mask) > 0, structure=_EIGHT)


def _trace(comp: np.ndarray) -> list[tuple[int, int]]:
    """Moore-neighbor boundary walk over one component (bool array)."""
    p = np.pad(comp, 1)
    ys, xs = np.nonzero(p)
    sx, sy = int(xs[0]), int(ys[0])  # topmost row, leftmost within it
    start = (sx, sy)
    b0 = (sx - 1, sy)  # west neighbor is background by start choice
    c, b = start, b0
    pts = [start]
    for _ in range(4 * len(xs) + 8):
        bi = _CLOCKWISE.index((b[0] - c[0], b[1] - c[1]))
        found = None
        for k in range(1, 9):
            dx, dy = _CLOCKWISE[(bi + k) % 8]
            nx, ny = c[0] + dx, c[1] + dy
            if p[ny, nx]:
                found = (nx, ny)
                pdx, pdy = _CLOCKWISE[(bi + k - 1) % 8]
                b = (c[0] + pdx, c[1] + pdy)
                break
        if found is None:
            break  # isolated pixel
        c = found
        if c == start and b == b0:
            break  # back where we began, entering the same way
        pts.append(c)
    uniq = list(dict.fromkeys(pts))
    return [(x - 1, y - 1) for x, y in uniq]


def find_contours(mask: np.ndarray) -> list[Contour]:
    """Outer boundary per 8-connected component, top-left component first."""
    lab, n = _label(mask)
    out = []
    for cid, sl in enumerate(ndimage.find_objects(lab), start=1):
        if sl is None:
            continue
        comp = lab[sl] == cid
        x0, y0 = sl[1].start, sl[0].start
        pts = tuple((x + x0, y + y0) for x, y in _trace(comp))
        out.append(Contour(cid, pts))
    return out


def region_moments(mask: np.ndarray, component: Contour) -> MomentSet:
    """Raw moments M00, M10, M01 over the filled component."""
    lab, n = _label(mask)
    if not 1 <= component.component_id <= n:
        raise ValueError(f"component {component.component_id} not in mask")
    ys, xs = np.nonzero(lab == component.component_id)
    if len(xs) == 0:
        raise ValueError("empty component")
    return MomentSet(int(len(xs)), int(xs.sum()), int(ys.sum()))


def centroid(m: MomentSet) -> tuple[float, float]:
    if m.m00 <= 0:
        raise ValueError("zero-area component has no centroid")
    return (m.m10 / m.m00, m.m01 / m.m00)


def region_stats(mask: np.ndarray, min_area: float = 0) -> list[RegionStat]:
    """Area and centroid per component in one labeling pass."""
    lab, n = _label(mask)
    if n == 0:
        return []
    ys, xs = np.nonzero(lab)
    ids = lab[ys, xs]
    areas = np.bincount(ids, minlength=n + 1)
    m10 = np.bincount(ids, weights=xs, minlength=n + 1)
    m01 = np.bincount(ids, weights=ys, minlength=n + 1)
    return [
        RegionStat(i, int(areas[i]), m10[i] / areas[i], m01[i] / areas[i])
        for i in range(1, n + 1)
        if areas[i] >= min_area
    ]


def contour_pair(
    mask: np.ndarray, min_area_fraction: float = 0.005
) -> tuple[RegionStat, RegionStat]:
    """The two cropline components flanking the vertical midline, left first.

    The two largest components above the area floor are paired; when both sit
    on the same side of the midline, the largest is paired with the largest
    opposite-side component instead.
    """
    mask = np.asarray(mask)
    h, w = mask.shape[:2]
    floor = min_area_fraction * mask.shape[0] * mask.shape[1]
    regions = region_stats(mask, min_area=floor)
    if len(regions) < 2:
        raise NoSecondCropline(f"{len(regions)} usable component(s)")
    regions.sort(key=lambda r: (-r.area, r.component_id))
    first, second = regions[0], regions[1]
    mid = w / 2.0
    if (first.cx < mid) == (second.cx < mid):
        opposite = [r for r in regions[1:] if (r.cx < mid) != (first.cx < mid)]
        if not opposite:
            raise NoSecondCropline("all components on one side")
        second = opposite[0]
    c1, c2 = sorted((first, second), key=lambda r: r.cx)
    return c1, c2


def contour_target(mask: np.ndarray, min_area_fraction: float = 0.005) -> TargetPoint:
    """Midpoint of the two cropline centroids, one on each side of center."""
    c1, c2 = contour_pair(mask, min_area_fraction)
    return TargetPoint((c1.cx + c2.cx) / 2.0, (c1.cy + c2.cy) / 2.0, kind="contour")


def green_area(mask: np.ndarray) -> int:
    """Foreground pixel count."""
    return int(np.count_nonzero(np.asarray(mask)))


def smoothed_area(history, window: int = 3) -> float:
    """Mean of the most recent `window` areas."""
    tail = list(history)[-window:]
    if not tail:
        raise ValueError("history is empty")
    return float(sum(tail)) / len(tail)


def row_end(history, threshold: float = 2300.0, window: int = 3) -> bool:
    """True when the smoothed green area falls below the threshold.

    Areas and threshold must share units (pixel counts, or fractions of the
    frame when corpora vary in resolution). Averaging over a few frames keeps
    single-frame dropouts from triggering a turn.
    """
    return smoothed_area(history, window) < threshold


def deviation_deg(target: TargetPoint, width: int, height: int) -> float:
    """Signed angle between image vertical and bottom-center -> target ray."""
    return float(np.degrees(np.arctan2(target.x - width / 2.0, height - target.y)))
