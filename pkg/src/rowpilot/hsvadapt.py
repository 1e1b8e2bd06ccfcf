"""Self-adjusting HSV calibration.

While the robot tracks the row centerline closely, small random pixel samples
around the two cropline centroids estimate the crop's current mean color.
The active band's hue bounds follow that mean between calibration windows;
when the hue moves too far in one step, an Otsu split of the full-frame hue
histogram rebuilds the band from scratch.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .imgcore import HsvRange, as_rgb

HUE_BINS = 180
FALLBACK_DELTA = 30.0
PLANT_HUE_BAND = (21, 90)


class DegenerateHistogram(ValueError):
    """Hue histogram cannot be split into two classes."""


@dataclass(frozen=True)
class CalibrationSample:
    timestamp: float
    c1: tuple[float, float]
    c2: tuple[float, float]
    areas: tuple[int, int]
    mean_hsv: tuple[float, float, float]


@dataclass
class CalibrationState:
    active: HsvRange
    samples: deque = field(default_factory=lambda: deque(maxlen=10))
    prev_mean_h: float | None = None
    fallback_needed: bool = False


# ---------------------------------------------------------------------------
# circular hue arithmetic (hue lives on a mod-180 circle)


def circ_mean_h(hues, weights=None) -> float:
    h = np.asarray(hues, dtype=np.float64)
    if h.size == 0:
        raise ValueError("no hues to average")
    w = np.ones_like(h) if weights is None else np.asarray(weights, dtype=np.float64)
    ang = np.deg2rad(h * 2.0)
    s = float((np.sin(ang) * w).sum())
    c = float((np.cos(ang) * w).sum())
    if abs(s) < 1e-12 and abs(c) < 1e-12:
        raise ValueError("hues cancel; circular mean undefined")
    mean = float(np.degrees(np.arctan2(s, c)) / 2.0 % 180.0)
    return 0.0 if mean >= 180.0 - 1e-9 else mean


def circ_diff_h(a: float, b: float) -> float:
    """Signed shortest hue step from b to a, in (-90, 90]."""
    d = (a - b) % 180.0
    return d - 180.0 if d > 90.0 else d


# ---------------------------------------------------------------------------
# pixel sampling


def sample_radius(area_avg: float) -> float:
    """Radius of a circle holding one fifth of the average contour area."""
    return float(np.sqrt(area_avg / (5.0 * np.pi)))


def sample_pixels(hsv: np.ndarray, center, area_avg: float, rng=None, n: int = 50):
    """Mean (H, S, V) over n uniform random pixels inside the sample circle."""
    hsv = as_rgb(hsv)
    if rng is None:
        rng = np.random.default_rng(0)
    r = sample_radius(area_avg)
    if r < 1.0:
        raise ValueError(f"sample circle radius {r:.2f} px is degenerate")
    h, w = hsv.shape[:2]
    u = rng.random(n)
    theta = rng.random(n) * 2.0 * np.pi
    rad = r * np.sqrt(u)
    xs = np.clip(np.round(center[0] + rad * np.cos(theta)), 0, w - 1).astype(np.intp)
    ys = np.clip(np.round(center[1] + rad * np.sin(theta)), 0, h - 1).astype(np.intp)
    px = hsv[ys, xs].astype(np.float64)
    mean_h = circ_mean_h(px[:, 0])
    return (mean_h, float(px[:, 1].mean()), float(px[:, 2].mean()))


def record_sample(
    hsv: np.ndarray,
    c1,
    c2,
    areas,
    deviation: float,
    state: CalibrationState,
    rng=None,
    timestamp: float = 0.0,
) -> CalibrationState:
    """Append one calibration sample when tracking is tight (|dev| < 5°).

    Pixels are drawn 50 per centroid circle and pooled; a circle too small
    to sample skips the frame without touching the state.
    """
    if abs(deviation) >= 5.0 or min(areas) <= 0:
        return state
    area_avg = (areas[0] + areas[1]) / 2.0
    if sample_radius(area_avg) < 1.0:
        return state
    if rng is None:
        rng = np.random.default_rng(0)
    m1 = sample_pixels(hsv, c1, area_avg, rng)
    m2 = sample_pixels(hsv, c2, area_avg, rng)
    mean = (
        circ_mean_h([m1[0], m2[0]]),
        (m1[1] + m2[1]) / 2.0,
        (m1[2] + m2[2]) / 2.0,
    )
    state.samples.append(
        CalibrationSample(timestamp, tuple(c1), tuple(c2), (int(areas[0]), int(areas[1])), mean)
    )
    return state


def buffer_mean_h(state: CalibrationState) -> float | None:
    if not state.samples:
        return None
    return circ_mean_h([s.mean_hsv[0] for s in state.samples])


# ---------------------------------------------------------------------------
# range updates


def prior_update(state: CalibrationState) -> HsvRange:
    """Shift the active band's hue by the sampled drift.

    The first update only establishes the baseline. A step larger than
    FALLBACK_DELTA raises the fallback flag instead of shifting, leaving the
    range untouched until the histogram split runs.
    """
    mean = buffer_mean_h(state)
    if mean is None:
        return state.active
    if state.prev_mean_h is None:
        state.prev_mean_h = mean
        return state.active
    delta = circ_diff_h(mean, state.prev_mean_h)
    if abs(delta) > FALLBACK_DELTA:
        state.fallback_needed = True
        return state.active
    step = int(round(delta))
    if step != 0:
        # the baseline only advances when a shift commits, so slow drift
        # accumulates across updates instead of vanishing in the rounding
        state.active = state.active.shifted_hue(step)
        state.prev_mean_h = mean
    state.fallback_needed = False
    return state.active


def hue_histogram(hsv: np.ndarray) -> np.ndarray:
    """180-bin pixel count histogram of the hue channel."""
    hsv = as_rgb(hsv)
    return np.bincount(hsv[..., 0].ravel(), minlength=HUE_BINS).astype(np.int64)


def otsu_threshold(hist: np.ndarray) -> int:
    """Cut index t maximizing between-class variance of [0..t] vs [t+1..179].

    Exact integer arithmetic; ties resolve to the lowest t.
    """
    hist = np.asarray(hist)
    if hist.ndim != 1 or hist.size != HUE_BINS or np.any(hist < 0):
        raise ValueError("expected a 180-bin nonnegative histogram")
    counts = [int(v) for v in hist]
    if sum(1 for v in counts if v) < 2:
        raise DegenerateHistogram("fewer than two occupied bins")
    # between-class variance at cut t is (m0*w1 - m1*w0)^2 / (w0*w1) up to a
    # constant factor; compare as exact fractions via cross-multiplication
    best_t, best_num, best_den = -1, 0, 1
    w0 = m0 = 0
    w_total = sum(counts)
    m_total = sum(i * v for i, v in enumerate(counts))
    for t in range(HUE_BINS - 1):
        w0 += counts[t]
        m0 += t * counts[t]
        w1 = w_total - w0
        if w0 == 0 or w1 == 0:
            continue
        m1 = m_total - m0
        num = (m0 * w1 - m1 * w0) ** 2
        den = w0 * w1
        if best_t < 0 or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def otsu_fallback(hsv: np.ndarray, old: HsvRange) -> HsvRange:
    """Rebuild hue bounds from a full-frame histogram split.

    The plant class is the side whose mean hue lands inside PLANT_HUE_BAND;
    its occupied extent becomes the new hue interval, with S and V bounds
    carried over from the old range's first band.
    """
    hist = hue_histogram(hsv)
    t = otsu_threshold(hist)
    sides = [(0, t), (t + 1, HUE_BINS - 1)]
    candidates = []
    for lo, hi in sides:
        seg = hist[lo : hi + 1]
        w = int(seg.sum())
        if w == 0:
            continue
        mean = float((np.arange(lo, hi + 1) * seg).sum() / w)
        if PLANT_HUE_BAND[0] <= mean <= PLANT_HUE_BAND[1]:
            candidates.append((lo, hi, mean))
    if not candidates:
        raise DegenerateHistogram("no class mean inside the plant hue band")
    if len(candidates) > 1:
        b = old.bands[0]
        center = (b[0] + b[3]) / 2.0
        candidates.sort(key=lambda c: abs(circ_diff_h(c[2], center)))
    lo, hi, _ = candidates[0]
    nz = np.nonzero(hist[lo : hi + 1])[0]
    h_lo, h_hi = lo + int(nz[0]), lo + int(nz[-1])
    _, ls, lv, _, hs, hv = old.bands[0]
    return HsvRange.single(h_lo, ls, lv, h_hi, hs, hv)


def apply_fallback(state: CalibrationState, hsv: np.ndarray) -> HsvRange:
    """Run the histogram split and clear the flag; keep the old range if the
    frame cannot be split."""
    try:
        state.active = otsu_fallback(hsv, state.active)
    except DegenerateHistogram:
        pass
    state.fallback_needed = False
    mean = buffer_mean_h(state)
    if mean is not None:
        state.prev_mean_h = mean
    return state.active
