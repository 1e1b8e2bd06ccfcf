"""Pixel-level primitives shared by every detector.

Images are plain numpy arrays: (h, w) uint8 for grayscale/masks, (h, w, 3)
uint8 for color. Masks are strictly {0, 255}. Hue lives in half-degrees
0..179 with S, V in 0..255, so published band constants apply directly.
Border handling is replicate everywhere.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class HsvRange:
    """Union of inclusive HSV bands (lowH,lowS,lowV,highH,highS,highV)."""

    bands: tuple[tuple[int, int, int, int, int, int], ...]

    def __post_init__(self):
        if not self.bands:
            raise ValueError("HsvRange needs at least one band")
        for b in self.bands:
            if len(b) != 6:
                raise ValueError(f"band must have 6 components, got {b}")
            lh, ls, lv, hh, hs, hv = b
            if not (0 <= lh <= hh <= 179):
                raise ValueError(f"bad hue bounds in band {b}")
            for lo, hi in ((ls, hs), (lv, hv)):
                if not (0 <= lo <= hi <= 255):
                    raise ValueError(f"bad S/V bounds in band {b}")

    @staticmethod
    def single(lh, ls, lv, hh, hs, hv) -> "HsvRange":
        return HsvRange(((int(lh), int(ls), int(lv), int(hh), int(hs), int(hv)),))

    def shifted_hue(self, delta: int) -> "HsvRange":
        """Translate hue bounds by delta, clamped to [0, 179]; S/V untouched."""
        out = []
        for lh, ls, lv, hh, hs, hv in self.bands:
            out.append((_clamp_h(lh + delta), ls, lv, _clamp_h(hh + delta), hs, hv))
        return HsvRange(tuple(out))


def _clamp_h(v) -> int:
    return int(min(179, max(0, round(v))))


# Field-calibrated green band for crop segmentation.
GREEN_DEFAULT = HsvRange.single(21, 43, 46, 77, 255, 172)
# Red dot pattern bands: facing the sun / under backlighting.
RED_SUN = HsvRange.single(139, 22, 154, 172, 143, 255)
RED_BACKLIGHT = HsvRange.single(0, 0, 61, 179, 89, 255)
# Wraparound red union used by the docking detector's neighborhood check.
RED_DOCK = HsvRange(((0, 0, 0, 30, 255, 255), (160, 0, 0, 179, 255, 255)))


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"degenerate rect {self}")


# ---------------------------------------------------------------------------
# validation helpers


def as_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected (h,w,3) uint8 image, got {img.shape} {img.dtype}")
    return img


def as_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError(f"expected (h,w) uint8 image, got {img.shape} {img.dtype}")
    return img


def as_mask(mask: np.ndarray) -> np.ndarray:
    mask = as_gray(mask)
    return mask


def to_mask(bool_arr: np.ndarray) -> np.ndarray:
    return np.where(bool_arr, np.uint8(255), np.uint8(0))


# ---------------------------------------------------------------------------
# color


def rgb_to_hsv_float(img: np.ndarray) -> np.ndarray:
    """Exact float HSV: H in half-degrees [0, 180), S and V in [0, 255]."""
    rgb = np.asarray(img, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = v - mn
    s = np.where(v > 0, 255.0 * delta / np.where(v > 0, v, 1), 0.0)
    # hue in degrees, sector by channel of the maximum
    safe = np.where(delta > 0, delta, 1)
    hr = (g - b) / safe
    hg = 2.0 + (b - r) / safe
    hb = 4.0 + (r - g) / safe
    h = np.where(v == r, hr, np.where(v == g, hg, hb)) * 60.0
    h = np.where(delta > 0, np.mod(h, 360.0), 0.0)
    return np.stack([h / 2.0, s, v], axis=-1)


def hsv_to_rgb_float(hsv: np.ndarray) -> np.ndarray:
    """Analytic inverse of rgb_to_hsv_float (same units)."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h = np.mod(hsv[..., 0] * 2.0, 360.0) / 60.0
    s = hsv[..., 1] / 255.0
    v = hsv[..., 2]
    i = np.floor(h)
    f = h - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """Convert an RGB image to 8-bit HSV (H 0..179 half-degrees)."""
    img = as_rgb(img)
    hsv = rgb_to_hsv_float(img)
    out = np.empty_like(img)
    out[..., 0] = np.mod(np.round(hsv[..., 0]), 180).astype(np.uint8)
    out[..., 1] = np.round(hsv[..., 1]).astype(np.uint8)
    out[..., 2] = np.round(hsv[..., 2]).astype(np.uint8)
    return out


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """8-bit inverse conversion (lossy where hue was quantized)."""
    hsv = np.asarray(hsv)
    if hsv.dtype != np.uint8:
        raise ValueError("expected uint8 HSV input")
    rgb = hsv_to_rgb_float(hsv.astype(np.float64))
    return np.clip(np.round(rgb), 0, 255).astype(np.uint8)


def rgb_to_gray(img: np.ndarray) -> np.ndarray:
    """Luma grayscale (ITU-R 601 weights)."""
    img = as_rgb(img)
    g = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    return np.clip(np.round(g), 0, 255).astype(np.uint8)


def value_channel(img: np.ndarray) -> np.ndarray:
    """Brightness as max(R,G,B): keeps saturated colors bright, unlike luma."""
    img = as_rgb(img)
    return img.max(axis=2)


# ---------------------------------------------------------------------------
# filtering


def gaussian_kernel1d(ksize: int, sigma: float | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian; sigma defaults to 0.3*((ksize-1)/2 - 1) + 0.8."""
    if ksize < 1 or ksize % 2 == 0:
        raise ValueError(f"ksize must be odd and >= 1, got {ksize}")
    if sigma is None:
        sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = (ksize - 1) // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, ksize: int = 25, sigma: float | None = None) -> np.ndarray:
    """Separable Gaussian with replicate borders; dimensions unchanged."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8 or arr.ndim not in (2, 3):
        raise ValueError(f"expected uint8 image, got {arr.shape} {arr.dtype}")
    k = gaussian_kernel1d(ksize, sigma)
    out = arr.astype(np.float64)
    if arr.ndim == 2:
        out = ndimage.correlate1d(out, k, axis=0, mode="nearest")
        out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    else:
        for c in range(arr.shape[2]):
            ch = ndimage.correlate1d(out[..., c], k, axis=0, mode="nearest")
            out[..., c] = ndimage.correlate1d(ch, k, axis=1, mode="nearest")
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def in_range(hsv: np.ndarray, rng: HsvRange) -> np.ndarray:
    """255 where the pixel lies inside any band (bands OR together)."""
    hsv = as_rgb(hsv)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    keep = np.zeros(hsv.shape[:2], dtype=bool)
    for lh, ls, lv, hh, hs, hv in rng.bands:
        keep |= (h >= lh) & (h <= hh) & (s >= ls) & (s <= hs) & (v >= lv) & (v <= hv)
    return to_mask(keep)


def morphology(mask: np.ndarray, op: str, ksize: int = 21) -> np.ndarray:
    """erode/dilate/open/close with a ksize x ksize square element."""
    mask = as_mask(mask)
    if ksize % 2 == 0 or ksize < 1:
        raise ValueError(f"ksize must be odd, got {ksize}")
    if op == "erode":
        return ndimage.minimum_filter(mask, size=ksize, mode="nearest")
    if op == "dilate":
        return ndimage.maximum_filter(mask, size=ksize, mode="nearest")
    if op == "open":
        return morphology(morphology(mask, "erode", ksize), "dilate", ksize)
    if op == "close":
        return morphology(morphology(mask, "dilate", ksize), "erode", ksize)
    raise ValueError(f"unknown morphology op {op!r}")


# ---------------------------------------------------------------------------
# edges

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


def sobel_gradients(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(gray, dtype=np.float64)
    gx = ndimage.correlate(g, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(g, _SOBEL_Y, mode="nearest")
    return gx, gy


def canny(gray: np.ndarray, low: float = 50.0, high: float = 150.0) -> np.ndarray:
    """Sobel + non-maximum suppression + hysteresis; thin {0,255} edge mask.

    Thresholds apply to gradient magnitude rescaled so a full 0..255 step
    measures 255.
    """
    gray = as_gray(gray)
    if low > high:
        raise ValueError(f"low ({low}) must be <= high ({high})")
    gx, gy = sobel_gradients(gray)
    mag = np.hypot(gx, gy) * 0.25  # Sobel gain for a unit step is 4
    ang = np.rad2deg(np.arctan2(gy, gx)) % 180.0

    # quantize direction to 0 / 45 / 90 / 135 and suppress non-maxima
    p = np.pad(mag, 1, mode="edge")
    c = p[1:-1, 1:-1]
    east, west = p[1:-1, 2:], p[1:-1, :-2]
    south, north = p[2:, 1:-1], p[:-2, 1:-1]
    se, nw = p[2:, 2:], p[:-2, :-2]
    sw, ne = p[2:, :-2], p[:-2, 2:]
    d = ((ang + 22.5) // 45.0).astype(np.int8) % 4
    # ties broken asymmetrically (> on one side) so step edges stay 1 px thin
    keep = np.where(
        d == 0, (c > west) & (c >= east),
        np.where(
            d == 1, (c > nw) & (c >= se),
            np.where(d == 2, (c > north) & (c >= south), (c > ne) & (c >= sw)),
        ),
    )
    thin = np.where(keep, mag, 0.0)

    strong = thin >= high
    weak = thin >= low
    if not strong.any():
        return np.zeros_like(gray)
    # keep weak pixels only when 8-connected to a strong seed
    lab, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    good = np.zeros(n + 1, dtype=bool)
    good[np.unique(lab[strong])] = True
    good[0] = False
    return to_mask(good[lab])


# ---------------------------------------------------------------------------
# contrast


def _clahe_channel(ch: np.ndarray, clip_limit: float, tiles: tuple[int, int]) -> np.ndarray:
    h, w = ch.shape
    nx, ny = tiles
    nx = max(1, min(nx, w))
    ny = max(1, min(ny, h))
    xb = np.linspace(0, w, nx + 1).astype(int)
    yb = np.linspace(0, h, ny + 1).astype(int)

    luts = np.empty((ny, nx, 256), dtype=np.float64)
    cxs = np.empty(nx)
    cys = np.empty(ny)
    ident = np.arange(256, dtype=np.float64)
    for ty in range(ny):
        for tx in range(nx):
            tile = ch[yb[ty] : yb[ty + 1], xb[tx] : xb[tx + 1]]
            npx = tile.size
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.float64)
            if np.count_nonzero(hist) <= 1:
                luts[ty, tx] = ident  # degenerate tile maps to itself
                continue
            limit = max(clip_limit * npx / 256.0, 1.0)
            excess = np.maximum(hist - limit, 0.0).sum()
            hist = np.minimum(hist, limit) + excess / 256.0
            cdf = np.cumsum(hist)
            luts[ty, tx] = cdf / cdf[-1] * 255.0
    cxs[:] = (xb[:-1] + xb[1:]) / 2.0
    cys[:] = (yb[:-1] + yb[1:]) / 2.0

    # bilinear blend of the 4 surrounding tile mappings, clamped at borders
    def _axis_weights(coords, centers):
        idx0 = np.clip(np.searchsorted(centers, coords) - 1, 0, len(centers) - 1)
        idx1 = np.clip(idx0 + 1, 0, len(centers) - 1)
        span = centers[idx1] - centers[idx0]
        t = np.where(span > 0, (coords - centers[idx0]) / np.where(span > 0, span, 1), 0.0)
        return idx0, idx1, np.clip(t, 0.0, 1.0)

    x0, x1, wx = _axis_weights(np.arange(w, dtype=np.float64), cxs)
    y0, y1, wy = _axis_weights(np.arange(h, dtype=np.float64), cys)
    X0 = np.broadcast_to(x0, (h, w))
    X1 = np.broadcast_to(x1, (h, w))
    WX = np.broadcast_to(wx, (h, w))
    Y0 = np.broadcast_to(y0[:, None], (h, w))
    Y1 = np.broadcast_to(y1[:, None], (h, w))
    WY = np.broadcast_to(wy[:, None], (h, w))
    v = ch.astype(np.intp)
    out = (
        luts[Y0, X0, v] * (1 - WY) * (1 - WX)
        + luts[Y0, X1, v] * (1 - WY) * WX
        + luts[Y1, X0, v] * WY * (1 - WX)
        + luts[Y1, X1, v] * WY * WX
    )
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def clahe(img: np.ndarray, clip_limit: float = 2.0, tiles: tuple[int, int] = (8, 8)) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization, per channel."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ValueError("clahe expects a uint8 image")
    if arr.ndim == 2:
        return _clahe_channel(arr, clip_limit, tiles)
    out = np.empty_like(arr)
    for c in range(arr.shape[2]):
        out[..., c] = _clahe_channel(arr[..., c], clip_limit, tiles)
    return out


# ---------------------------------------------------------------------------
# geometry


def _resize_coords(n_dst: int, n_src: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pixel-center source coordinates for bilinear resampling, clamped in-bounds."""
    scale = n_src / n_dst
    src = (np.arange(n_dst, dtype=np.float64) + 0.5) * scale - 0.5
    i0 = np.clip(np.floor(src), 0, n_src - 1).astype(np.intp)
    i1 = np.clip(i0 + 1, 0, n_src - 1)
    frac = np.clip(src - i0, 0.0, 1.0)
    return i0, i1, frac


def resize(img: np.ndarray, w: int, h: int) -> np.ndarray:
    """Bilinear resample to w x h; same-size calls copy bit-exactly."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ValueError("resize expects a uint8 image")
    if w < 1 or h < 1:
        raise ValueError(f"bad target size {w}x{h}")
    sh, sw = arr.shape[:2]
    if (sw, sh) == (w, h):
        return arr.copy()
    x0, x1, fx = _resize_coords(w, sw)
    y0, y1, fy = _resize_coords(h, sh)
    a = arr.astype(np.float64)
    if arr.ndim == 3:
        top = a[y0][:, x0] * (1 - fx)[None, :, None] + a[y0][:, x1] * fx[None, :, None]
        bot = a[y1][:, x0] * (1 - fx)[None, :, None] + a[y1][:, x1] * fx[None, :, None]
        out = top * (1 - fy)[:, None, None] + bot * fy[:, None, None]
    else:
        top = a[y0][:, x0] * (1 - fx) + a[y0][:, x1] * fx
        bot = a[y1][:, x0] * (1 - fx) + a[y1][:, x1] * fx
        out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def binarize(gray: np.ndarray, t: int) -> np.ndarray:
    """255 where value is strictly greater than t."""
    return to_mask(as_gray(gray) > t)


def binarize_band(gray: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Keep-band alternative: 255 where lo <= value <= hi."""
    g = as_gray(gray)
    return to_mask((g >= lo) & (g <= hi))


def roi_crop(img: np.ndarray, r: Rect) -> np.ndarray:
    """Exact pixel copy of the window; rect must lie inside the image."""
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    if r.x < 0 or r.y < 0 or r.x + r.width > w or r.y + r.height > h:
        raise ValueError(f"rect {r} outside {w}x{h} image")
    return arr[r.y : r.y + r.height, r.x : r.x + r.width].copy()


def bottom_roi(width: int, height: int, fraction: float = 0.6) -> Rect:
    """Row-navigation ROI: keep the lower `fraction` of the frame."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    rh = max(1, int(round(height * fraction)))
    return Rect(0, height - rh, width, rh)
