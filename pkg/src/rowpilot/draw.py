"""Tiny rasterizer for overlays and synthetic scenes (pure numpy, in place)."""

import numpy as np


def _put(img: np.ndarray, ys, xs, color) -> None:
    h, w = img.shape[:2]
    ys = np.asarray(ys, dtype=np.intp).ravel()
    xs = np.asarray(xs, dtype=np.intp).ravel()
    ok = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
    if img.ndim == 3:
        img[ys[ok], xs[ok]] = np.asarray(color, dtype=img.dtype)
    else:
        img[ys[ok], xs[ok]] = color


def draw_cross(img: np.ndarray, x: int, y: int, color, arm: int = 3) -> None:
    """Plus-shaped marker centered on (x, y); clipped at the border."""
    x, y = int(round(x)), int(round(y))
    span = np.arange(-arm, arm + 1)
    _put(img, np.full_like(span, y), x + span, color)
    _put(img, y + span, np.full_like(span, x), color)


def draw_disk(img: np.ndarray, cx: float, cy: float, r: float, color) -> None:
    """Filled circle; pixels whose centers fall within r."""
    h, w = img.shape[:2]
    x0 = max(0, int(np.floor(cx - r)))
    x1 = min(w - 1, int(np.ceil(cx + r)))
    y0 = max(0, int(np.floor(cy - r)))
    y1 = min(h - 1, int(np.ceil(cy + r)))
    if x1 < x0 or y1 < y0:
        return
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    _put(img, yy[inside], xx[inside], color)


def draw_ellipse(img: np.ndarray, cx: float, cy: float, rx: float, ry: float, color) -> None:
    """Filled axis-aligned ellipse."""
    h, w = img.shape[:2]
    x0 = max(0, int(np.floor(cx - rx)))
    x1 = min(w - 1, int(np.ceil(cx + rx)))
    y0 = max(0, int(np.floor(cy - ry)))
    y1 = min(h - 1, int(np.ceil(cy + ry)))
    if x1 < x0 or y1 < y0 or rx <= 0 or ry <= 0:
        return
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    inside = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    _put(img, yy[inside], xx[inside], color)


def draw_circle(img: np.ndarray, cx: float, cy: float, r: float, color, thickness: int = 1) -> None:
    """Circle outline: ring of pixels within `thickness` of radius r."""
    h, w = img.shape[:2]
    ro = r + thickness
    x0 = max(0, int(np.floor(cx - ro)))
    x1 = min(w - 1, int(np.ceil(cx + ro)))
    y0 = max(0, int(np.floor(cy - ro)))
    y1 = min(h - 1, int(np.ceil(cy + ro)))
    if x1 < x0 or y1 < y0:
        return
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    d = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
    ring = np.abs(d - r) <= thickness * 0.5 + 0.25
    _put(img, yy[ring], xx[ring], color)


def draw_line(img: np.ndarray, x0: float, y0: float, x1: float, y1: float, color) -> None:
    """1-px line sampled densely between the endpoints."""
    n = int(max(abs(x1 - x0), abs(y1 - y0), 1)) * 2 + 1
    t = np.linspace(0.0, 1.0, n)
    xs = np.round(x0 + (x1 - x0) * t).astype(np.intp)
    ys = np.round(y0 + (y1 - y0) * t).astype(np.intp)
    _put(img, ys, xs, color)


def fill_rect(img: np.ndarray, x: int, y: int, w: int, h: int, color) -> None:
    """Axis-aligned filled rectangle, clipped to the image."""
    H, W = img.shape[:2]
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(W, x + w), min(H, y + h)
    if x1 <= x0 or y1 <= y0:
        return
    img[y0:y1, x0:x1] = np.asarray(color, dtype=img.dtype)
