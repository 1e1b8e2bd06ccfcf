"""Shared segmentation front end applied before every detector."""

from dataclasses import dataclass, field

import numpy as np

from .. import imgcore as ic


@dataclass(frozen=True)
class PreprocessParams:
    band: ic.HsvRange = field(default_factory=lambda: ic.GREEN_DEFAULT)
    blur_ksize: int = 25
    morph_ksize: int = 21
    roi_fraction: float = 0.6


@dataclass(frozen=True)
class PreprocessResult:
    mask: np.ndarray       # full-frame {0,255} after morphology
    roi: ic.Rect           # bottom navigation window
    roi_mask: np.ndarray   # mask cropped to roi


def segment_green(frame: np.ndarray, params: PreprocessParams = PreprocessParams()) -> PreprocessResult:
    """Blur, HSV band threshold, open+close, then crop the navigation ROI."""
    rgb = ic.as_rgb(frame)
    h, w = rgb.shape[:2]
    blurred = ic.gaussian_blur(rgb, params.blur_ksize)
    hsv = ic.rgb_to_hsv(blurred)
    mask = ic.in_range(hsv, params.band)
    mask = ic.morphology(mask, "open", params.morph_ksize)
    mask = ic.morphology(mask, "close", params.morph_ksize)
    roi = ic.bottom_roi(w, h, params.roi_fraction)
    return PreprocessResult(mask, roi, ic.roi_crop(mask, roi))
