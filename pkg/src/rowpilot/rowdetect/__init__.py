"""Cropline target localization, baselines, and the benchmark harness."""

from .contour import (
    Contour,
    MomentSet,
    NoSecondCropline,
    TargetPoint,
    centroid,
    contour_pair,
    contour_target,
    deviation_deg,
    find_contours,
    green_area,
    region_moments,
    region_stats,
    row_end,
    smoothed_area,
)
from .lines import (
    FpeParams,
    LsdParams,
    NoVanishingPoint,
    PhtParams,
    Segment,
    fpe_vanishing,
    harris_corners,
    lsd_segments,
    lsd_vanishing,
    pht_segments,
    pht_vanishing,
    slope_filter,
)
from .metrics import GroundTruthLabel, MetricsReport, evaluate, read_labels
from .preprocess import PreprocessParams, PreprocessResult, segment_green
from .bench import DETECTORS, TimingReport, benchmark, run_detector

__all__ = [name for name in dir() if not name.startswith("_")]
