"""Run the four detectors over a labeled corpus with per-frame timing."""

import time
from dataclasses import dataclass

import numpy as np

from .. import imgcore as ic
from ..util import rng_for
from .contour import NoSecondCropline, contour_target
from .lines import FpeParams, LsdParams, NoVanishingPoint, PhtParams, fpe_vanishing, lsd_vanishing, pht_vanishing
from .metrics import GroundTruthLabel, MetricsReport, evaluate
from .preprocess import PreprocessParams, PreprocessResult, segment_green

DETECTORS = ("contour", "pht", "lsd", "fpe")


@dataclass(frozen=True)
class TimingReport:
    micros: dict  # detector -> tuple of per-frame microseconds

    def median(self, detector: str) -> float:
        return float(np.median(self.micros[detector]))

    def mean(self, detector: str) -> float:
        return float(np.mean(self.micros[detector]))

    def as_dict(self) -> dict:
        return {
            name: {"median_us": self.median(name), "mean_us": self.mean(name), "frames": len(vals)}
            for name, vals in sorted(self.micros.items())
        }


def run_detector(
    name: str,
    prep: PreprocessResult,
    rng=None,
    pht_params: PhtParams = PhtParams(),
    lsd_params: LsdParams = LsdParams(),
    fpe_params: FpeParams = FpeParams(),
):
    """One detector on one preprocessed frame; full-frame coords or None.

    Detectors consume the full cleaned mask: the row band straddles the
    horizon, so cropping to the bottom ROI would bias the contour centroid.
    """
    try:
        if name == "contour":
            t = contour_target(prep.mask)
        elif name == "pht":
            t = pht_vanishing(ic.canny(prep.mask), rng, pht_params)
        elif name == "lsd":
            t = lsd_vanishing(prep.mask, lsd_params)
        elif name == "fpe":
            t = fpe_vanishing(prep.mask, rng, fpe_params)
        else:
            raise ValueError(f"unknown detector {name!r}")
    except (NoSecondCropline, NoVanishingPoint):
        return None
    return (t.x, t.y)


def benchmark(
    frames: list,
    labels: list[GroundTruthLabel],
    detectors=DETECTORS,
    seed: int = 0,
    radius: float = 5.0,
    prep_params: PreprocessParams = PreprocessParams(),
    pht_params: PhtParams = PhtParams(),
    lsd_params: LsdParams = LsdParams(),
    fpe_params: FpeParams = FpeParams(),
):
    """Score `detectors` over (frame_id, rgb) pairs.

    Returns (metrics per detector, TimingReport, detections per detector).
    Preprocessing is shared and untimed; the clock covers only each
    detector's own work (edge/corner stages included).
    """
    for name in detectors:
        if name not in DETECTORS:
            raise ValueError(f"unknown detector {name!r}")
    by_id = {lab.frame_id: lab for lab in labels}
    if len(by_id) != len(labels):
        raise ValueError("duplicate frame ids in labels")
    preps = []
    for frame_id, rgb in frames:
        if frame_id not in by_id:
            raise ValueError(f"frame {frame_id!r} missing from labels")
        preps.append((frame_id, segment_green(rgb, prep_params)))

    detections = {name: {} for name in detectors}
    micros = {name: [] for name in detectors}
    for di, name in enumerate(detectors):
        dkey = DETECTORS.index(name)
        for fi, (frame_id, prep) in enumerate(preps):
            rng = rng_for(seed, dkey, fi)
            t0 = time.perf_counter_ns()
            det = run_detector(name, prep, rng, pht_params, lsd_params, fpe_params)
            dt = time.perf_counter_ns() - t0
            detections[name][frame_id] = det
            micros[name].append(max(1, dt // 1000))

    reports = {
        name: evaluate(detections[name], labels, radius) for name in detectors
    }
    timing = TimingReport({name: tuple(vals) for name, vals in micros.items()})
    return reports, timing, detections


def write_timing_csv(path, timing: TimingReport, frame_ids: list[str]) -> None:
    """`detector,frame,micros` rows in corpus order."""
    from ..util import atomic_write_text

    buf = ["detector,frame,micros"]
    for name in sorted(timing.micros):
        vals = timing.micros[name]
        if len(vals) != len(frame_ids):
            raise ValueError("timing rows do not match frame count")
        for frame_id, us in zip(frame_ids, vals):
            buf.append(f"{name},{frame_id},{us}")
    atomic_write_text(path, "\n".join(buf) + "\n")
