"""Corpus generation: frames on disk plus a JSONL manifest and summary."""

from __future__ import annotations

import dataclasses
import json
import math
import os

from ..ppmio import write_pnm
from ..util import atomic_write_text, canonical_json, config_hash, rng_for
from .camera import Pose
from .dock import gen_dock_frame
from .field import FieldConfig, gen_field_frame

SCENES = ("field", "approach", "dock")

_DOCK_DIST_RANGE = (0.9, 3.0)
_DOCK_OFFSET_RANGE = (-0.5, 0.5)


def _frame_seed(seed: int, index: int) -> int:
    return (int(seed) ^ ((index + 1) * 0x9E3779B1)) & ((1 << 63) - 1)


def _field_pose(cfg: FieldConfig, rng) -> Pose:
    aisle = int(rng.integers(0, cfg.n_rows - 1))
    if rng.random() < 0.12:
        y = cfg.row_length_m + float(rng.uniform(-0.02, 0.35))
    else:
        y = float(rng.uniform(0.35, cfg.row_length_m - 0.55))
    x = float(cfg.aisle_center_x(aisle, y)) + float(rng.uniform(-0.01, 0.01))
    heading = math.pi / 2 + float(rng.uniform(-0.035, 0.035))
    return Pose(x, y, heading)


def gen_corpus(
    cfg: FieldConfig,
    n: int,
    out_dir: str,
    seed: int,
    scene: str = "field",
    hours_span: float = 0.0,
) -> dict:
    """Write `n` labeled frames plus manifest.jsonl and summary.json.

    Scenes: "field" samples poses across the aisles (including a few past the
    row ends, where the vanishing point label is absent), "approach" marches
    straight at a row end in fixed steps, "dock" samples approach distance and
    lateral offset. Per-frame determinism comes from seeds derived as
    seed XOR frame index, so any frame can be regenerated in isolation.
    """
    if scene not in SCENES:
        raise ValueError(f"unknown scene {scene!r}, expected one of {SCENES}")
    if n < 1:
        raise ValueError("corpus size must be at least 1")
    os.makedirs(out_dir, exist_ok=True)

    lines = []
    names = []
    for i in range(n):
        fseed = _frame_seed(seed, i)
        hours = hours_span * (i / (n - 1) if n > 1 else 0.0)
        name = f"frame_{i:03d}.ppm"
        if scene == "dock":
            rng = rng_for(seed, 50, i)
            dist = float(rng.uniform(*_DOCK_DIST_RANGE))
            offset = float(rng.uniform(*_DOCK_OFFSET_RANGE))
            frame = gen_dock_frame(cfg, dist, offset, fseed)
            record = {
                "frame": name,
                "circles": [[c[0], c[1], c[2]] for c in frame.circles],
                "distance": dist,
                "offset": offset,
            }
        else:
            if scene == "approach":
                # march through the final stretch where the canopy ahead
                # thins out, so the green-area series declines frame over
                # frame instead of idling at its in-row plateau
                aisle = (cfg.n_rows - 2) // 2
                y = cfg.row_length_m - 0.31 + 0.015 * i
                pose = Pose(float(cfg.aisle_center_x(aisle, y)), y, math.pi / 2)
            else:
                pose = _field_pose(cfg, rng_for(seed, 50, i))
            frame = gen_field_frame(cfg, pose, fseed, hours=hours)
            mask_name = f"frame_{i:03d}_mask.pgm"
            write_pnm(os.path.join(out_dir, mask_name), frame.row_mask)
            record = {
                "frame": name,
                "mask": mask_name,
                "vp": list(frame.vp) if frame.vp is not None else None,
                "hours": hours,
                "pose": frame.meta["pose"],
            }
        write_pnm(os.path.join(out_dir, name), frame.image)
        lines.append(canonical_json(record))
        names.append(name)

    atomic_write_text(os.path.join(out_dir, "manifest.jsonl"), "\n".join(lines) + "\n")
    summary = {
        "scene": scene,
        "n": n,
        "seed": int(seed),
        "hours_span": hours_span,
        "config_hash": config_hash(dataclasses.asdict(cfg)),
    }
    atomic_write_text(os.path.join(out_dir, "summary.json"), canonical_json(summary) + "\n")
    return summary


def read_manifest(corpus_dir: str) -> list:
    """Parse manifest.jsonl into a list of per-frame records."""
    path = os.path.join(corpus_dir, "manifest.jsonl")
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
