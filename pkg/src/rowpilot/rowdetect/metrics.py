"""Detection scoring against labeled vanishing points (5-pixel rule)."""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class GroundTruthLabel:
    frame_id: str
    vp: tuple[float, float] | None


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float | None:
        return (self.tp + self.tn) / self.total if self.total else None

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def recall(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def f_score(self) -> float | None:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    @property
    def hit_ratio(self) -> float | None:
        """TN-free alternative, tp/(tp+fp+fn), for cross-checking accuracy."""
        d = self.tp + self.fp + self.fn
        return self.tp / d if d else None

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
            "hit_ratio": self.hit_ratio,
        }


def evaluate(detections: dict, labels: list[GroundTruthLabel], radius: float = 5.0) -> MetricsReport:
    """Score per-frame optional detections against labels.

    A detection within `radius` (inclusive) of a present label is a TP;
    outside, or with no label, an FP. No detection counts FN when a label
    exists, TN when it does not.
    """
    label_ids = [lab.frame_id for lab in labels]
    if set(detections) != set(label_ids) or len(labels) != len(set(label_ids)):
        raise ValueError("detection frames do not match label frames")
    tp = fp = fn = tn = 0
    for lab in labels:
        det = detections[lab.frame_id]
        if det is None:
            if lab.vp is None:
                tn += 1
            else:
                fn += 1
        elif lab.vp is None:
            fp += 1
        else:
            d = float(np.hypot(det[0] - lab.vp[0], det[1] - lab.vp[1]))
            if d <= radius:
                tp += 1
            else:
                fp += 1
    return MetricsReport(tp, fp, fn, tn)


def read_labels(manifest_path) -> list[GroundTruthLabel]:
    """Parse a JSON-lines manifest: {"frame": name, "vp": [x, y] | null}."""
    out = []
    for line in Path(manifest_path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        row = json.loads(line)
        vp = row.get("vp")
        out.append(GroundTruthLabel(row["frame"], None if vp is None else (float(vp[0]), float(vp[1]))))
    return out


def write_metrics_csv(path, reports: dict) -> None:
    """`detector,tp,fp,fn,tn,accuracy,precision,recall,f_score` rows."""
    from ..util import atomic_write_text

    buf = []
    header = ["detector", "tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "f_score"]
    buf.append(",".join(header))
    for name in sorted(reports):
        r = reports[name]
        cells = [name, str(r.tp), str(r.fp), str(r.fn), str(r.tn)]
        for v in (r.accuracy, r.precision, r.recall, r.f_score):
            cells.append("" if v is None else f"{v:.6f}")
        buf.append(",".join(cells))
    atomic_write_text(path, "\n".join(buf) + "\n")


def read_metrics_csv(path) -> dict:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["detector"]] = MetricsReport(
                int(row["tp"]), int(row["fp"]), int(row["fn"]), int(row["tn"])
            )
    return out
