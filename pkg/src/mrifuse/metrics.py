"""Whole-tumor segmentation scoring: confusion counts and Dice.

Masks are binarized as "any nonzero label is positive", which collapses the
tumor sub-region labels into the whole-tumor target. Dice is
2*TP / (2*TP + FN + FP); the degenerate both-empty case scores 1.0
(perfect agreement on absence).
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyBatch, MrifuseError, ShapeMismatch
from .nifti_io import parse_nifti
from .volume import Volume

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


def confusion(pred: Volume | np.ndarray, gt: Volume | np.ndarray) -> ConfusionCounts:
    """Voxel-wise confusion counts between two masks (nonzero = positive)."""
    p = pred.data if isinstance(pred, Volume) else np.asarray(pred)
    g = gt.data if isinstance(gt, Volume) else np.asarray(gt)
    if p.shape != g.shape:
        raise ShapeMismatch(f"prediction shape {p.shape} != ground truth shape {g.shape}")
    p = p != 0
    g = g != 0
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(np.count_nonzero(~p & ~g))
    return ConfusionCounts(tp, fp, fn, tn)


def dice(c: ConfusionCounts) -> float:
    """Overlap score 2*TP / (2*TP + FN + FP); 1.0 when both masks are empty."""
    denom = 2 * c.tp + c.fn + c.fp
    if denom == 0:
        return 1.0
    return 2 * c.tp / denom


def dice_loss(c: ConfusionCounts) -> float:
    """Training objective 1 - dice, in [0, 1]."""
    return 1.0 - dice(c)


@dataclass
class DiceReport:
    """Per-volume scores plus the batch mean and aggregate counts."""

    per_volume: list[tuple[str, float]]
    mean_dice: float
    counts: ConfusionCounts
    failures: list[tuple[str, str]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["id", "dice"])
        for vid, score in self.per_volume:
            writer.writerow([vid, f"{score:.6f}"])
        writer.writerow(["mean", f"{self.mean_dice:.6f}"])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "per_volume": [{"id": vid, "dice": score} for vid, score in self.per_volume],
                "mean_dice": self.mean_dice,
                "counts": {"tp": self.counts.tp, "fp": self.counts.fp,
                           "fn": self.counts.fn, "tn": self.counts.tn},
                "failures": [{"id": vid, "error": msg} for vid, msg in self.failures],
            },
            indent=2,
        )


def evaluate_batch(pairs: list[tuple[str, Path | str, Path | str]]) -> DiceReport:
    """Score (id, prediction path, ground-truth path) mask pairs.

    Pairs that fail to load or mismatch in shape are collected as failures
    rather than aborting the batch; the mean covers scored pairs only.
    """
    if not pairs:
        raise EmptyBatch("no prediction/ground-truth pairs to evaluate")
    per_volume: list[tuple[str, float]] = []
    failures: list[tuple[str, str]] = []
    total = ConfusionCounts(0, 0, 0, 0)
    for vid, pred_path, gt_path in pairs:
        try:
            _, pred = parse_nifti(pred_path)
            _, gt = parse_nifti(gt_path)
            counts = confusion(pred, gt)
        except (MrifuseError, OSError) as exc:
            log.warning("pair %s failed: %s", vid, exc)
            failures.append((vid, str(exc)))
            continue
        per_volume.append((vid, dice(counts)))
        total = total + counts
    mean = sum(score for _, score in per_volume) / len(per_volume) if per_volume else 0.0
    return DiceReport(per_volume=per_volume, mean_dice=mean, counts=total, failures=failures)
