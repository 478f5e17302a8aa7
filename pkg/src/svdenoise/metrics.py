"""Segmentation metrics (binary accuracy, IoU, Dice) and image-quality metrics (MSE, PSNR)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UndefinedMetricError
from .matrix import as_matrix

__all__ = [
    "ConfusionCounts",
    "as_mask",
    "confusion",
    "binary_accuracy",
    "iou",
    "dice",
    "mse",
    "psnr",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def as_mask(a, *, name: str = "mask") -> np.ndarray:
    """Coerce to a 2-D boolean array.  Non-boolean input is positive where non-zero."""
    m = np.asarray(a)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {m.ndim}-D")
    return m if m.dtype == np.bool_ else m != 0


def _pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    pred = as_mask(pred, name="prediction")
    gt = as_mask(gt, name="ground truth")
    if pred.shape != gt.shape:
        raise DimensionError(f"mask shapes differ: prediction {pred.shape}, ground truth {gt.shape}")
    return pred, gt


def confusion(pred, gt) -> ConfusionCounts:
    """Pixelwise TP/TN/FP/FN tallies, positive meaning the mask bit is set."""
    pred, gt = _pair(pred, gt)
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    return ConfusionCounts(tp=tp, tn=pred.size - tp - fp - fn, fp=fp, fn=fn)


def binary_accuracy(c: ConfusionCounts) -> float:
    """(TP + TN) / (TP + TN + FP + FN)."""
    if c.total <= 0:
        raise UndefinedMetricError("binary accuracy of an empty comparison is undefined")
    return (c.tp + c.tn) / c.total


def iou(pred, gt) -> float:
    """|pred & gt| / |pred | gt|.  Two empty masks score 1.0."""
    c = confusion(pred, gt)
    union = c.tp + c.fp + c.fn
    return 1.0 if union == 0 else c.tp / union


def dice(pred, gt) -> float:
    """2 |pred & gt| / (|pred| + |gt|).  Two empty masks score 1.0."""
    c = confusion(pred, gt)
    denom = 2 * c.tp + c.fp + c.fn
    return 1.0 if denom == 0 else 2 * c.tp / denom


def mse(a, b) -> float:
    a = as_matrix(a, name="image")
    b = as_matrix(b, name="reference")
    if a.shape != b.shape:
        raise DimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(np.square(a - b)))


def psnr(a, b, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB.  Identical inputs give ``math.inf``."""
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)
