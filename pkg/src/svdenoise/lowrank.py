"""Rank-k truncation of an SVD (best rank-k approximation in Frobenius norm)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RangeError
from .svd import SvdFactors, svd

__all__ = ["TruncationReport", "truncate", "truncate_image"]


@dataclass(frozen=True)
class TruncationReport:
    k: int
    kept_energy: float
    dropped_energy: float

    @property
    def frobenius_error(self) -> float:
        """Frobenius norm of the discarded part, ``sqrt(sum_{i>k} s_i^2)``."""
        return math.sqrt(self.dropped_energy)

    @property
    def total_energy(self) -> float:
        return self.kept_energy + self.dropped_energy

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "kept_energy": self.kept_energy,
            "dropped_energy": self.dropped_energy,
            "frobenius_error": self.frobenius_error,
        }


def truncate(f: SvdFactors, k: int) -> tuple[np.ndarray, TruncationReport]:
    """Keep the ``k`` leading singular triplets of ``f``.

    ``k = 0`` gives the zero matrix; ``k = len(f.s)`` reproduces the input.
    """
    k = int(k)
    if not 0 <= k <= len(f.s):
        raise RangeError(f"k must lie in [0, {len(f.s)}], got {k}")
    sq = np.square(f.s).tolist()
    report = TruncationReport(k=k, kept_energy=math.fsum(sq[:k]), dropped_energy=math.fsum(sq[k:]))
    return f.reconstruct(k), report


def truncate_image(img, k: int) -> np.ndarray:
    """Rank-k approximation of an image.  No clamping to the intensity range."""
    approx, _ = truncate(svd(img), k)
    return approx
