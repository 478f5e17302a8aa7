"""Noise simulation, noise-level estimation and sub-band shrinkage denoising."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lowrank, msvd
from .errors import RangeError
from .matrix import as_matrix

__all__ = [
    "MAD_SCALE",
    "ThresholdSpec",
    "NoiseSpec",
    "DenoiseReport",
    "add_gaussian_noise",
    "estimate_sigma",
    "universal_threshold",
    "shrink",
    "denoise_msvd",
    "denoise_lowrank",
]

# median(|X|) of a standard normal
MAD_SCALE = 0.6745

MODES = ("soft", "hard")
UNIVERSAL = "universal"


@dataclass(frozen=True)
class ThresholdSpec:
    """Shrinkage mode plus threshold rule.

    ``threshold`` is either a non-negative number (used as-is at every level)
    or the string ``"universal"``.
    """

    mode: str = "soft"
    threshold: float | str = UNIVERSAL

    def __post_init__(self):
        if self.mode not in MODES:
            raise RangeError(f"mode must be one of {MODES}, got {self.mode!r}")
        if isinstance(self.threshold, str):
            if self.threshold != UNIVERSAL:
                raise RangeError(f"threshold rule must be a number or {UNIVERSAL!r}, got {self.threshold!r}")
        elif not (math.isfinite(self.threshold) and self.threshold >= 0):
            raise RangeError(f"explicit threshold must be finite and >= 0, got {self.threshold}")

    @property
    def is_universal(self) -> bool:
        return self.threshold == UNIVERSAL

    @classmethod
    def parse(cls, mode: str, threshold: str) -> "ThresholdSpec":
        """Build from command-line strings, e.g. ``("soft", "universal")`` or ``("hard", "12.5")``."""
        if threshold.strip().lower() == UNIVERSAL:
            return cls(mode=mode, threshold=UNIVERSAL)
        try:
            value = float(threshold)
        except ValueError:
            raise RangeError(f"threshold must be a number or {UNIVERSAL!r}, got {threshold!r}") from None
        return cls(mode=mode, threshold=value)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise RangeError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise RangeError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class DenoiseReport:
    """What :func:`denoise_msvd` did.

    ``zeroed[i]`` maps band name to the number of coefficients at level ``i``
    that were zero after shrinkage but not before.
    """

    mode: str
    rule: str
    sigma_hat: float
    lambdas: tuple[float, ...]
    zeroed: tuple[dict, ...]
    band_sizes: tuple[int, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rule": self.rule,
            "sigma_hat": self.sigma_hat,
            "levels": [
                {"level": i, "lambda": lam, "band_size": size, "zeroed": dict(z)}
                for i, (lam, size, z) in enumerate(zip(self.lambdas, self.band_sizes, self.zeroed))
            ],
        }


def add_gaussian_noise(img, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) noise drawn from ``numpy.random.PCG64(seed)``.

    The same seed and shape always produce the same draws.
    """
    img = as_matrix(img, name="image")
    if spec.sigma == 0:
        return img.copy()
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    return img + spec.sigma * rng.standard_normal(img.shape)


def estimate_sigma(hh) -> float:
    """Robust noise level ``median(|hh|) / 0.6745`` from a finest-scale detail band."""
    hh = as_matrix(hh, name="band")
    return float(np.median(np.abs(hh))) / MAD_SCALE


def universal_threshold(sigma: float, n: int) -> float:
    """``sigma * sqrt(2 ln n)``."""
    if n < 1:
        raise RangeError(f"sample count must be positive, got {n}")
    return sigma * math.sqrt(2.0 * math.log(n))


def shrink(band, lam: float, mode: str = "soft") -> np.ndarray:
    """Soft (``sign(x) * max(|x| - lam, 0)``) or hard (``x if |x| > lam else 0``) shrinkage."""
    if not lam >= 0:
        raise RangeError(f"threshold must be >= 0, got {lam}")
    band = as_matrix(band, name="band")
    if mode == "soft":
        return np.sign(band) * np.maximum(np.abs(band) - lam, 0.0)
    if mode == "hard":
        return np.where(np.abs(band) > lam, band, 0.0)
    raise RangeError(f"mode must be one of {MODES}, got {mode!r}")


def denoise_msvd(img, levels: int, spec: ThresholdSpec | None = None) -> tuple[np.ndarray, DenoiseReport]:
    """Decompose, shrink every detail band at every level, reconstruct.

    LL is never shrunk.  The noise level is estimated once, from the level-0
    HH band, and the universal threshold ``sigma_hat * sqrt(2 ln N)`` with N
    the pixel count of ``img`` is applied unchanged at every level.
    """
    spec = ThresholdSpec() if spec is None else spec
    img = as_matrix(img, name="image")
    pyramid = msvd.decompose(img, levels)
    sigma_hat = estimate_sigma(pyramid.levels[0].hh)
    if spec.is_universal:
        lam = universal_threshold(sigma_hat, img.size)
    else:
        lam = float(spec.threshold)

    shrunk, zeroed = [], []
    for level in pyramid.levels:
        new, counts = {}, {}
        for name in ("lh", "hl", "hh"):
            band = getattr(level, name)
            new[name] = shrink(band, lam, spec.mode)
            counts[name] = int(np.count_nonzero((new[name] == 0) & (band != 0)))
        shrunk.append(msvd.MsvdLevel(u=level.u, **new))
        zeroed.append(counts)

    out = msvd.reconstruct(
        msvd.MsvdPyramid(levels=tuple(shrunk), top_ll=pyramid.top_ll, original_shape=pyramid.original_shape)
    )
    report = DenoiseReport(
        mode=spec.mode,
        rule=UNIVERSAL if spec.is_universal else "explicit",
        sigma_hat=sigma_hat,
        lambdas=(lam,) * levels,
        zeroed=tuple(zeroed),
        band_sizes=tuple(level.lh.size for level in pyramid.levels),
    )
    return out, report


def denoise_lowrank(img, k: int) -> np.ndarray:
    """Rank-k truncation denoising; see :func:`svdenoise.lowrank.truncate_image`."""
    return lowrank.truncate_image(img, k)
