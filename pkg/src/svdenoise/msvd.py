"""Multiresolution SVD (MSVD) analysis and synthesis.

One level groups the image into 2x2 blocks (a 4 x m matrix ``A1``), rotates it
into the basis of its left singular vectors (``T = U.T @ A1``) and reads the
four rows of ``T`` back as half-size sub-bands LL, LH, HL, HH.  Row order
follows the singular values, so LL carries the most energy and HH the least.
The labels do not imply a geometric orientation.

``U`` depends on the data and is kept alongside the bands; synthesis is
``A1 = U @ T``.  Deeper levels recurse on LL.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .matrix import as_matrix, block_to_columns, columns_to_block
from .svd import left_singular_basis_4

__all__ = [
    "BAND_NAMES",
    "SubBands",
    "MsvdLevel",
    "MsvdPyramid",
    "analyze_level",
    "synthesize_level",
    "analyze",
    "decompose",
    "reconstruct",
    "max_levels",
]

BAND_NAMES = ("ll", "lh", "hl", "hh")
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class SubBands:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shapes = {b.shape for b in self.bands()}
        if len(shapes) != 1:
            raise ValidationError(f"sub-bands must share one shape, got {sorted(shapes)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.ll.shape

    def bands(self) -> tuple[np.ndarray, ...]:
        return self.ll, self.lh, self.hl, self.hh


@dataclass(frozen=True)
class MsvdLevel:
    """Detail bands of one level plus the 4x4 basis needed to invert it."""

    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    u: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.lh.shape


@dataclass(frozen=True)
class MsvdPyramid:
    """Output of :func:`decompose`.  ``levels[0]`` is the finest level."""

    levels: tuple[MsvdLevel, ...]
    top_ll: np.ndarray
    original_shape: tuple[int, int]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def validate(self) -> None:
        """Raise ValidationError unless shapes and bases are consistent."""
        if not self.levels:
            raise ValidationError("pyramid has no levels")
        rows, cols = self.original_shape
        for i, level in enumerate(self.levels):
            step = 2 ** (i + 1)
            expected = (rows // step, cols // step)
            if rows % step or cols % step:
                raise ValidationError(f"original shape {self.original_shape} not divisible at level {i}")
            for name in ("lh", "hl", "hh"):
                band = getattr(level, name)
                if band.shape != expected:
                    raise ValidationError(
                        f"level {i} band {name.upper()} has shape {band.shape}, expected {expected}"
                    )
            _check_orthonormal(level.u, f"level {i} basis")
        if self.top_ll.shape != self.levels[-1].shape:
            raise ValidationError(
                f"top LL shape {self.top_ll.shape} does not match deepest level {self.levels[-1].shape}"
            )


def _check_orthonormal(u: np.ndarray, what: str) -> None:
    if u.shape != (4, 4):
        raise ValidationError(f"{what} must be 4x4, got {u.shape}")
    dev = float(np.max(np.abs(u.T @ u - np.eye(4))))
    if not dev <= ORTHO_TOL:
        raise ValidationError(f"{what} is not orthonormal (max deviation {dev:.3g})")


def max_levels(rows: int, cols: int) -> int:
    """Largest number of levels for which both dimensions stay divisible by 2."""
    levels = 0
    while rows % 2 == 0 and cols % 2 == 0 and rows >= 2 and cols >= 2:
        rows //= 2
        cols //= 2
        levels += 1
    return levels


def analyze_level(img) -> tuple[SubBands, np.ndarray]:
    """One MSVD analysis step.  Returns the four sub-bands and the 4x4 basis ``u``."""
    img = as_matrix(img, name="image")
    rows, cols = img.shape
    a1 = block_to_columns(img)
    u = left_singular_basis_4(a1)
    t = u.T @ a1
    half = (rows // 2, cols // 2)
    return SubBands(*(t[r].reshape(half).copy() for r in range(4))), u


def synthesize_level(bands: SubBands, u, out_rows: int, out_cols: int) -> np.ndarray:
    """Inverse of :func:`analyze_level`."""
    u = as_matrix(u, name="basis")
    _check_orthonormal(u, "basis")
    if bands.shape != (out_rows // 2, out_cols // 2) or out_rows % 2 or out_cols % 2:
        raise ValidationError(f"bands of shape {bands.shape} cannot fill a ({out_rows}, {out_cols}) image")
    t = np.stack([as_matrix(b, name="band").ravel() for b in bands.bands()])
    return columns_to_block(u @ t, out_rows, out_cols)


def analyze(img, levels: int) -> list[tuple[SubBands, np.ndarray]]:
    """Every level's full band set (including intermediate LL) and basis, finest first."""
    img = as_matrix(img, name="image")
    rows, cols = img.shape
    if levels < 1:
        raise DimensionError(f"levels must be >= 1, got {levels}")
    feasible = max_levels(rows, cols)
    if levels > feasible:
        raise DimensionError(
            f"a {rows}x{cols} image supports at most {feasible} MSVD level(s), {levels} requested"
        )
    out = []
    ll = img
    for _ in range(levels):
        bands, u = analyze_level(ll)
        out.append((bands, u))
        ll = bands.ll
    return out


def decompose(img, levels: int) -> MsvdPyramid:
    """Multi-level MSVD: level 0 from ``img``, each further level from the previous LL."""
    img = as_matrix(img, name="image")
    steps = analyze(img, levels)
    return MsvdPyramid(
        levels=tuple(MsvdLevel(lh=b.lh, hl=b.hl, hh=b.hh, u=u) for b, u in steps),
        top_ll=steps[-1][0].ll,
        original_shape=img.shape,
    )


def reconstruct(p: MsvdPyramid) -> np.ndarray:
    """Inverse MSVD: synthesise from the deepest level outward."""
    p.validate()
    rows, cols = p.original_shape
    ll = p.top_ll
    for i in range(p.depth - 1, -1, -1):
        level = p.levels[i]
        ll = synthesize_level(
            SubBands(ll=ll, lh=level.lh, hl=level.hl, hh=level.hh),
            level.u,
            rows >> i,
            cols >> i,
        )
    return ll
