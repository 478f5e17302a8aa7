"""Dense float64 matrices and the 2x2 block reshapes used by the MSVD transform.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64.  Every
public entry point funnels its inputs through :func:`as_matrix`, which copies
integer images to float64 and rejects NaN/Inf.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, ValidationError

__all__ = [
    "as_matrix",
    "block_to_columns",
    "columns_to_block",
    "multiply",
    "transpose",
    "frobenius_norm",
]


def as_matrix(a, *, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite, non-empty 2-D float64 array.

    The input is copied only when a dtype conversion is needed.
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {m.ndim}-D")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must have positive rows and cols, got {m.shape}")
    if not np.isfinite(m).all():
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return m


def block_to_columns(img) -> np.ndarray:
    """Rearrange non-overlapping 2x2 blocks of ``img`` into the columns of a 4 x m matrix.

    Blocks are enumerated row-major over the block grid.  Inside a block the
    pixels are taken column-major: top-left, bottom-left, top-right,
    bottom-right.

    >>> block_to_columns([[1, 2], [3, 4]]).ravel().tolist()
    [1.0, 3.0, 2.0, 4.0]
    """
    img = as_matrix(img, name="image")
    rows, cols = img.shape
    if rows % 2:
        raise DimensionError(f"image rows must be even, got {rows}")
    if cols % 2:
        raise DimensionError(f"image cols must be even, got {cols}")
    # axes after reshape: (block_row, dr, block_col, dc); output row = 2*dc + dr
    blocks = img.reshape(rows // 2, 2, cols // 2, 2)
    return np.ascontiguousarray(blocks.transpose(3, 1, 0, 2).reshape(4, -1))


def columns_to_block(cols4, out_rows: int, out_cols: int) -> np.ndarray:
    """Inverse of :func:`block_to_columns`."""
    cols4 = as_matrix(cols4, name="block matrix")
    if cols4.shape[0] != 4:
        raise DimensionError(f"block matrix must have exactly 4 rows, got {cols4.shape[0]}")
    if out_rows % 2 or out_cols % 2 or out_rows < 2 or out_cols < 2:
        raise DimensionError(f"output shape must be even and positive, got ({out_rows}, {out_cols})")
    m = (out_rows // 2) * (out_cols // 2)
    if cols4.shape[1] != m:
        raise DimensionError(
            f"block matrix has {cols4.shape[1]} columns, output ({out_rows}, {out_cols}) needs {m}"
        )
    blocks = cols4.reshape(2, 2, out_rows // 2, out_cols // 2)
    return np.ascontiguousarray(blocks.transpose(2, 1, 3, 0).reshape(out_rows, out_cols))


def multiply(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def transpose(a) -> np.ndarray:
    return np.ascontiguousarray(as_matrix(a).T)


def frobenius_norm(a) -> float:
    a = as_matrix(a)
    # scaled to avoid overflow; fsum is correctly rounded, so any permutation
    # of the entries gives a bit-identical norm
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    return scale * math.sqrt(math.fsum(np.square(a / scale).ravel().tolist()))
