"""Piecewise-constant synthetic brain-MRI-like phantoms with a matching tumour mask.

Used as the bundled denoising fixture: intensities are exact integers on the
0-255 scale, so the clean image survives an 8-bit PGM round trip unchanged.
"""

from __future__ import annotations

import numpy as np

__all__ = ["TUMOUR_CENTRES", "ellipse", "make_phantom", "phantom_set"]

# (row, col) of the tumour centre, as a fraction of the image size
TUMOUR_CENTRES = (
    (0.38, 0.62),
    (0.62, 0.36),
    (0.45, 0.30),
)


def ellipse(shape, centre, radii, angle: float = 0.0) -> np.ndarray:
    """Boolean mask of an ellipse.  ``centre`` and ``radii`` are in fractions of ``shape``."""
    rows, cols = shape
    y, x = np.mgrid[0:rows, 0:cols]
    y = (y + 0.5) / rows - centre[0]
    x = (x + 0.5) / cols - centre[1]
    c, s = np.cos(angle), np.sin(angle)
    u = c * x + s * y
    v = -s * x + c * y
    return (u / radii[1]) ** 2 + (v / radii[0]) ** 2 <= 1.0


def make_phantom(size: int = 256, variant: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(image, tumour_mask)`` for one of the :data:`TUMOUR_CENTRES` variants.

    Regions: background 10, skull 200, cerebrospinal fluid 40, white matter
    120, two ventricles 70, and a bright tumour 180 with a darker core 150.
    """
    shape = (size, size)
    centre = (0.5, 0.5)
    img = np.full(shape, 10.0)
    img[ellipse(shape, centre, (0.44, 0.36))] = 200.0
    img[ellipse(shape, centre, (0.41, 0.33))] = 40.0
    img[ellipse(shape, centre, (0.39, 0.31))] = 120.0
    img[ellipse(shape, (0.45, 0.44), (0.12, 0.04), angle=0.3)] = 70.0
    img[ellipse(shape, (0.45, 0.56), (0.12, 0.04), angle=-0.3)] = 70.0

    tumour_centre = TUMOUR_CENTRES[variant % len(TUMOUR_CENTRES)]
    tumour = ellipse(shape, tumour_centre, (0.08, 0.07), angle=0.5)
    img[tumour] = 180.0
    img[ellipse(shape, tumour_centre, (0.035, 0.03))] = 150.0
    return img, tumour


def phantom_set(size: int = 256, count: int = 3) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """``(identifier, image, mask)`` for ``count`` phantom variants."""
    return [(f"phantom{i}", *make_phantom(size, i)) for i in range(count)]
