"""SVD-based image denoising: Jacobi SVD, rank-k truncation, multiresolution SVD
shrinkage, and segmentation/quality metrics."""

__version__ = "0.1.0"

from .denoise import NoiseSpec, ThresholdSpec, add_gaussian_noise, denoise_lowrank, denoise_msvd
from .errors import (
    ConvergenceError,
    DimensionError,
    FormatError,
    ManifestError,
    PgmParseError,
    RangeError,
    SvdDenoiseError,
    UndefinedMetricError,
    ValidationError,
)
from .lowrank import truncate, truncate_image
from .metrics import binary_accuracy, confusion, dice, iou, mse, psnr
from .msvd import decompose, reconstruct
from .svd import SvdFactors, left_singular_basis_4, svd
