"""Completion of partially observed third-order tensors.

The library factors a tensor three ways at once, one tensor-train
factorization per mode permutation, and couples them with a weighted
periodic smoothness penalty. A proximal alternating minimization loop fills
in the missing entries while keeping observed ones fixed and everything
inside [0,1].
"""

from .dataio import (
    Ellipse,
    FileFormatError,
    NormalizationRecord,
    ObservationMask,
    Polygon,
    cloud_mask,
    cloud_preset,
    export_image_stack,
    import_image_stack,
    random_mask,
    read_t3b,
    write_report_csv,
    write_t3b,
)
from .diffops import SmoothWeights, diff, diff_adjoint, dw_apply, dw_gram, dw_spectrum
from .metrics import QualityReport, psnr, quality_report, ssim_band
from .mtt import MttFactor, MttRank, estimate_ranks, mtt_rank, reconstruct, tt_svd
from .solver import (
    FeasibleSet,
    SolveReport,
    SolverAbortError,
    SolverConfig,
    solve,
)
from .tensor import fro_norm, ipermute, l1_norm, matricize, mode_slice, permute

__version__ = "0.1.0"

__all__ = [
    "Ellipse",
    "FeasibleSet",
    "FileFormatError",
    "MttFactor",
    "MttRank",
    "NormalizationRecord",
    "ObservationMask",
    "Polygon",
    "QualityReport",
    "SmoothWeights",
    "SolveReport",
    "SolverAbortError",
    "SolverConfig",
    "cloud_mask",
    "cloud_preset",
    "diff",
    "diff_adjoint",
    "dw_apply",
    "dw_gram",
    "dw_spectrum",
    "estimate_ranks",
    "export_image_stack",
    "fro_norm",
    "import_image_stack",
    "ipermute",
    "l1_norm",
    "matricize",
    "mode_slice",
    "mtt_rank",
    "permute",
    "psnr",
    "quality_report",
    "random_mask",
    "read_t3b",
    "reconstruct",
    "solve",
    "ssim_band",
    "tt_svd",
    "write_report_csv",
    "write_t3b",
]
