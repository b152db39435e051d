"""PSNR and SSIM image-quality metrics with band-averaged summaries.

PSNR follows the peak-signal form 10*log10(N * max^2 / err^2) where the peak
is taken over the reference data. SSIM is the standard windowed form with
L = 1, c1 = 0.01^2, c2 = 0.03^2, uniform 8x8 windows at stride 1 and
population (biased) moments; matrices smaller than the window fall back to a
single global window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor

SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2
SSIM_WINDOW = 8


def _check_same_dims(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(a, a_true):
    """Peak signal-to-noise ratio of `a` against the reference `a_true`, in dB.

    Uses the total entry count and the reference maximum magnitude as the
    peak. Returns +inf when the two tensors agree exactly.
    """
    a = tensor.as_tensor3(a)
    a_true = tensor.as_tensor3(a_true)
    _check_same_dims(a, a_true)
    err = float(np.sum((a - a_true) ** 2))
    if err == 0.0:
        return float("inf")
    peak = float(np.max(np.abs(a_true)))
    return 10.0 * np.log10(a.size * peak**2 / err)


def _window_moments(x, y):
    """Means, variances and covariance over every sliding window.

    Population moments (divide by the window size, not size-1).
    """
    h, w = x.shape
    k = SSIM_WINDOW
    if h < k or w < k:
        views_x = x.reshape(1, 1, h, w)
        views_y = y.reshape(1, 1, h, w)
    else:
        views_x = np.lib.stride_tricks.sliding_window_view(x, (k, k))
        views_y = np.lib.stride_tricks.sliding_window_view(y, (k, k))
    mx = views_x.mean(axis=(-2, -1))
    my = views_y.mean(axis=(-2, -1))
    vx = (views_x**2).mean(axis=(-2, -1)) - mx**2
    vy = (views_y**2).mean(axis=(-2, -1)) - my**2
    cxy = (views_x * views_y).mean(axis=(-2, -1)) - mx * my
    return mx, my, vx, vy, cxy


def ssim_band(x, x_true):
    """Mean structural similarity between two single-band images in [0,1]."""
    x = np.asarray(x, dtype=np.float64)
    x_true = np.asarray(x_true, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("ssim_band expects matrices")
    _check_same_dims(x, x_true)
    mx, my, vx, vy, cxy = _window_moments(x, x_true)
    num = (2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2)
    den = (mx**2 + my**2 + SSIM_C1) * (vx + vy + SSIM_C2)
    return float(np.mean(num / den))


@dataclass
class QualityReport:
    """Per-band PSNR/SSIM lists plus their band means."""

    psnr_per_band: list[float]
    ssim_per_band: list[float]
    mpsnr: float = field(init=False)
    mssim: float = field(init=False)

    def __post_init__(self):
        if len(self.psnr_per_band) != len(self.ssim_per_band):
            raise ValueError("per-band lists must have equal length")
        if not self.psnr_per_band:
            raise ValueError("at least one band is required")
        self.mpsnr = float(np.mean(self.psnr_per_band))
        self.mssim = float(np.mean(self.ssim_per_band))

    @property
    def band_count(self):
        return len(self.psnr_per_band)


def quality_report(a, a_true):
    """Evaluate each band along the third mode and average.

    Band PSNR uses the band's own pixel count and reference maximum, so bright
    and dark bands are scored on their own scales.
    """
    a = tensor.as_tensor3(a)
    a_true = tensor.as_tensor3(a_true)
    _check_same_dims(a, a_true)
    i1, i2, i3 = a.shape
    psnrs = []
    ssims = []
    for b in range(i3):
        err = float(np.sum((a[:, :, b] - a_true[:, :, b]) ** 2))
        if err == 0.0:
            psnrs.append(float("inf"))
        else:
            peak = float(np.max(np.abs(a_true[:, :, b])))
            psnrs.append(10.0 * np.log10(i1 * i2 * peak**2 / err))
        ssims.append(ssim_band(a[:, :, b], a_true[:, :, b]))
    return QualityReport(psnr_per_band=psnrs, ssim_per_band=ssims)
