"""Image-quality metrics: PSNR, SSIM, SSD and the kernel-aware error ratio."""

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

# SSIM configuration, frozen for reproducibility: 11x11 Gaussian window with
# sigma 1.5, K1 = 0.01, K2 = 0.03, mean over valid windows.
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# dB value substituted for an infinite PSNR in file output.
PSNR_CAP_DB = 99.0


@dataclass
class MetricReport:
    psnr: float
    ssim: float
    ssd: float
    error_ratio: Optional[float] = None

    def to_json(self, image_id):
        payload = {
            "image_id": image_id,
            "psnr_db": min(self.psnr, PSNR_CAP_DB),
            "ssim": self.ssim,
            "ssd": self.ssd,
        }
        if self.error_ratio is not None:
            payload["error_ratio"] = self.error_ratio
        return json.dumps(payload, indent=2, sort_keys=True)


def _check_shapes(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def ssd(a, b):
    """Sum of squared differences."""
    a, b = _check_shapes(a, b)
    return float(np.sum((a - b) ** 2))


def psnr(a, b, peak=1.0):
    """10 log10(peak^2 / MSE); +inf when the images are identical."""
    a, b = _check_shapes(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def _gaussian_window(size, sigma):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_channel(a, b, data_range):
    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a = fftconvolve(a, w, mode="valid")
    mu_b = fftconvolve(b, w, mode="valid")
    var_a = fftconvolve(a * a, w, mode="valid") - mu_a**2
    var_b = fftconvolve(b * b, w, mode="valid") - mu_b**2
    cov = fftconvolve(a * b, w, mode="valid") - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a, b, data_range=1.0):
    """Single-scale SSIM averaged over valid windows (and channels)."""
    a, b = _check_shapes(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} px per side")
    if a.ndim == 2:
        return _ssim_channel(a, b, data_range)
    return float(np.mean([_ssim_channel(a[:, :, c], b[:, :, c], data_range)
                          for c in range(a.shape[2])]))


def crop_border(img, r):
    """Drop an r-pixel frame; used to exclude boundary effects from metrics."""
    if r <= 0:
        return np.asarray(img)
    a = np.asarray(img)
    if 2 * r >= min(a.shape[0], a.shape[1]):
        raise ValueError("border crop larger than image")
    return a[r: a.shape[0] - r, r: a.shape[1] - r]


def error_ratio(B, k_est, k_gt, L_gt, p):
    """SSD of the deconvolution with k_est over the SSD with k_gt.

    Both deconvolutions use the same latent solver and parameters.  An exact
    recovery with the ground-truth kernel (zero denominator) is degenerate:
    the ratio is 1.0 when the numerator is also zero, +inf otherwise.
    """
    from .optimizer import estimate_latent

    num = ssd(estimate_latent(B, k_est, p), L_gt)
    den = ssd(estimate_latent(B, k_gt, p), L_gt)
    if den == 0.0:
        return 1.0 if num == 0.0 else math.inf
    return num / den


def report(result, reference, peak=1.0, border=0, error_ratio_value=None):
    """MetricReport for a restored image against its reference."""
    a = crop_border(np.asarray(result, dtype=np.float64), border)
    b = crop_border(np.asarray(reference, dtype=np.float64), border)
    return MetricReport(psnr=psnr(a, b, peak), ssim=ssim(a, b, data_range=peak),
                        ssd=ssd(a, b), error_ratio=error_ratio_value)
