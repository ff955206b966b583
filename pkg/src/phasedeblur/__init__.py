"""Blind single-image motion deblurring via phase-only kernel estimation."""

from .estimation import (MotionPattern, Peak, PeakConfig, coarse_kernel_from_peaks,
                         detect_peaks, estimate_kernel, linear_kernel_from_peaks,
                         motion_spectrum)
from .fourier import (autocorrelation, circular_convolve, dft2, idft2, luminance,
                      phase_only, tophat_phase_profile)
from .kernels import (delta_kernel, read_kernel_text, validate_kernel,
                      write_kernel_text)
from .metrics import MetricReport, error_ratio, psnr, report, ssd, ssim
from .nonuniform import (RegionMask, RegionResult, deblur_nonuniform,
                         grid_decompose, load_region_masks)
from .optimizer import (DeblurParams, DeblurResult, alternate,
                        auxiliary_gradients, deblur_multiscale, energy,
                        estimate_latent, refine_kernel,
                        truncated_quadratic_penalty)
from .synth import (blur_with_kernel, synthesize_linear_kernel, test_pattern,
                    trajectory_kernel)

__version__ = "0.1.0"

__all__ = [
    "MotionPattern", "Peak", "PeakConfig", "coarse_kernel_from_peaks",
    "detect_peaks", "estimate_kernel", "linear_kernel_from_peaks",
    "motion_spectrum", "autocorrelation", "circular_convolve", "dft2", "idft2",
    "luminance", "phase_only", "tophat_phase_profile", "delta_kernel",
    "read_kernel_text", "validate_kernel", "write_kernel_text", "MetricReport",
    "error_ratio", "psnr", "report", "ssd", "ssim", "RegionMask",
    "RegionResult", "deblur_nonuniform", "grid_decompose", "load_region_masks",
    "DeblurParams", "DeblurResult", "alternate", "auxiliary_gradients",
    "deblur_multiscale", "energy",
    "estimate_latent", "refine_kernel", "truncated_quadratic_penalty",
    "blur_with_kernel", "synthesize_linear_kernel", "test_pattern",
    "trajectory_kernel",
]
