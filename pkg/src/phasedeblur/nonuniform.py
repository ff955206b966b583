"""Spatially varying deblurring: masked decomposition, per-region uniform
deblurring, partition-of-unity compositing."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernels import delta_kernel
from .optimizer import DeblurParams, deblur_multiscale

log = logging.getLogger(__name__)

PARTITION_TOL = 1e-9
MIN_PATCH_SIDE = 64


@dataclass
class RegionMask:
    """Soft per-pixel weights in [0, 1] with a tight bounding box.

    bounding_box is (y0, x0, y1, x1) with exclusive upper bounds.
    """

    weights: np.ndarray
    bounding_box: tuple

    @classmethod
    def from_weights(cls, weights):
        w = np.asarray(weights, dtype=np.float64)
        ys, xs = np.nonzero(w > 0)
        if ys.size == 0:
            raise ValueError("mask has no support")
        return cls(w, (int(ys.min()), int(xs.min()), int(ys.max()) + 1, int(xs.max()) + 1))


@dataclass
class RegionResult:
    mask: RegionMask
    kernel: np.ndarray
    latent_patch: np.ndarray


def _axis_weights(n, patches, overlap_fraction):
    """1-D partition-of-unity windows: flat interiors, cos^2 cross-fades."""
    nominal = n / patches
    o = overlap_fraction * nominal
    bounds = [i * nominal for i in range(patches + 1)]
    x = np.arange(n) + 0.5
    ws = []
    for i in range(patches):
        lo, hi = bounds[i], bounds[i + 1]
        w = np.zeros(n)
        if i == 0:
            left = np.ones(n)
        else:
            t = np.clip((x - (lo - o)) / (2.0 * o) if o > 0 else (x >= lo) * 1.0, 0.0, 1.0)
            left = np.sin(0.5 * np.pi * t) ** 2 if o > 0 else (x >= lo).astype(float)
        if i == patches - 1:
            right = np.ones(n)
        else:
            t = np.clip((x - (hi - o)) / (2.0 * o) if o > 0 else (x >= hi) * 1.0, 0.0, 1.0)
            right = np.cos(0.5 * np.pi * t) ** 2 if o > 0 else (x < hi).astype(float)
        w = left * right
        ws.append(w)
    return ws


def grid_decompose(B, patches_x, patches_y, overlap_fraction=0.25):
    """Overlapping rectangular patch masks forming a partition of unity."""
    B = np.asarray(B)
    H, W = B.shape[:2]
    if patches_x < 1 or patches_y < 1:
        raise ValueError("patch counts must be >= 1")
    if not 0.0 <= overlap_fraction < 0.5:
        raise ValueError("overlap_fraction must be in [0, 0.5)")
    if W / patches_x < MIN_PATCH_SIDE or H / patches_y < MIN_PATCH_SIDE:
        raise ValueError(f"patches smaller than {MIN_PATCH_SIDE} px per side")
    wxs = _axis_weights(W, patches_x, overlap_fraction)
    wys = _axis_weights(H, patches_y, overlap_fraction)
    masks = []
    for wy in wys:
        for wx in wxs:
            masks.append(RegionMask.from_weights(np.outer(wy, wx)))
    return masks


def validate_partition(masks, shape):
    total = np.zeros(shape[:2])
    for m in masks:
        if m.weights.shape != shape[:2]:
            raise ValueError("mask shape does not match image")
        total += m.weights
    if np.max(np.abs(total - 1.0)) > PARTITION_TOL:
        raise ValueError("masks do not form a partition of unity")


def load_region_masks(arrays):
    """Build a partition of unity from raw (e.g. 8-bit) mask images.

    Pixelwise division by the stack sum; a pixel covered by no mask is an
    error.
    """
    stack = [np.asarray(a, dtype=np.float64) for a in arrays]
    total = np.sum(stack, axis=0)
    if np.any(total <= 0):
        raise ValueError("mask stack leaves uncovered pixels")
    return [RegionMask.from_weights(a / total) for a in stack]


def _deblur_region(B, mask, p, peak_cfg):
    y0, x0, y1, x1 = mask.bounding_box
    crop = B[y0:y1, x0:x1]
    try:
        res = deblur_multiscale(crop, p, peak_cfg=peak_cfg)
        return RegionResult(mask, res.kernel, res.latent)
    except Exception as exc:  # degrade, never abort the whole image
        log.warning("region %s failed (%s); falling back to identity",
                    mask.bounding_box, exc)
        return RegionResult(mask, delta_kernel(1), np.array(crop, dtype=np.float64))


def deblur_nonuniform(B, masks, p=None, peak_cfg=None, jobs=1):
    """Deblur each masked region independently and composite.

    Returns (composite latent, list of RegionResult).  The composite is the
    mask-weighted sum of region latents placed at their bounding boxes, so
    with a single all-ones mask the result is identical to the uniform
    pipeline.
    """
    p = p or DeblurParams()
    B = np.asarray(B, dtype=np.float64)
    validate_partition(masks, B.shape)

    env_cap = os.environ.get("PHASE_DEBLUR_THREADS")
    if env_cap is not None:
        jobs = max(1, min(jobs, int(env_cap)))
    if jobs > 1 and len(masks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda m: _deblur_region(B, m, p, peak_cfg), masks))
    else:
        results = [_deblur_region(B, m, p, peak_cfg) for m in masks]

    out = np.zeros_like(B)
    for r in results:
        y0, x0, y1, x1 = r.mask.bounding_box
        w = r.mask.weights[y0:y1, x0:x1]
        if B.ndim == 3:
            w = w[:, :, np.newaxis]
        out[y0:y1, x0:x1] += w * r.latent_patch
    return out, results
