"""Blur-kernel estimation from the autocorrelation of the absolute
phase-only image.

Pipeline: luminance -> edge taper -> |phase_only| -> autocorrelation ->
side-peak detection -> kernel construction.  For linear camera motion the
autocorrelation shows one mirrored pair of side peaks whose offset gives the
motion direction and magnitude directly.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .fourier import autocorrelation, luminance, phase_only
from .kernels import (near_delta_kernel, rasterize_line_coverage,
                      rasterize_segment_uniform)

log = logging.getLogger(__name__)

# Two detections closer than this (px) are considered the same mirrored peak.
MIRROR_MATCH_RADIUS = 1.5

# Representative offsets farther than this from the dominant axis make the
# motion non-linear, switching kernel construction to segment superposition.
COLLINEARITY_TOL = 1.0


@dataclass(frozen=True)
class Peak:
    """One autocorrelation side peak: sub-pixel lag and normalized strength."""

    dx: float
    dy: float
    strength: float


@dataclass(frozen=True)
class MotionPattern:
    angle: float        # degrees in [0, 180); direction sign is unobservable
    magnitude: float    # pixels
    peaks: tuple = ()
    confidence: bool = True


@dataclass(frozen=True)
class PeakConfig:
    central_exclusion_radius: float = 3.0
    relative_threshold: float = 0.5
    max_peaks: int = 10
    taper_fraction: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.relative_threshold < 1.0:
            raise ValueError("relative_threshold must be in (0, 1)")
        if self.central_exclusion_radius < 1.0:
            raise ValueError("central_exclusion_radius must be >= 1")
        if self.max_peaks < 2:
            raise ValueError("max_peaks must be >= 2")
        if not 0.0 <= self.taper_fraction < 0.5:
            raise ValueError("taper_fraction must be in [0, 0.5)")


def _taper_window(n, fraction):
    ramp = int(round(fraction * n))
    w = np.ones(n)
    if ramp > 0:
        r = 0.5 * (1.0 - np.cos(np.pi * (np.arange(ramp) + 0.5) / ramp))
        w[:ramp] *= r
        w[n - ramp:] *= r[::-1]
    return w


def edge_taper(img, fraction):
    """Fade a raised-cosine border band to suppress wrap-around cross-talk."""
    a = np.asarray(img, dtype=np.float64)
    H, W = a.shape
    return a * np.outer(_taper_window(H, fraction), _taper_window(W, fraction))


def motion_spectrum(blurry, cfg=None):
    """Center-normalized autocorrelation of the absolute phase-only image."""
    cfg = cfg or PeakConfig()
    lum = luminance(blurry)
    lum -= lum.mean()
    if not np.any(np.abs(lum) > 1e-12):
        raise ValueError("constant image: no structure to estimate motion from")
    tapered = edge_taper(lum, cfg.taper_fraction)
    p = np.abs(phase_only(tapered))
    p -= p.mean()
    ac = autocorrelation(p)
    center = ac[ac.shape[0] // 2, ac.shape[1] // 2]
    if center <= 0:
        raise ValueError("degenerate autocorrelation (no central peak)")
    return ac / center


def _parabolic_offset(fm, f0, fp):
    denom = fm - 2.0 * f0 + fp
    if denom >= -1e-12:
        return 0.0
    return float(np.clip(0.5 * (fm - fp) / denom, -0.5, 0.5))


def detect_peaks(acorr, cfg=None):
    """Mirrored side-peak pairs of a center-normalized autocorrelation.

    Local maxima outside the central exclusion radius that reach the relative
    threshold are localized to sub-pixel accuracy with a 3-point parabolic
    fit, merged with their mirrors, and returned strongest-first.  The result
    is mirror-closed and capped at cfg.max_peaks entries.
    """
    cfg = cfg or PeakConfig()
    a = np.asarray(acorr, dtype=np.float64)
    H, W = a.shape
    cy, cx = H // 2, W // 2
    yy, xx = np.meshgrid(np.arange(H) - cy, np.arange(W) - cx, indexing="ij")
    outside = yy**2 + xx**2 > cfg.central_exclusion_radius**2
    if not np.any(outside):
        return []
    off_max = float(a[outside].max())
    if off_max <= 0:
        return []
    threshold = cfg.relative_threshold * off_max
    is_max = a >= ndimage.maximum_filter(a, size=3, mode="wrap")
    ys, xs = np.nonzero(is_max & outside & (a >= threshold))

    cands = []
    for y, x in zip(ys, xs):
        offy = _parabolic_offset(a[(y - 1) % H, x], a[y, x], a[(y + 1) % H, x])
        offx = _parabolic_offset(a[y, (x - 1) % W], a[y, x], a[y, (x + 1) % W])
        cands.append((float(x - cx + offx), float(y - cy + offy),
                      float(min(a[y, x], 1.0))))

    pairs = []
    used = [False] * len(cands)
    order = sorted(range(len(cands)), key=lambda i: -cands[i][2])
    for i in order:
        if used[i]:
            continue
        dx, dy, s = cands[i]
        used[i] = True
        for j in order:
            if used[j]:
                continue
            mdx, mdy, ms = cands[j]
            if np.hypot(mdx + dx, mdy + dy) <= MIRROR_MATCH_RADIUS:
                used[j] = True
                dx, dy = (dx - mdx) / 2.0, (dy - mdy) / 2.0
                s = (s + ms) / 2.0
                break
        if dy < 0 or (dy == 0 and dx < 0):
            dx, dy = -dx, -dy
        pairs.append((dx, dy, s))

    pairs.sort(key=lambda p: -p[2])
    pairs = pairs[: cfg.max_peaks // 2]
    out = []
    for dx, dy, s in pairs:
        out.append(Peak(dx, dy, s))
        out.append(Peak(-dx, -dy, s))
    return out


def _representatives(peaks):
    """Half-plane representative (dy > 0, or dy == 0 and dx > 0) per pair."""
    reps = []
    for p in peaks:
        dx, dy = p.dx, p.dy
        if dy < 0 or (dy == 0 and dx < 0):
            dx, dy = -dx, -dy
        if not any(np.hypot(dx - r.dx, dy - r.dy) < 1e-6 for r in reps):
            reps.append(Peak(dx, dy, p.strength))
    return reps


def linear_kernel_from_peaks(peaks):
    """Uniform line kernel spanning the strongest mirrored peak pair."""
    if not peaks:
        raise ValueError("empty peak list")
    reps = _representatives(peaks)
    best = max(reps, key=lambda p: p.strength)
    magnitude = float(np.hypot(best.dx, best.dy))
    angle = float(np.degrees(np.arctan2(best.dy, best.dx)) % 180.0)
    support = 2 * int(np.ceil(magnitude / 2.0)) + 1
    kernel = rasterize_segment_uniform(
        (-best.dx / 2.0, -best.dy / 2.0), (best.dx / 2.0, best.dy / 2.0), support)
    pattern = MotionPattern(angle=angle, magnitude=magnitude,
                            peaks=tuple(peaks), confidence=True)
    return kernel, pattern


def coarse_kernel_from_peaks(peaks):
    """Strength-weighted superposition of center-to-peak segments.

    Used for non-linear trajectories where several peak pairs appear; the
    superposed mass is recentered at its centroid and normalized.
    """
    if not peaks:
        raise ValueError("empty peak list")
    reps = _representatives(peaks)
    maxmag = max(np.hypot(r.dx, r.dy) for r in reps)
    canvas = 2 * int(np.ceil(maxmag)) + 3
    acc = np.zeros((canvas, canvas))
    for r in reps:
        seg = rasterize_segment_uniform((0.0, 0.0), (r.dx, r.dy), canvas)
        acc += r.strength * seg
    total = acc.sum()
    c = canvas // 2
    yy, xx = np.meshgrid(np.arange(canvas) - c, np.arange(canvas) - c, indexing="ij")
    shift_y = int(np.rint((acc * yy).sum() / total))
    shift_x = int(np.rint((acc * xx).sum() / total))
    acc = np.roll(acc, (-shift_y, -shift_x), axis=(0, 1))

    ys, xs = np.nonzero(acc)
    extent = int(max(np.max(np.abs(ys - c)), np.max(np.abs(xs - c))))
    side = max(3, 2 * extent + 1, 2 * int(np.ceil(maxmag / 2.0)) + 1)
    half = side // 2
    out = acc[c - half: c + half + 1, c - half: c + half + 1]
    out = np.clip(out, 0.0, None)
    return out / out.sum()


def estimate_kernel(blurry, cfg=None):
    """Full phase-based initial kernel estimate for a blurry image.

    Returns (kernel, MotionPattern).  When no side peak passes the threshold
    a 3x3 near-delta kernel is returned with confidence=False and the
    refinement stage carries the estimation burden.
    """
    cfg = cfg or PeakConfig()
    ms = motion_spectrum(blurry, cfg)
    peaks = detect_peaks(ms, cfg)
    if not peaks:
        log.warning("no autocorrelation side peak above threshold; "
                    "falling back to a near-delta kernel")
        return near_delta_kernel(), MotionPattern(0.0, 0.0, (), confidence=False)
    kernel, pattern = linear_kernel_from_peaks(peaks)
    if pattern.magnitude >= 1.0:
        # Anti-aliased coverage along the motion axis initializes refinement
        # better than the per-pixel uniform raster, especially off-axis.
        kernel = rasterize_line_coverage(pattern.magnitude, pattern.angle)
    reps = _representatives(peaks)
    if len(reps) > 1:
        axis = np.array([np.cos(np.deg2rad(pattern.angle)),
                         np.sin(np.deg2rad(pattern.angle))])
        perp = np.array([-axis[1], axis[0]])
        if any(abs(r.dx * perp[0] + r.dy * perp[1]) > COLLINEARITY_TOL for r in reps):
            kernel = coarse_kernel_from_peaks(peaks)
    return kernel, pattern
