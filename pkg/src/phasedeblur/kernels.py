"""Blur-kernel helpers: validation, rasterization, resizing, text format.

A kernel is a small 2-D float64 array with odd side lengths, non-negative
weights and unit sum.  The text format used across the toolkit is:

    kw kh
    <kh rows of kw whitespace-separated decimal weights>

Readers renormalize to unit sum and reject weights below -1e-9.
"""

import numpy as np
from scipy import ndimage

KERNEL_SUM_TOL = 1e-9
NEGATIVE_WEIGHT_TOL = -1e-9


def validate_kernel(k):
    """Check Kernel invariants; returns the array or raises ValueError."""
    a = np.asarray(k, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"kernel must be 2-D, got shape {a.shape}")
    kh, kw = a.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"kernel sides must be odd, got {kw}x{kh}")
    if not np.all(np.isfinite(a)):
        raise ValueError("kernel contains non-finite values")
    if np.any(a < NEGATIVE_WEIGHT_TOL):
        raise ValueError("kernel contains negative weights")
    s = float(a.sum())
    if abs(s - 1.0) > KERNEL_SUM_TOL:
        raise ValueError(f"kernel weights sum to {s}, expected 1")
    return a


def normalize_kernel(k):
    """Clip negatives to zero and rescale to unit sum."""
    a = np.clip(np.asarray(k, dtype=np.float64), 0.0, None)
    s = float(a.sum())
    if s <= 0.0:
        raise ValueError("kernel has no positive mass to normalize")
    return a / s


def delta_kernel(size=1):
    if size < 1 or size % 2 == 0:
        raise ValueError("delta kernel size must be odd and >= 1")
    k = np.zeros((size, size))
    k[size // 2, size // 2] = 1.0
    return k


def near_delta_kernel(center_weight=0.8):
    """3x3 fallback kernel: dominant center with a faint diffuse ring."""
    k = np.full((3, 3), (1.0 - center_weight) / 8.0)
    k[1, 1] = center_weight
    return k


def odd(n):
    n = int(np.ceil(n))
    return n if n % 2 == 1 else n + 1


def embed_kernel(k, size):
    """Zero-pad a kernel into the center of an odd `size` x `size` grid."""
    k = np.asarray(k, dtype=np.float64)
    kh, kw = k.shape
    if size < max(kh, kw):
        raise ValueError("target support smaller than kernel")
    out = np.zeros((size, size))
    cy, cx = size // 2, size // 2
    out[cy - kh // 2 : cy + kh // 2 + 1, cx - kw // 2 : cx + kw // 2 + 1] = k
    return out


def trim_kernel(k, tol=0.0):
    """Crop zero borders symmetrically, keeping the center tap centered."""
    a = np.asarray(k, dtype=np.float64)
    kh, kw = a.shape
    cy, cx = kh // 2, kw // 2
    ys, xs = np.nonzero(a > tol)
    if ys.size == 0:
        return a[cy : cy + 1, cx : cx + 1].copy()
    ry = int(max(np.max(np.abs(ys - cy)), 0))
    rx = int(max(np.max(np.abs(xs - cx)), 0))
    return a[cy - ry : cy + ry + 1, cx - rx : cx + rx + 1].copy()


def resize_kernel(k, factor, min_size=3):
    """Rescale a kernel by `factor` with bilinear interpolation, renormalize."""
    a = np.asarray(k, dtype=np.float64)
    if factor == 1.0:
        return a.copy()
    kh, kw = a.shape
    nh, nw = odd(max(kh * factor, 1)), odd(max(kw * factor, 1))
    nh, nw = max(nh, min_size), max(nw, min_size)
    # Map output taps back into the source grid about the center tap.
    yy, xx = np.meshgrid(np.arange(nh), np.arange(nw), indexing="ij")
    sy = (yy - nh // 2) / factor + kh // 2
    sx = (xx - nw // 2) / factor + kw // 2
    out = ndimage.map_coordinates(a, [sy.ravel(), sx.ravel()], order=1,
                                  mode="constant", cval=0.0).reshape(nh, nw)
    return normalize_kernel(out)


def rasterize_segment_uniform(p0, p1, support):
    """Equal weight on every pixel touched by the segment p0 -> p1.

    Points are (dx, dy) offsets from the kernel center; `support` is the odd
    side length of the returned square grid.
    """
    x0, y0 = p0
    x1, y1 = p1
    length = float(np.hypot(x1 - x0, y1 - y0))
    n = max(int(np.ceil(length * 16)), 1)
    # Midpoint sampling keeps exact .5 endpoints out of the neighboring cell.
    t = (np.arange(n) + 0.5) / n
    xs = x0 + (x1 - x0) * t
    ys = y0 + (y1 - y0) * t
    c = support // 2
    ix = np.rint(xs).astype(int) + c
    iy = np.rint(ys).astype(int) + c
    if np.any(ix < 0) or np.any(ix >= support) or np.any(iy < 0) or np.any(iy >= support):
        raise ValueError("segment exceeds kernel support")
    out = np.zeros((support, support))
    out[iy, ix] = 1.0
    return out / out.sum()


def rasterize_line_coverage(length, angle_deg, supersample=24):
    """Anti-aliased line kernel: coverage of a length x 1 rotated rectangle.

    Mass is proportional to the area each pixel shares with the rectangle,
    estimated by midpoint supersampling.  Returns a trimmed, normalized
    kernel with odd sides.
    """
    if length < 1:
        raise ValueError("line length must be >= 1")
    theta = np.deg2rad(angle_deg)
    half = length / 2.0
    support = odd(length + 2)
    c = support // 2
    ns = max(int(np.ceil(length * supersample)), supersample)
    nt = supersample
    s = -half + (np.arange(ns) + 0.5) * (length / ns)
    t = -0.5 + (np.arange(nt) + 0.5) / nt
    ss, tt = np.meshgrid(s, t, indexing="ij")
    xs = ss * np.cos(theta) - tt * np.sin(theta)
    ys = ss * np.sin(theta) + tt * np.cos(theta)
    ix = np.rint(xs).astype(int) + c
    iy = np.rint(ys).astype(int) + c
    out = np.zeros((support, support))
    np.add.at(out, (iy.ravel(), ix.ravel()), 1.0)
    return normalize_kernel(trim_kernel(out))


def write_kernel_text(path, k):
    a = validate_kernel(k)
    kh, kw = a.shape
    rows = "\n".join(" ".join(f"{v:.17g}" for v in row) for row in a)
    with open(path, "w") as f:
        f.write(f"{kw} {kh}\n{rows}\n")


def read_kernel_text(path):
    with open(path) as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: truncated kernel file")
    kw, kh = int(tokens[0]), int(tokens[1])
    vals = np.array([float(t) for t in tokens[2:]], dtype=np.float64)
    if vals.size != kw * kh:
        raise ValueError(f"{path}: expected {kw * kh} weights, found {vals.size}")
    if np.any(vals < NEGATIVE_WEIGHT_TOL):
        raise ValueError(f"{path}: kernel contains negative weights")
    k = normalize_kernel(vals.reshape(kh, kw))
    return validate_kernel(k)
