"""Synthetic ground truth: test patterns, motion kernels, blurred observations.

Everything is seeded and deterministic so round-trip tests can freeze
expected values.
"""

import numpy as np

from .fourier import circular_convolve
from .kernels import delta_kernel, normalize_kernel, rasterize_line_coverage, trim_kernel


def synthesize_linear_kernel(length, angle_deg):
    """Anti-aliased uniform line kernel of the given pixel length and angle.

    Mass is coverage-weighted over a length x 1 rotated rectangle, so the
    second moment along the motion axis matches a uniform segment.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if length == 1:
        return delta_kernel(1)
    return rasterize_line_coverage(length, angle_deg)


def trajectory_kernel(waypoints, samples_per_segment=256):
    """Kernel traced by a piecewise-linear trajectory with uniform exposure.

    Equal mass is deposited along each segment by bilinear splatting; the
    result is recentered at its mass centroid (rounded to the grid).  All
    waypoints coincident yields a delta kernel.
    """
    pts = np.asarray(waypoints, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("need at least 2 waypoints of 2 coordinates each")
    if np.allclose(pts, pts[0]):
        return delta_kernel(1)

    span = int(np.ceil(np.abs(pts).max())) + 3
    side = 2 * span + 1
    c = side // 2
    acc = np.zeros((side, side))
    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        seg_len = float(np.hypot(*seg))
        # Half-pixel end caps make a straight two-point trajectory agree with
        # the anti-aliased line kernel of the same extent.
        direction = seg / seg_len if seg_len > 0 else np.zeros(2)
        a_ext = a - 0.5 * direction
        b_ext = b + 0.5 * direction
        n = max(samples_per_segment, 2)
        t = (np.arange(n) + 0.5) / n
        xs = a_ext[0] + (b_ext[0] - a_ext[0]) * t
        ys = a_ext[1] + (b_ext[1] - a_ext[1]) * t
        x0 = np.floor(xs).astype(int)
        y0 = np.floor(ys).astype(int)
        fx = xs - x0
        fy = ys - y0
        w = 1.0 / n
        np.add.at(acc, (y0 + c, x0 + c), w * (1 - fx) * (1 - fy))
        np.add.at(acc, (y0 + c, x0 + 1 + c), w * fx * (1 - fy))
        np.add.at(acc, (y0 + 1 + c, x0 + c), w * (1 - fx) * fy)
        np.add.at(acc, (y0 + 1 + c, x0 + 1 + c), w * fx * fy)

    total = acc.sum()
    yy, xx = np.meshgrid(np.arange(side) - c, np.arange(side) - c, indexing="ij")
    sy = int(np.rint((acc * yy).sum() / total))
    sx = int(np.rint((acc * xx).sum() / total))
    acc = np.roll(acc, (-sy, -sx), axis=(0, 1))
    return normalize_kernel(trim_kernel(acc))


def blur_with_kernel(L, k, noise_sigma=0.0, seed=0):
    """Circularly blur an image and add seeded Gaussian noise."""
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    B = circular_convolve(L, k)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        B = B + rng.normal(0.0, noise_sigma, size=B.shape)
    return B


def test_pattern(kind, size, seed=0, tile=8):
    """Deterministic single-channel test image in [0, 1].

    kinds: "checker" (square tiles), "noise" (white, no spectral zeros),
    "edges" (random painted discs, broadband step edges at all orientations),
    "circle" (binary centered disc of radius size/4).
    """
    if size < 32:
        raise ValueError("pattern size must be >= 32")
    if kind == "noise":
        rng = np.random.default_rng(seed)
        return rng.uniform(0.0, 1.0, size=(size, size))
    if kind == "checker":
        idx = np.arange(size) // tile
        return ((idx[:, None] + idx[None, :]) % 2).astype(np.float64)
    if kind == "circle":
        yy, xx = np.meshgrid(np.arange(size) - size / 2.0,
                             np.arange(size) - size / 2.0, indexing="ij")
        return (yy**2 + xx**2 <= (size / 4.0) ** 2).astype(np.float64)
    if kind == "edges":
        rng = np.random.default_rng(seed)
        img = np.full((size, size), 0.5)
        yy, xx = np.meshgrid(np.arange(size, dtype=np.float64),
                             np.arange(size, dtype=np.float64), indexing="ij")
        for _ in range(40):
            cx, cy = rng.uniform(0, size, 2)
            r = rng.uniform(size / 24.0, size / 6.0)
            v = rng.uniform(0.0, 1.0)
            img[(yy - cy) ** 2 + (xx - cx) ** 2 <= r**2] = v
        return img
    raise ValueError(f"unknown pattern kind {kind!r}")
