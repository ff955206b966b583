"""Image file I/O: 8/16-bit PNG and PGM/PPM, normalized to float [0, 1].

Color images are returned channel-last in RGB order.
"""

import os

import cv2
import numpy as np

SUPPORTED_EXTENSIONS = (".png", ".pgm", ".ppm", ".pnm")


def read_image(path):
    """Read an image as float64 in [0, 1]; (H, W) or (H, W, 3)."""
    if not os.path.exists(path):
        raise IOError(f"no such file: {path}")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise IOError(f"cannot decode image: {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise IOError(f"{path}: unsupported sample type {raw.dtype}")
    img = raw.astype(np.float64) / scale
    if img.ndim == 3:
        if img.shape[2] == 4:
            img = img[:, :, :3]
        img = img[:, :, ::-1]  # BGR -> RGB
    return np.ascontiguousarray(img)


def write_image(path, img, depth=16):
    """Write a float [0, 1] image as 8- or 16-bit PNG/PGM/PPM."""
    if depth not in (8, 16):
        raise ValueError("depth must be 8 or 16")
    ext = os.path.splitext(path)[1].lower()
    if ext not in SUPPORTED_EXTENSIONS:
        raise IOError(f"unsupported output format: {path}")
    a = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    if a.ndim == 3:
        a = a[:, :, ::-1]  # RGB -> BGR
    if depth == 8:
        data = np.rint(a * 255.0).astype(np.uint8)
    else:
        data = np.rint(a * 65535.0).astype(np.uint16)
    if not cv2.imwrite(path, data):
        raise IOError(f"failed to write image: {path}")
