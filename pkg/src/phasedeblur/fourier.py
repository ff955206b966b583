"""2-D DFT utilities, the phase-only operator and circular convolution.

Conventions: unnormalized forward transform, 1/(W*H) on the inverse (numpy's
default), DC at index (0, 0).  All functions are pure and operate on float64
arrays; images are (H, W) or (H, W, 3) ndarrays with nominal range [0, 1].
"""

import numpy as np

# Spectrum coefficients with magnitude at or below this are treated as true
# zeros: their phase is undefined, so they are mapped to 1+0j.
ZERO_MAGNITUDE_TOL = 1e-12

# Maximum imaginary residue tolerated when the inverse transform of a
# conjugate-symmetric spectrum is collapsed to a real image.
IMAG_RESIDUE_TOL = 1e-8

POLE_TOL = 1e-6


def _as_gray(img):
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a single-channel 2-D image, got shape {a.shape}")
    if a.size == 0:
        raise ValueError("zero-sized image")
    if not np.all(np.isfinite(a)):
        raise ValueError("image contains non-finite values")
    return a


def dft2(img):
    """Forward 2-D DFT of a single-channel image (unnormalized)."""
    return np.fft.fft2(_as_gray(img))


def idft2(spec):
    """Inverse 2-D DFT with 1/(W*H) normalization, returned as a real image.

    The imaginary residue must be below IMAG_RESIDUE_TOL; a larger residue
    signals a broken conjugate symmetry upstream and raises ValueError.
    """
    s = np.asarray(spec, dtype=np.complex128)
    if s.ndim != 2 or s.size == 0:
        raise ValueError(f"expected a non-empty 2-D spectrum, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("spectrum contains non-finite values")
    out = np.fft.ifft2(s)
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if residue > IMAG_RESIDUE_TOL * scale:
        raise ValueError(
            f"inverse DFT imaginary residue {residue:.3e} exceeds tolerance; "
            "input spectrum is not conjugate-symmetric"
        )
    return out.real


def phase_spectrum(spec):
    """Normalize every coefficient to unit magnitude (near-zeros become 1)."""
    s = np.asarray(spec, dtype=np.complex128)
    mag = np.abs(s)
    out = np.where(mag > ZERO_MAGNITUDE_TOL, s / np.where(mag == 0, 1.0, mag), 1.0 + 0.0j)
    return out


def phase_only(img):
    """Phase-only image: inverse DFT of the unit-magnitude spectrum.

    Acts as an edge extractor and is shift- and rotation-covariant.  An
    identically zero image is rejected (phase is undefined everywhere).
    """
    a = _as_gray(img)
    if not np.any(a):
        raise ValueError("phase_only is undefined for an all-zero image")
    spec = phase_spectrum(np.fft.fft2(a))
    return np.fft.ifft2(spec).real


def autocorrelation(img):
    """Circular autocorrelation with the zero-lag peak at the grid center.

    Computed in the frequency domain as ifft(F * conj(F)); the result is real
    and even-symmetric about the center pixel (H//2, W//2).
    """
    a = _as_gray(img)
    f = np.fft.fft2(a)
    ac = np.fft.ifft2(f * np.conj(f)).real
    return np.fft.fftshift(ac)


def kernel_to_otf(kernel, shape):
    """Embed a centered kernel on a grid of `shape` and return its DFT.

    The kernel's center tap lands on index (0, 0) so that multiplication in
    the frequency domain realizes centered circular convolution.
    """
    k = np.asarray(kernel, dtype=np.float64)
    kh, kw = k.shape
    H, W = shape
    if kh > H or kw > W:
        raise ValueError(f"kernel {k.shape} larger than image grid {shape}")
    pad = np.zeros(shape, dtype=np.float64)
    pad[:kh, :kw] = k
    pad = np.roll(pad, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    return np.fft.fft2(pad)


def circular_convolve(img, kernel):
    """Per-channel circular convolution of an image with a centered kernel."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 2:
        otf = kernel_to_otf(kernel, a.shape)
        return np.fft.ifft2(np.fft.fft2(a) * otf).real
    if a.ndim == 3:
        otf = kernel_to_otf(kernel, a.shape[:2])
        out = np.empty_like(a)
        for c in range(a.shape[2]):
            out[:, :, c] = np.fft.ifft2(np.fft.fft2(a[:, :, c]) * otf).real
        return out
    raise ValueError(f"expected 2-D or 3-D image, got shape {a.shape}")


def tophat_phase_profile(w, x):
    """Closed-form phase-only profile of a width-`w` top-hat at offset `x`.

    Evaluates (sqrt(2*pi)/w) * sinc(pi*x/w) / cos(pi*x/w) with
    sinc(t) = sin(t)/t.  Raises ValueError near the poles of 1/cos.
    """
    if w <= 0:
        raise ValueError("top-hat width must be positive")
    c = np.cos(np.pi * x / w)
    if abs(c) <= POLE_TOL:
        raise ValueError(f"profile pole at x={x} for width {w}")
    return float(np.sqrt(2.0 * np.pi) / w * np.sinc(x / w) / c)


def luminance(img):
    """Collapse an image to a single channel (0.299 R + 0.587 G + 0.114 B)."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 2:
        return a.copy()
    if a.ndim == 3 and a.shape[2] == 1:
        return a[:, :, 0].copy()
    if a.ndim == 3 and a.shape[2] == 3:
        return 0.299 * a[:, :, 0] + 0.587 * a[:, :, 1] + 0.114 * a[:, :, 2]
    raise ValueError(f"expected 1 or 3 channels, got shape {a.shape}")
