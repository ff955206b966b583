"""Tests for the DFT utilities, phase-only operator and autocorrelation."""

import math

import numpy as np
import pytest

from phasedeblur.fourier import (autocorrelation, circular_convolve, dft2, idft2,
                                 kernel_to_otf, luminance, phase_only,
                                 phase_spectrum, tophat_phase_profile)
from phasedeblur.kernels import delta_kernel


def brute_force_dft2(img):
    """Direct O(N^4) summation of the 2-D DFT definition."""
    H, W = img.shape
    out = np.zeros((H, W), dtype=complex)
    for u in range(H):
        for v in range(W):
            acc = 0.0 + 0.0j
            for y in range(H):
                for x in range(W):
                    acc += img[y, x] * np.exp(-2j * np.pi * (u * y / H + v * x / W))
            out[u, v] = acc
    return out


def brute_force_autocorrelation(img):
    """Direct circular autocorrelation, centered like autocorrelation()."""
    H, W = img.shape
    out = np.zeros((H, W))
    for dy in range(H):
        for dx in range(W):
            out[dy, dx] = np.sum(img * np.roll(np.roll(img, -dy, axis=0), -dx, axis=1))
    return np.fft.fftshift(out)


def spatial_convolve(img, k):
    """Double-loop circular convolution oracle."""
    H, W = img.shape
    kh, kw = k.shape
    cy, cx = kh // 2, kw // 2
    out = np.zeros((H, W))
    for y in range(H):
        for x in range(W):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    acc += k[i, j] * img[(y - (i - cy)) % H, (x - (j - cx)) % W]
            out[y, x] = acc
    return out


class TestDft2:
    def test_constant_image_is_dc_only(self):
        img = np.full((8, 8), 0.7)
        spec = dft2(img)
        assert spec[0, 0] == pytest.approx(64 * 0.7)
        off = spec.copy()
        off[0, 0] = 0.0
        assert np.abs(off).max() < 1e-12

    def test_origin_impulse_is_flat(self):
        img = np.zeros((8, 8))
        img[0, 0] = 1.0
        assert np.allclose(dft2(img), np.ones((8, 8)), atol=1e-12)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(size=(16, 16))
        assert np.abs(dft2(img) - brute_force_dft2(img)).max() < 1e-8

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        img = rng.uniform(size=(16, 16))
        assert np.abs(idft2(dft2(img)) - img).max() < 1e-10

    def test_parseval(self):
        rng = np.random.default_rng(2)
        img = rng.uniform(size=(13, 17))
        lhs = np.sum(img**2) * img.size
        rhs = np.sum(np.abs(dft2(img)) ** 2)
        assert abs(lhs - rhs) / rhs < 1e-8

    def test_conjugate_symmetry_of_real_input(self):
        rng = np.random.default_rng(3)
        img = rng.uniform(size=(12, 10))
        spec = dft2(img)
        H, W = spec.shape
        for u in range(H):
            for v in range(W):
                ref = np.conj(spec[(-u) % H, (-v) % W])
                assert abs(spec[u, v] - ref) <= 1e-9 * (1.0 + abs(ref))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            dft2(np.zeros((0, 4)))


class TestIdft2:
    def test_flat_spectrum_is_origin_impulse(self):
        out = idft2(np.ones((8, 8), dtype=complex))
        expected = np.zeros((8, 8))
        expected[0, 0] = 1.0
        assert np.abs(out - expected).max() < 1e-12

    def test_inverse_of_forward(self):
        rng = np.random.default_rng(4)
        img = rng.uniform(size=(9, 11))
        spec = dft2(img)
        assert np.abs(idft2(spec) - img).max() < 1e-10

    def test_large_imaginary_residue_rejected(self):
        spec = np.zeros((8, 8), dtype=complex)
        spec[1, 0] = 1.0  # no conjugate partner -> complex output
        with pytest.raises(ValueError):
            idft2(spec)


class TestPhaseOnly:
    def test_impulse_fixed_point(self):
        img = np.zeros((16, 16))
        img[0, 0] = 1.0
        assert np.abs(phase_only(img) - img).max() < 1e-12

    def test_shift_covariance(self):
        img = np.zeros((16, 16))
        img[5, 9] = 1.0
        assert np.abs(phase_only(img) - img).max() < 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        img = rng.uniform(size=(32, 32))
        once = phase_only(img)
        assert np.abs(phase_only(once) - once).max() < 1e-9

    def test_rot90_covariance(self):
        rng = np.random.default_rng(6)
        img = rng.uniform(size=(24, 24))
        diff = phase_only(np.rot90(img)) - np.rot90(phase_only(img))
        assert np.abs(diff).max() < 1e-12

    def test_rejects_all_zero(self):
        with pytest.raises(ValueError):
            phase_only(np.zeros((8, 8)))

    def test_tophat_profile_correlation(self):
        # A centered width-w top hat in a long 1-px-high image; the phase-only
        # profile should track sinc(pi x / w) / cos(pi x / w) away from poles.
        w, n = 21, 1024
        sig = np.zeros((1, n))
        for x in range(-(w // 2), w // 2 + 1):  # symmetric about x = 0
            sig[0, x % n] = 1.0
        prof = phase_only(sig)[0]
        xs, want, got = [], [], []
        for x in range(-n // 2, n // 2):
            if abs(math.cos(math.pi * x / w)) > 0.2:
                xs.append(x)
                want.append(tophat_phase_profile(w, x))
                got.append(prof[x % n])
        r = np.corrcoef(want, got)[0, 1]
        assert r > 0.95


class TestAutocorrelation:
    def test_phase_only_is_uncorrelated(self):
        rng = np.random.default_rng(7)
        img = rng.uniform(size=(64, 64))
        ac = autocorrelation(phase_only(img))
        cy, cx = 32, 32
        peak = ac[cy, cx]
        off = ac.copy()
        off[cy, cx] = 0.0
        assert np.abs(off).max() < 1e-6 * peak

    def test_impulse(self):
        img = np.zeros((16, 16))
        img[3, 5] = 2.0
        ac = autocorrelation(img)
        assert ac[8, 8] == pytest.approx(4.0)
        off = ac.copy()
        off[8, 8] = 0.0
        assert np.abs(off).max() < 1e-12

    def test_shifted_copy_side_peaks(self):
        rng = np.random.default_rng(8)
        base = rng.uniform(size=(32, 32))
        img = base + np.roll(np.roll(base, 4, axis=0), 7, axis=1)
        ac = autocorrelation(img)
        oracle = brute_force_autocorrelation(img)
        assert np.abs(ac - oracle).max() < 1e-8
        center = ac[16, 16]
        assert ac[16 + 4, 16 + 7] > 0.4 * center
        assert ac[16 - 4, 16 - 7] > 0.4 * center

    def test_even_symmetry(self):
        rng = np.random.default_rng(9)
        ac = autocorrelation(rng.uniform(size=(20, 20)))
        flipped = ac[::-1, ::-1]
        flipped = np.roll(np.roll(flipped, 1 - 20 % 2, axis=0), 1 - 20 % 2, axis=1)
        # even grid: mirror about the center bin
        H = W = 20
        for dy in range(-5, 6):
            for dx in range(-5, 6):
                assert ac[10 + dy, 10 + dx] == pytest.approx(
                    ac[10 - dy, 10 - dx], abs=1e-9)


class TestCircularConvolve:
    def test_identity_kernel(self):
        rng = np.random.default_rng(10)
        img = rng.uniform(size=(16, 16))
        assert np.abs(circular_convolve(img, delta_kernel(5)) - img).max() < 1e-12

    def test_constant_image(self):
        rng = np.random.default_rng(11)
        k = rng.uniform(size=(5, 5))
        k /= k.sum()
        img = np.full((16, 16), 0.3)
        assert np.abs(circular_convolve(img, k) - 0.3).max() < 1e-12

    def test_matches_spatial_oracle(self):
        rng = np.random.default_rng(12)
        img = rng.uniform(size=(32, 32))
        k = rng.uniform(size=(5, 5))
        k /= k.sum()
        assert np.abs(circular_convolve(img, k) - spatial_convolve(img, k)).max() < 1e-9

    def test_color_channels_independent(self):
        rng = np.random.default_rng(13)
        img = rng.uniform(size=(16, 16, 3))
        k = rng.uniform(size=(3, 3))
        k /= k.sum()
        out = circular_convolve(img, k)
        for c in range(3):
            assert np.allclose(out[:, :, c], circular_convolve(img[:, :, c], k))

    def test_kernel_larger_than_image_rejected(self):
        with pytest.raises(ValueError):
            circular_convolve(np.ones((4, 4)), np.full((5, 5), 1.0 / 25))


class TestLemma1:
    def test_phase_of_convolution_factorizes(self):
        # P(L (x) k) == F^-1(P(F(L)) . P(F(k_grid))) for k embedded on L's grid.
        rng = np.random.default_rng(14)
        for trial in range(5):
            L = rng.uniform(size=(32, 32))
            k = rng.uniform(size=(5, 5))
            k /= k.sum()
            B = circular_convolve(L, k)
            lhs = phase_only(B)
            otf = kernel_to_otf(k, (32, 32))
            rhs = np.fft.ifft2(phase_spectrum(np.fft.fft2(L))
                               * phase_spectrum(otf)).real
            assert np.abs(lhs - rhs).max() < 1e-9


class TestTophatProfile:
    def test_at_zero(self):
        assert tophat_phase_profile(20, 0.0) == pytest.approx(math.sqrt(2 * math.pi) / 20)

    def test_sinc_zero(self):
        assert tophat_phase_profile(20, 20.0) == pytest.approx(0.0, abs=1e-15)

    def test_value_matches_direct_formula(self):
        # independent high-precision evaluation at w=20, x=5
        w, x = 20.0, 5.0
        t = math.pi * x / w
        expected = (math.sqrt(2 * math.pi) / w) * (math.sin(t) / t) / math.cos(t)
        assert tophat_phase_profile(w, x) == pytest.approx(expected, rel=1e-12)

    def test_pole_rejected(self):
        with pytest.raises(ValueError):
            tophat_phase_profile(20, 10.0)  # cos(pi/2) = 0


class TestLuminance:
    def test_grayscale_passthrough(self):
        img = np.random.default_rng(15).uniform(size=(8, 8))
        assert np.array_equal(luminance(img), img)

    def test_rec601_weights(self):
        img = np.zeros((2, 2, 3))
        img[..., 0] = 1.0
        assert np.allclose(luminance(img), 0.299)
