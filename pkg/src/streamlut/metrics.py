"""Luma-plane quality metrics: PSNR and single-scale SSIM.

Both operate on the Y channel at 8-bit dynamic range (peak 255).  PSNR is
capped at 99 dB, the value the formula reaches at MSE = 255^2 * 10^-9.9, so
identical frames report a finite number.  SSIM follows the standard
Gaussian-window formulation (11x11, sigma 1.5, K1=0.01, K2=0.03) averaged
over fully valid window positions only.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DataError

PSNR_CAP_DB = 99.0
_PEAK = 255.0
_WINDOW = 11
_SIGMA = 1.5
_K1, _K2 = 0.01, 0.03


def _check_pair(ref: np.ndarray, test: np.ndarray):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise DataError(f"plane shapes differ: {ref.shape} vs {test.shape}")
    if ref.ndim != 2:
        raise DataError(f"planes must be 2-D, got shape {ref.shape}")
    return ref, test


def psnr(ref: np.ndarray, test: np.ndarray) -> float:
    """10*log10(255^2 / MSE) in dB, capped at 99."""
    ref, test = _check_pair(ref, test)
    mse = np.mean((ref - test) ** 2)
    if mse < _PEAK**2 * 10.0**-9.9:
        return PSNR_CAP_DB
    return float(10.0 * np.log10(_PEAK**2 / mse))


def _gaussian_window() -> np.ndarray:
    half = (_WINDOW - 1) / 2.0
    t = np.arange(_WINDOW, dtype=np.float64) - half
    g = np.exp(-(t**2) / (2.0 * _SIGMA**2))
    return g / g.sum()


def _windowed_mean(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    # Separable Gaussian filtering; border-contaminated rows/columns are
    # cropped afterwards, so the boundary mode never reaches the output.
    m = correlate1d(x, g, axis=0, mode="nearest")
    m = correlate1d(m, g, axis=1, mode="nearest")
    half = (_WINDOW - 1) // 2
    return m[half:-half, half:-half]


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """Mean structural similarity over valid 11x11 window positions."""
    ref, test = _check_pair(ref, test)
    if min(ref.shape) < _WINDOW:
        raise DataError(
            f"planes must be at least {_WINDOW}x{_WINDOW} for SSIM, got {ref.shape}"
        )
    c1 = (_K1 * _PEAK) ** 2
    c2 = (_K2 * _PEAK) ** 2
    g = _gaussian_window()

    mu_r = _windowed_mean(ref, g)
    mu_t = _windowed_mean(test, g)
    var_r = _windowed_mean(ref * ref, g) - mu_r * mu_r
    var_t = _windowed_mean(test * test, g) - mu_t * mu_t
    cov = _windowed_mean(ref * test, g) - mu_r * mu_t

    num = (2.0 * mu_r * mu_t + c1) * (2.0 * cov + c2)
    den = (mu_r * mu_r + mu_t * mu_t + c1) * (var_r + var_t + c2)
    return float(np.mean(num / den))
