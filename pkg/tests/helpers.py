"""Shared oracles for the test suite.

Everything here is deliberately independent of the spectral code paths it
checks: finite differences use np.roll stencils, convolutions are explicit,
quadratures are dense classical rules.
"""

from __future__ import annotations

import numpy as np

from kortorus.spectral import ScalarField


def fd4_derivative(data: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order centered first derivative on a periodic axis."""
    def roll(s):
        return np.roll(data, -s, axis=axis)
    return (8.0 * (roll(1) - roll(-1)) - (roll(2) - roll(-2))) / (12.0 * h)


def fd4_second_derivative(data: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order centered second derivative on a periodic axis."""
    def roll(s):
        return np.roll(data, -s, axis=axis)
    return (-roll(2) + 16.0 * roll(1) - 30.0 * data + 16.0 * roll(-1)
            - roll(-2)) / (12.0 * h * h)


def fd4_gradient(field: ScalarField) -> np.ndarray:
    grid = field.grid
    return np.stack([fd4_derivative(field.data, ax, grid.spacing[ax])
                     for ax in range(grid.dim)])


def fd4_laplacian(field: ScalarField) -> np.ndarray:
    grid = field.grid
    return sum(fd4_second_derivative(field.data, ax, grid.spacing[ax])
               for ax in range(grid.dim))


def circular_convolution_coeffs(a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """Exact (non-aliased) product spectrum of two 1-D coefficient arrays in
    FFT layout, truncated back to the same layout.

    With fftshift the entry j holds wavenumber k = j - n//2, so the full
    linear convolution index p = j1 + j2 holds the wavenumber sum p - n.
    """
    n = a_hat.size
    full = np.convolve(np.fft.fftshift(a_hat), np.fft.fftshift(b_hat))
    keep = np.zeros(n, dtype=complex)
    for i in range(n):
        k = i if i < n // 2 else i - n
        keep[i] = full[k + n]
    return keep


def dense_quadrature_1d(fn, length: float, n: int = 2 ** 20) -> float:
    """Rectangle rule on a dense grid, for oracles on [0, length)."""
    x = np.arange(n) * (length / n)
    return float(np.mean(fn(x)) * length)


def max_abs(a) -> float:
    return float(np.max(np.abs(a)))


def rel_linf(a, b) -> float:
    scale = max(max_abs(a), max_abs(b), 1e-300)
    return max_abs(np.asarray(a) - np.asarray(b)) / scale
