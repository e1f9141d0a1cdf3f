"""Discrete Fourier machinery on periodic complex signals.

A signal is a length-L numpy array holding one period of a sequence on the
integers.  The forward transform uses the unnormalized negative-exponent
convention

    x_hat(r) = sum_k x(k) exp(-2 pi i k r / L),

so Parseval reads ``sum |x_hat|^2 = L * sum |x|^2`` and frequency index r
sits at the grid point r/L of [0, 1).  Every formula elsewhere in the
package assumes this convention.
"""

import numpy as np

from .errors import NonDivisibleLength


def dft(x):
    """Forward transform of one period."""
    return np.fft.fft(np.asarray(x, dtype=complex))


def idft(s):
    """Inverse of :func:`dft`."""
    return np.fft.ifft(np.asarray(s, dtype=complex))


def frequency_grid(L):
    """Frequency grid points r/L, r = 0..L-1."""
    if L < 1:
        raise ValueError("period must be positive")
    return np.arange(L) / L


def subsample(x, m):
    """Keep every m-th sample: output(k) = x(m k).

    m must divide the length; the output has length L/m.  In frequency the
    output spectrum is the m-fold alias average
    ``(1/m) sum_l x_hat(rho + l L/m)``.
    """
    x = np.asarray(x)
    L = len(x)
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide length {L}")
    return x[::m].copy()


def shift(x, c):
    """Circular right shift: output(k) = x(k - c mod L)."""
    return np.roll(np.asarray(x), c)


def fold(s, m):
    """Split a length-L spectrum into its m aliased components.

    Component l at index rho equals ``s(rho + l L/m) / sqrt(m)``, so the
    components' squared Euclidean norms sum to ``|s|^2 / m``; measuring each
    component on its own (m times coarser) grid makes the map an isometry.
    Returns an (m, L/m) array.
    """
    s = np.asarray(s, dtype=complex)
    L = len(s)
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide length {L}")
    return s.reshape(m, L // m) / np.sqrt(m)
