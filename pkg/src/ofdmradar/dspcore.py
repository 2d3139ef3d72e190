"""Complex-vector DSP kernels shared by every other module.

Both transform directions carry the 1/sqrt(N) factor so that Parseval holds
exactly and processing gains show up explicitly instead of hiding in the
transform convention.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dft_unitary",
    "idft_unitary",
    "cyclic_shift",
    "linear_convolve",
    "papr_db",
]


def _as_complex_vector(x, name):
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    return x


def dft_unitary(x) -> np.ndarray:
    """Unitary DFT: X_k = (1/sqrt(N)) * sum_i x_i exp(-2j pi i k / N).

    Any length N is accepted; the backing FFT uses mixed-radix and
    Bluestein paths, so prime or otherwise awkward N is fine.
    """
    x = _as_complex_vector(x, "x")
    return np.fft.fft(x) / np.sqrt(x.size)


def idft_unitary(X) -> np.ndarray:
    """Unitary inverse DFT, the exact inverse of :func:`dft_unitary`."""
    X = _as_complex_vector(X, "X")
    return np.fft.ifft(X) * np.sqrt(X.size)


def cyclic_shift(x, positions: int, direction: str = "left") -> np.ndarray:
    """Circular shift: element i moves to (i - positions) mod N for a left
    shift, (i + positions) mod N for a right shift.

    The shift amount is reduced modulo the length, so shifting by N is the
    identity and a left shift by p equals a right shift by N - p.
    """
    x = _as_complex_vector(x, "x")
    p = int(positions) % x.size
    if direction == "left":
        return np.roll(x, -p)
    if direction == "right":
        return np.roll(x, p)
    raise ValueError("direction must be 'left' or 'right'")


def linear_convolve(x, h) -> np.ndarray:
    """Full linear convolution; output length len(x) + len(h) - 1."""
    x = _as_complex_vector(x, "x")
    h = _as_complex_vector(h, "h")
    return np.convolve(x, h)


def papr_db(S, oversample: int = 4, window: tuple[int, int] | None = None) -> float:
    """Peak-to-average power ratio, in dB, of the oversampled time signal.

    ``S`` holds frequency-domain subcarrier weights.  The time signal is
    obtained by zero-padding ``S`` to ``oversample * N`` and taking the
    unitary inverse DFT; the ratio is evaluated only on ``window``, a pair
    of inclusive sample indices on the original N-grid (scaled by the
    oversampling factor internally).  ``window=None`` uses the whole pulse.
    """
    S = _as_complex_vector(S, "S")
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    n = S.size
    first, last = (0, n - 1) if window is None else (int(window[0]), int(window[1]))
    if not 0 <= first <= last < n:
        raise ValueError(f"window ({first}, {last}) is empty or outside [0, {n - 1}]")
    padded = np.concatenate([S, np.zeros((oversample - 1) * n, dtype=np.complex128)])
    t = idft_unitary(padded)[oversample * first : oversample * (last + 1)]
    p = np.abs(t) ** 2
    mean = p.mean()
    if mean == 0.0:
        raise ValueError("window has zero mean power; PAPR undefined")
    return float(10.0 * np.log10(p.max() / mean))
