"""Discrete Fourier helpers shared by the VMD solver and the entropy feature.

Transforms are backed by ``numpy.fft`` and support any length (Bonn records
are 4097 = 17 * 241 samples).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Spectrum:
    bins: np.ndarray
    bin_resolution_hz: float = 1.0

    def __len__(self) -> int:
        return self.bins.size


@dataclass(frozen=True, eq=False)
class Psd:
    """One-sided power spectrum, DC through Nyquist."""

    powers: np.ndarray
    bin_resolution_hz: float = 1.0

    @property
    def total_power(self) -> float:
        return float(self.powers.sum())

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.arange(self.powers.size) * self.bin_resolution_hz


def as_samples(x) -> np.ndarray:
    """Return the samples of a Signal or array-like as a 1-D array."""
    arr = np.asarray(getattr(x, "samples", x))
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    if arr.size == 0:
        raise ValueError("empty signal")
    return arr


def _rate(x) -> float:
    return float(getattr(x, "sample_rate_hz", 1.0))


def dft(signal) -> Spectrum:
    x = as_samples(signal)
    return Spectrum(np.fft.fft(x), _rate(signal) / x.size)


def idft(spectrum, real: bool = True) -> np.ndarray:
    """Inverse transform.

    With ``real=True`` the imaginary residue must be negligible (the input
    spectrum was Hermitian) and is dropped.
    """
    bins = np.asarray(getattr(spectrum, "bins", spectrum), dtype=complex)
    if bins.ndim != 1 or bins.size == 0:
        raise ValueError("empty spectrum")
    x = np.fft.ifft(bins)
    if not real:
        return x
    scale = np.linalg.norm(x)
    if scale > 0 and np.linalg.norm(x.imag) > HERMITIAN_RTOL * scale:
        raise ValueError("spectrum is not Hermitian; cannot return a real signal")
    return x.real.copy()


def hermitian_complete(half: np.ndarray, n: int) -> np.ndarray:
    """Full length-``n`` spectrum from bins 0..n//2 by conjugate mirroring.

    The DC bin (and the Nyquist bin for even ``n``) are forced real.
    """
    half = np.asarray(half, dtype=complex)
    if half.size != n // 2 + 1:
        raise ValueError(f"half spectrum of length {half.size} does not match n={n}")
    full = np.empty(n, dtype=complex)
    full[: half.size] = half
    full[0] = half[0].real
    if n % 2 == 0:
        full[n // 2] = half[-1].real
    m = (n - 1) // 2
    full[n - m :] = np.conj(half[1 : m + 1][::-1])
    return full


def analytic_signal(signal) -> np.ndarray:
    x = as_samples(signal).astype(float)
    n = x.size
    spec = np.fft.fft(x)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[1 : (n + 1) // 2] = 2.0
    return np.fft.ifft(spec * h)


def periodogram(signal) -> Psd:
    """|X_k|^2 / N for k = 0..N//2."""
    x = as_samples(signal)
    n = x.size
    bins = np.fft.fft(x)[: n // 2 + 1]
    return Psd(np.abs(bins) ** 2 / n, _rate(signal) / n)


def mirror_extend(signal) -> np.ndarray:
    """Reflect half the signal onto each side, giving length ``2 * N``.

    The prefix is the reversed first ``N // 2`` samples and the suffix the
    reversed last ``N - N // 2``; :func:`mirror_crop` undoes it.
    """
    x = as_samples(signal)
    n = x.size
    if n < 2:
        raise ValueError("mirror extension needs at least 2 samples")
    head = n // 2
    tail = n - head
    return np.concatenate([x[:head][::-1], x, x[n - tail :][::-1]])


def mirror_crop(extended, n: int) -> np.ndarray:
    extended = np.asarray(extended)
    if extended.shape[-1] != 2 * n:
        raise ValueError(f"extended length {extended.shape[-1]} is not 2*{n}")
    head = n // 2
    return extended[..., head : head + n]
