import numpy as np
import pytest
from scipy.signal import hilbert

from vmdeeg.signal_io import Signal
from vmdeeg.spectral import (
    analytic_signal,
    dft,
    hermitian_complete,
    idft,
    mirror_crop,
    mirror_extend,
    periodogram,
)


def brute_dft(x):
    n = len(x)
    idx = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * k * idx / n)) for k in range(n)])


@pytest.mark.parametrize("n", [8, 17, 100, 257])
def test_dft_matches_direct_sum(n):
    x = np.random.default_rng(n).normal(size=n)
    np.testing.assert_allclose(dft(x).bins, brute_dft(x), atol=1e-9 * n)


def test_dft_small_cases():
    np.testing.assert_allclose(dft([1, 0, 0, 0]).bins, np.ones(4))
    np.testing.assert_allclose(dft([1, 1, 1, 1]).bins, [4, 0, 0, 0], atol=1e-12)
    x = np.cos(2 * np.pi * 0.25 * np.arange(8))
    mags = np.abs(dft(x).bins)
    assert set(np.flatnonzero(mags > 1e-9)) == {2, 6}


def test_dft_resolution_uses_sample_rate():
    sig = Signal(np.ones(10), sample_rate_hz=100.0)
    assert dft(sig).bin_resolution_hz == pytest.approx(10.0)


def test_dft_empty():
    with pytest.raises(ValueError):
        dft([])


@pytest.mark.parametrize("n", [8, 100, 4097])
def test_parseval_and_hermitian(n):
    x = np.random.default_rng(n).normal(size=n)
    bins = dft(x).bins
    assert np.sum(x**2) == pytest.approx(np.sum(np.abs(bins) ** 2) / n, rel=1e-6)
    k = np.arange(1, n)
    np.testing.assert_allclose(bins[k], np.conj(bins[n - k]), atol=1e-9 * n)


def test_idft_roundtrip_and_cases():
    x = np.random.default_rng(0).normal(size=1000)
    back = idft(dft(x))
    assert np.linalg.norm(back - x) / np.linalg.norm(x) < 1e-9
    np.testing.assert_allclose(idft([4, 0, 0, 0]), [1, 1, 1, 1])
    assert not np.any(idft(np.zeros(5)))


def test_idft_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        idft([0, 1, 0, 0])
    assert np.iscomplexobj(idft([0, 1, 0, 0], real=False))


@pytest.mark.parametrize("n", [9, 10])
def test_hermitian_complete_matches_full_transform(n):
    x = np.random.default_rng(n).normal(size=n)
    full = np.fft.fft(x)
    np.testing.assert_allclose(hermitian_complete(full[: n // 2 + 1], n), full, atol=1e-12)


@pytest.mark.parametrize("n", [64, 65])
def test_analytic_signal_matches_scipy(n):
    x = np.random.default_rng(n).normal(size=n)
    z = analytic_signal(x)
    np.testing.assert_allclose(z, hilbert(x), atol=1e-10)
    np.testing.assert_allclose(z.real, x, atol=1e-9)


def test_analytic_signal_envelope_of_cosine():
    t = np.arange(1000)
    z = analytic_signal(np.cos(2 * np.pi * 0.1 * t))
    np.testing.assert_allclose(np.abs(z[50:-50]), 1.0, atol=1e-6)
    assert not np.any(analytic_signal(np.zeros(16)))


def test_periodogram_constant_and_tone():
    psd = periodogram(np.full(64, 3.0))
    assert psd.powers[0] == pytest.approx(9 * 64)
    assert np.allclose(psd.powers[1:], 0)
    tone = np.cos(2 * np.pi * 5 * np.arange(64) / 64)
    assert np.argmax(periodogram(tone).powers) == 5
    assert periodogram(np.ones(7)).powers.size == 4


def test_periodogram_total_power_by_direct_sum():
    x = np.random.default_rng(3).normal(scale=2.0, size=301)
    direct = brute_dft(x)
    one_sided = sum(abs(direct[k]) ** 2 for k in range(301 // 2 + 1)) / 301
    psd = periodogram(x)
    assert psd.total_power == pytest.approx(one_sided, rel=1e-9)
    assert np.all(psd.powers >= 0)


def test_periodogram_resolution():
    psd = periodogram(Signal(np.ones(100), sample_rate_hz=200.0))
    assert psd.bin_resolution_hz == pytest.approx(2.0)
    assert psd.freqs_hz[-1] == pytest.approx(100.0)


def test_mirror_extend_definition():
    np.testing.assert_array_equal(mirror_extend([1, 2, 3, 4]), [2, 1, 1, 2, 3, 4, 4, 3])
    with pytest.raises(ValueError):
        mirror_extend([1])


@pytest.mark.parametrize("n", [2, 5, 4097])
def test_mirror_roundtrip(n):
    x = np.random.default_rng(n).normal(size=n)
    ext = mirror_extend(x)
    assert ext.size == 2 * n
    np.testing.assert_array_equal(mirror_crop(ext, n), x)
