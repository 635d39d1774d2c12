"""Variational mode decomposition by ADMM on the one-sided spectrum.

Each sweep updates every mode spectrum with a Wiener-like filter centred on
its current centre frequency (Gauss-Seidel order), moves each centre frequency
to the power centroid of its mode, then takes a dual ascent step on the
reconstruction constraint. Iteration stops once the summed relative mode
change drops below ``tol``; with a nonzero dual step the relative squared
reconstruction residual must also be below ``tol``. Frequencies are
normalized (cycles/sample), so valid centres lie in [0, 0.5].
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from vmdeeg.spectral import (
    Psd,
    as_samples,
    dft,
    hermitian_complete,
    idft,
    mirror_crop,
    mirror_extend,
    periodogram,
)

INIT_KINDS = ("uniform", "zero", "seeded-random")


class VmdError(RuntimeError):
    pass


class DegenerateModeError(ValueError):
    """A mode spectrum carries no energy, so its centroid is undefined."""


@dataclass(frozen=True)
class VmdConfig:
    k: int = 5
    alpha: float = 2000.0
    tau: float = 0.0
    tol: float = 1e-6
    max_iters: int = 500
    init: str = "uniform"
    mirror: bool = True
    seed: int = 0
    init_omegas: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.tau >= 0:
            raise ValueError("tau must be nonnegative")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}")
        if self.init_omegas is not None:
            omegas = tuple(float(w) for w in self.init_omegas)
            if len(omegas) != self.k or not all(0 <= w <= 0.5 for w in omegas):
                raise ValueError("init_omegas needs k values in [0, 0.5]")
            object.__setattr__(self, "init_omegas", omegas)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["init_omegas"] is not None:
            d["init_omegas"] = list(d["init_omegas"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> VmdConfig:
        d = dict(d)
        if d.get("init_omegas") is not None:
            d["init_omegas"] = tuple(d["init_omegas"])
        return cls(**d)

    def initial_omegas(self) -> np.ndarray:
        if self.init_omegas is not None:
            return np.array(self.init_omegas, dtype=float)
        if self.init == "zero":
            return np.zeros(self.k)
        if self.init == "seeded-random":
            return np.sort(np.random.default_rng(self.seed).uniform(0.0, 0.5, self.k))
        # midpoints of k equal bands across (0, 0.5)
        return (np.arange(self.k) + 0.5) * 0.5 / self.k


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Decomposed modes sorted by ascending centre frequency.

    ``modes`` has shape (k, n); ``center_freqs`` are in cycles/sample.
    ``final_residual`` is the relative L2 error of the summed modes against
    the input and ``final_change`` the last value of the stopping statistic.
    """

    modes: np.ndarray
    center_freqs: np.ndarray
    iterations_used: int
    final_residual: float
    final_change: float = 0.0
    degenerate: bool = False
    sample_rate_hz: float = 1.0
    label: str | None = None
    source_id: str = ""

    @property
    def k(self) -> int:
        return self.modes.shape[0]

    @property
    def center_freqs_hz(self) -> np.ndarray:
        return self.center_freqs * self.sample_rate_hz


def half_spectrum_freqs(n: int) -> np.ndarray:
    """Normalized frequencies of bins 0..n//2 of a length-``n`` transform."""
    return np.arange(n // 2 + 1) / n


def update_mode_spectrum(f_hat, other_modes_sum, lambda_hat, omega_k, alpha, freqs) -> np.ndarray:
    f_hat = np.asarray(f_hat)
    if not (f_hat.shape == np.shape(other_modes_sum) == np.shape(lambda_hat) == np.shape(freqs)):
        raise ValueError("spectra and frequency grid must share length")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    numer = f_hat - other_modes_sum + np.asarray(lambda_hat) / 2
    return numer / (1.0 + 2.0 * alpha * (np.asarray(freqs) - omega_k) ** 2)


def update_center_frequency(u_k_hat, freqs) -> float:
    power = np.abs(np.asarray(u_k_hat)) ** 2
    if power.shape != np.shape(freqs):
        raise ValueError("spectrum and frequency grid must share length")
    total = power.sum()
    if not total > 0:
        raise DegenerateModeError("mode spectrum has zero energy")
    return float(np.dot(freqs, power) / total)


def update_multiplier(lambda_hat, f_hat, modes_sum, tau) -> np.ndarray:
    lambda_hat = np.asarray(lambda_hat)
    if not (lambda_hat.shape == np.shape(f_hat) == np.shape(modes_sum)):
        raise ValueError("spectra must share length")
    if tau == 0:
        return lambda_hat.copy()
    return lambda_hat + tau * (np.asarray(f_hat) - modes_sum)


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    total = 0.0
    for u_new, u_old in zip(new, old):
        diff = float(np.vdot(u_new - u_old, u_new - u_old).real)
        base = float(np.vdot(u_old, u_old).real)
        if base > 0:
            total += diff / base
        elif diff > 0:
            return float("inf")
    return total


def _primal_residual(f_hat: np.ndarray, modes_sum: np.ndarray) -> float:
    base = float(np.vdot(f_hat, f_hat).real)
    r = f_hat - modes_sum
    return float(np.vdot(r, r).real) / base


def decompose(signal, config: VmdConfig | None = None) -> ModeSet:
    config = config or VmdConfig()
    x = as_samples(signal).astype(float)
    n = x.size
    k = config.k
    if n < 2 * k:
        raise ValueError(f"signal length {n} is too short for k={k}")
    meta = dict(
        sample_rate_hz=float(getattr(signal, "sample_rate_hz", 1.0)),
        label=getattr(signal, "label", None),
        source_id=getattr(signal, "source_id", ""),
    )
    omega = config.initial_omegas()

    if not np.any(x):
        order = np.argsort(omega, kind="stable")
        return ModeSet(np.zeros((k, n)), omega[order], 0, 0.0, 0.0, True, **meta)

    ext = mirror_extend(x) if config.mirror else x
    size = ext.size
    half = size // 2 + 1
    f_hat = dft(ext).bins[:half]
    freqs = half_spectrum_freqs(size)

    u_hat = np.zeros((k, half), dtype=complex)
    lambda_hat = np.zeros(half, dtype=complex)
    modes_sum = np.zeros(half, dtype=complex)
    change = float("inf")
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        previous = u_hat.copy()
        for i in range(k):
            # modes < i already hold this sweep's values, modes > i the previous sweep's
            others = modes_sum - u_hat[i]
            u_hat[i] = update_mode_spectrum(f_hat, others, lambda_hat, omega[i], config.alpha, freqs)
            modes_sum = others + u_hat[i]
        for i in range(k):
            try:
                omega[i] = update_center_frequency(u_hat[i], freqs)
            except DegenerateModeError:
                pass
        modes_sum = u_hat.sum(axis=0)
        lambda_hat = update_multiplier(lambda_hat, f_hat, modes_sum, config.tau)
        if not (np.all(np.isfinite(u_hat)) and np.all(np.isfinite(lambda_hat))):
            raise VmdError(f"non-finite values at iteration {iterations}")
        change = _relative_change(u_hat, previous)
        if change < config.tol and (config.tau == 0 or _primal_residual(f_hat, modes_sum) < config.tol):
            break

    modes = np.stack([idft(hermitian_complete(u, size)) for u in u_hat])
    if config.mirror:
        modes = mirror_crop(modes, n)
    order = np.argsort(omega, kind="stable")
    modes = np.ascontiguousarray(modes[order])
    residual = float(np.linalg.norm(x - modes.sum(axis=0)) / np.linalg.norm(x))
    return ModeSet(modes, omega[order], iterations, residual, change, False, **meta)


def mode_spectra(mode_set: ModeSet) -> list[Psd]:
    """One-sided periodogram of every mode, scaled to the signal's sample rate."""
    if mode_set.k == 0:
        raise ValueError("empty mode set")
    rate = mode_set.sample_rate_hz
    out = []
    for mode in mode_set.modes:
        psd = periodogram(mode)
        out.append(Psd(psd.powers, rate / mode.size))
    return out
