"""Loading Bonn-format recordings, synthetic fixtures and train/test splits."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

BONN_SAMPLE_RATE_HZ = 173.61
BONN_SET_IDS = ("Z", "O", "N", "F", "S")
BONN_SET_SIZE = 100
MIN_SIGNAL_LENGTH = 8


class DataError(ValueError):
    """Raised for malformed or missing input data."""


@dataclass(frozen=True, eq=False)
class Signal:
    samples: np.ndarray
    sample_rate_hz: float = BONN_SAMPLE_RATE_HZ
    label: str | None = None
    source_id: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1:
            raise DataError("samples must be one-dimensional")
        if samples.size < MIN_SIGNAL_LENGTH:
            raise DataError(
                f"signal {self.source_id!r} has {samples.size} samples, "
                f"need at least {MIN_SIGNAL_LENGTH}"
            )
        if not np.all(np.isfinite(samples)):
            raise DataError(f"signal {self.source_id!r} contains non-finite samples")
        if not self.sample_rate_hz > 0:
            raise DataError("sample_rate_hz must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


@dataclass(frozen=True)
class SignalCollection:
    set_id: str
    signals: tuple[Signal, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(self.signals))
        rates = {s.sample_rate_hz for s in self.signals}
        if len(rates) > 1:
            raise DataError(f"set {self.set_id}: mixed sample rates {sorted(rates)}")

    def __len__(self) -> int:
        return len(self.signals)

    def __iter__(self):
        return iter(self.signals)

    def __getitem__(self, idx):
        return self.signals[idx]

    def subset(self, indices: Sequence[int]) -> SignalCollection:
        return SignalCollection(self.set_id, tuple(self.signals[i] for i in indices))


@dataclass(frozen=True)
class SplitSpec:
    """How to divide one collection into train and test signals.

    ``fixed-prefix`` takes the first ``train_count`` signals for training;
    ``random`` draws them from a permutation seeded by ``seed``.
    """

    mode: str = "fixed-prefix"
    train_count: int = 80
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("fixed-prefix", "random"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.train_count < 1:
            raise ValueError("train_count must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def load_signal(path, sample_rate_hz: float = BONN_SAMPLE_RATE_HZ, label=None) -> Signal:
    """Read a single-column text recording, one sample per line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            raise DataError(f"{path}: line {lineno} is not a number: {line!r}") from None
        if not np.isfinite(value):
            raise DataError(f"{path}: line {lineno} is not finite: {line!r}")
        values.append(value)
    if len(values) < MIN_SIGNAL_LENGTH:
        raise DataError(
            f"{path}: {len(values)} samples, need at least {MIN_SIGNAL_LENGTH}"
        )
    return Signal(np.array(values), sample_rate_hz, label, path.stem)


def load_bonn_set(directory, set_id: str) -> SignalCollection:
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"set directory {directory} does not exist")
    files = sorted(
        (p for p in directory.iterdir() if p.is_file() and p.suffix.lower() == ".txt"),
        key=lambda p: p.name,
    )
    if not files:
        raise DataError(f"set directory {directory} contains no .txt files")
    if len(files) != BONN_SET_SIZE:
        logger.warning("set %s has %d files, expected %d", set_id, len(files), BONN_SET_SIZE)
    return SignalCollection(set_id, tuple(load_signal(p, label=set_id) for p in files))


def load_bonn(root, set_ids: Sequence[str] = BONN_SET_IDS) -> dict[str, SignalCollection]:
    """Load several sets from ``<root>/<set_id>/``."""
    root = Path(root)
    return {sid: load_bonn_set(root / sid, sid) for sid in set_ids}


def synth_multitone(
    freqs: Sequence[float],
    amps: Sequence[float],
    n: int,
    noise_std: float = 0.0,
    seed: int = 0,
    sample_rate_hz: float = 1.0,
    label: str | None = None,
    source_id: str = "synthetic",
) -> Signal:
    """Sum of cosines at normalized frequencies (cycles/sample) plus seeded noise."""
    if len(freqs) != len(amps):
        raise ValueError("freqs and amps differ in length")
    if n < MIN_SIGNAL_LENGTH:
        raise ValueError(f"n must be at least {MIN_SIGNAL_LENGTH}")
    for f in freqs:
        if not 0.0 < f < 0.5:
            raise ValueError(f"frequency {f} outside (0, 0.5)")
    t = np.arange(n)
    x = np.zeros(n)
    for f, a in zip(freqs, amps):
        x += a * np.cos(2 * np.pi * f * t)
    if noise_std > 0:
        x += np.random.default_rng(seed).normal(0.0, noise_std, n)
    return Signal(x, sample_rate_hz, label, source_id)


def split(collection: SignalCollection, spec: SplitSpec) -> tuple[SignalCollection, SignalCollection]:
    size = len(collection)
    if spec.train_count >= size:
        raise ValueError(
            f"train_count {spec.train_count} must be smaller than collection size {size}"
        )
    if spec.mode == "fixed-prefix":
        order = np.arange(size)
    else:
        order = np.random.default_rng(spec.seed).permutation(size)
    train_idx = sorted(int(i) for i in order[: spec.train_count])
    test_idx = sorted(int(i) for i in order[spec.train_count :])
    assert not set(train_idx) & set(test_idx)
    return collection.subset(train_idx), collection.subset(test_idx)
