"""Per-mode scalar features: difference-plot ellipse areas, quadratic Renyi
entropy of the power spectrum and mean absolute amplitude."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vmdeeg.spectral import Psd, as_samples, periodogram

# sqrt(3): scales sqrt(2 * eigenvalue) to the 95% axis, since 6 ~ chi2_2(0.95)
AXIS_SCALE = 1.7321

FEATURE_KINDS = ("sodp-area", "fodp-area", "renyi-entropy", "avg-amplitude")
ELLIPSE_VARIANTS = ("standard", "paper-literal")
_LAGS = {"sodp-area": 1, "fodp-area": 2}


@dataclass(frozen=True, eq=False)
class PointSeries:
    xs: np.ndarray
    ys: np.ndarray
    lag: int

    def __len__(self) -> int:
        return self.xs.size


@dataclass(frozen=True)
class EllipseParams:
    s_x: float
    s_y: float
    s_xy: float
    d: float
    a: float
    b: float
    area: float
    variant: str = "standard"
    angle: float = 0.0  # radians, major axis from the x axis

    def contains(self, xs, ys) -> np.ndarray:
        """Mask of points inside the origin-centred ellipse."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        u = c * xs + s * ys
        v = -s * xs + c * ys
        if self.b == 0:
            return (v == 0) & (np.abs(u) <= self.a)
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    feature_kind: str
    label: str | None = None
    degenerate_modes: tuple[int, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return self.values.size


def difference_points(x, lag: int) -> PointSeries:
    if lag not in (1, 2):
        raise ValueError("lag must be 1 (SODP) or 2 (FODP)")
    x = as_samples(x).astype(float)
    n = x.size
    if n <= 2 * lag:
        raise ValueError(f"signal of length {n} is too short for lag {lag}")
    m = n - 2 * lag
    xs = x[lag : lag + m] - x[:m]
    ys = x[2 * lag : 2 * lag + m] - x[lag : lag + m]
    return PointSeries(xs, ys, lag)


def ellipse_params(points: PointSeries, variant: str = "standard") -> EllipseParams:
    """95% ellipse of a difference-plot cloud.

    ``s_x`` and ``s_y`` are root-mean-square values about zero. The standard
    variant uses ``D = sqrt((s_x^2 + s_y^2)^2 - 4 det)``, which makes
    ``a * b = 6 sqrt(det)``. The paper-literal variant drops the square on
    the first term and can fail on real data.
    """
    if variant not in ELLIPSE_VARIANTS:
        raise ValueError(f"unknown ellipse variant {variant!r}")
    xs, ys = np.asarray(points.xs, dtype=float), np.asarray(points.ys, dtype=float)
    if xs.size == 0:
        raise ValueError("empty point series")
    sx2 = float(np.mean(xs * xs))
    sy2 = float(np.mean(ys * ys))
    sxy = float(np.mean(xs * ys))
    trace = sx2 + sy2
    det = sx2 * sy2 - sxy * sxy
    if variant == "standard":
        d = math.sqrt(max(trace * trace - 4.0 * det, 0.0))
        d = min(d, trace)
        minor = trace - d
    else:
        radicand = trace - 4.0 * det
        if radicand < 0:
            raise ValueError(f"paper-literal variant: negative radicand {radicand:g} for D")
        d = math.sqrt(radicand)
        minor = trace - d
        if minor < 0:
            raise ValueError(f"paper-literal variant: negative radicand {minor:g} for b")
    a = AXIS_SCALE * math.sqrt(trace + d)
    b = AXIS_SCALE * math.sqrt(minor)
    angle = 0.5 * math.atan2(2.0 * sxy, sx2 - sy2)
    return EllipseParams(
        math.sqrt(sx2), math.sqrt(sy2), sxy, d, a, b, math.pi * a * b, variant, angle
    )


def ellipse_area(x, lag: int, variant: str = "standard") -> float:
    return ellipse_params(difference_points(x, lag), variant).area


def renyi_entropy(psd, alpha: float = 2.0) -> float:
    """Renyi entropy (natural log) of the normalized power distribution."""
    if not alpha > 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    powers = np.asarray(getattr(psd, "powers", psd), dtype=float)
    if np.any(powers < 0):
        raise ValueError("negative power")
    total = powers.sum()
    if not total > 0:
        raise ValueError("zero total power: distribution undefined")
    p = powers / total
    return float(np.log(np.sum(p**alpha)) / (1.0 - alpha))


def average_amplitude(x) -> float:
    x = as_samples(x)
    return float(np.abs(x).sum() / x.size)


def extract(
    mode_set,
    kind: str,
    variant: str = "standard",
    entropy_alpha: float = 2.0,
) -> FeatureVector:
    """Apply one scalar feature to every mode, lowest centre frequency first.

    A zero-power mode under ``renyi-entropy`` gets the maximum entropy
    ``ln(M)`` and is listed in ``degenerate_modes``.
    """
    if kind not in FEATURE_KINDS:
        raise ValueError(f"unknown feature kind {kind!r}")
    values = []
    degenerate = []
    for idx, mode in enumerate(mode_set.modes):
        if kind in _LAGS:
            values.append(ellipse_area(mode, _LAGS[kind], variant))
        elif kind == "avg-amplitude":
            values.append(average_amplitude(mode))
        else:
            psd = periodogram(mode)
            try:
                values.append(renyi_entropy(psd, entropy_alpha))
            except ValueError:
                values.append(math.log(psd.powers.size))
                degenerate.append(idx)
    return FeatureVector(np.array(values), kind, mode_set.label, tuple(degenerate))


def write_point_cloud(mode_set, lag: int, path, variant: str = "standard") -> list[EllipseParams]:
    """Write difference-plot points as CSV ``mode,n,x,y``; returns the ellipses."""
    ellipses = []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "n", "x", "y"])
        for idx, mode in enumerate(mode_set.modes):
            pts = difference_points(mode, lag)
            ellipses.append(ellipse_params(pts, variant))
            for n, (x, y) in enumerate(zip(pts.xs, pts.ys)):
                writer.writerow([idx, n, repr(float(x)), repr(float(y))])
    return ellipses


def write_ellipses(ellipses, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "a", "b", "angle_rad", "area"])
        for idx, e in enumerate(ellipses):
            writer.writerow([idx, repr(e.a), repr(e.b), repr(e.angle), repr(e.area)])
