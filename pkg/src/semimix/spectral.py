"""Density recovery, quadrature moments and distribution distances."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmpiricalDistribution",
    "SupportTruncationWarning",
    "stieltjes_density",
    "cumulative_mass",
    "bin_edges",
    "curve_bin_mass",
    "quadrature_moment",
    "total_mass",
    "l1_density_distance",
    "ks_distance",
]

LEAK_TOL = 1e-12
EDGE_DENSITY_TOL = 1e-6


class SupportTruncationWarning(UserWarning):
    """Density at the ends of the grid is not negligible."""


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted samples (e.g. pooled eigenvalues)."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    def cdf(self, x, side="right") -> np.ndarray:
        return np.searchsorted(self.samples, x, side=side) / self.samples.size

    def histogram(self, edges) -> np.ndarray:
        """Density-normalized histogram over ``edges`` (mass outside is dropped)."""
        counts, _ = np.histogram(self.samples, bins=edges)
        return counts / (self.samples.size * np.diff(edges))

    def moment(self, m: int) -> float:
        return float(np.mean(self.samples ** m))


def stieltjes_density(g) -> np.ndarray:
    """``-Im(g) / pi``, clamping positive leaks up to 1e-12."""
    g = np.asarray(g, dtype=complex)
    im = g.imag
    if np.any(im > LEAK_TOL):
        raise ValueError(f"Cauchy values with Im(g) > {LEAK_TOL:g}: max {im.max():.3e}")
    return np.maximum(-im / math.pi, 0.0)


def cumulative_mass(xs, density) -> np.ndarray:
    """Cumulative trapezoid integral of ``density``, starting at 0."""
    xs = np.asarray(xs, dtype=float)
    density = np.asarray(density, dtype=float)
    out = np.zeros_like(xs)
    out[1:] = np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(xs))
    return out


def total_mass(curve) -> float:
    return float(np.trapezoid(curve.density, curve.xs))


def quadrature_moment(curve, m: int) -> float:
    """Trapezoid approximation of ``int x**m density(x) dx`` over the grid."""
    if m < 0:
        raise ValueError("moment order must be nonnegative")
    edge = max(curve.density[0], curve.density[-1])
    if edge > EDGE_DENSITY_TOL:
        warnings.warn(
            f"density {edge:.2e} at grid ends exceeds {EDGE_DENSITY_TOL:g}; support may be truncated",
            SupportTruncationWarning, stacklevel=2,
        )
    return float(np.trapezoid(curve.xs ** m * curve.density, curve.xs))


def bin_edges(lo: float, hi: float, width: float) -> np.ndarray:
    start = math.floor(lo / width)
    stop = math.ceil(hi / width)
    if stop <= start:
        stop = start + 1
    # include hi in the last bin even when it sits on an edge
    if stop * width <= hi:
        stop += 1
    return np.arange(start, stop + 1) * width


def _is_curve(obj) -> bool:
    return hasattr(obj, "density") and hasattr(obj, "xs")


def curve_bin_mass(curve, edges) -> np.ndarray:
    cum = cumulative_mass(curve.xs, curve.density)
    at = np.interp(edges, curve.xs, cum, left=0.0, right=cum[-1])
    return np.diff(at)


def _support(obj):
    if _is_curve(obj):
        return float(obj.xs[0]), float(obj.xs[-1])
    return float(obj.samples[0]), float(obj.samples[-1])


def _bin_density(obj, edges) -> np.ndarray:
    if _is_curve(obj):
        return curve_bin_mass(obj, edges) / np.diff(edges)
    return obj.histogram(edges)


def l1_density_distance(first, second, bins: float = 0.1) -> float:
    """L1 distance between bin-averaged densities on a common grid of width ``bins``.

    Either argument may be a :class:`~semimix.core.SpectralCurve` (density
    averaged per bin) or an :class:`EmpiricalDistribution` (histogram).
    Bins are aligned to multiples of ``bins`` and cover both supports.
    """
    if bins <= 0:
        raise ValueError("bin width must be positive")
    lo1, hi1 = _support(first)
    lo2, hi2 = _support(second)
    edges = bin_edges(min(lo1, lo2), max(hi1, hi2), bins)
    diff = _bin_density(first, edges) - _bin_density(second, edges)
    return float(np.sum(np.abs(diff) * np.diff(edges)))


def _cdf(obj, x, side="right"):
    if _is_curve(obj):
        cum = cumulative_mass(obj.xs, obj.density)
        return np.interp(x, obj.xs, cum, left=0.0, right=cum[-1])
    return obj.cdf(x, side=side)


def ks_distance(first, second) -> float:
    """Kolmogorov-Smirnov distance ``sup |F1 - F2|``.

    With one empirical argument the supremum is taken over its sample points
    (both one-sided limits); with two, over the pooled samples. The
    theoretical CDF is the cumulative trapezoid of the density.
    """
    if _is_curve(first) and _is_curve(second):
        xs = np.union1d(first.xs, second.xs)
        return float(np.max(np.abs(_cdf(first, xs) - _cdf(second, xs))))
    pts = np.concatenate([o.samples for o in (first, second) if not _is_curve(o)])
    best = 0.0
    for side in ("left", "right"):
        f1 = _cdf(first, pts, side)
        f2 = _cdf(second, pts, side)
        best = max(best, float(np.max(np.abs(f1 - f2))))
    return best
