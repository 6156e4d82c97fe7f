"""Shared value types and small helpers.

Diagonal matrices in ``M_d(C)`` are carried as 1-D ``complex128`` arrays of
length ``d``; there is no wrapper class for them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "VarianceProfile",
    "SpectralCurve",
    "SolverSettings",
    "ConfigError",
    "WorkGuardError",
    "NumericalFailure",
    "normalized_trace",
    "l1_norm",
    "check_cauchy_diagonal",
    "stream_rng",
]


class ConfigError(ValueError):
    """Invalid user-facing configuration or parameters."""


class WorkGuardError(RuntimeError):
    """Requested computation exceeds its configured work budget."""


class NumericalFailure(RuntimeError):
    """A numerical procedure produced no usable result."""


_SYM_TOL = 1e-12


@dataclass(frozen=True)
class VarianceProfile:
    """Symmetric nonnegative ``d x d`` matrix of standard deviations.

    Use :meth:`from_matrix` for signed or complex input; the constructor
    itself rejects anything that is not already in canonical form.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ConfigError(f"profile must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ConfigError("profile entries must be finite")
        if np.any(a < 0):
            raise ConfigError("profile entries must be nonnegative")
        scale = max(1.0, float(np.abs(a).max()))
        if np.any(np.abs(a - a.T) > _SYM_TOL * scale):
            raise ConfigError("profile must be symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_matrix(cls, matrix) -> "VarianceProfile":
        """Build a profile from any selfadjoint matrix by taking moduli.

        Phases of the entries are absorbed by the circular elements, so only
        ``|A_ij|`` matters.
        """
        return cls(np.abs(np.asarray(matrix)))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def squared(self) -> np.ndarray:
        return self.entries * self.entries

    def permuted(self, perm) -> "VarianceProfile":
        perm = np.asarray(perm)
        return VarianceProfile(self.entries[np.ix_(perm, perm)])


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-3
    max_iter: int = 10000
    epsilon: float = 1e-3
    residual_tol: float | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ConfigError("max_iter must be >= 1")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.residual_tol is not None and not self.residual_tol > 0:
            raise ConfigError("residual_tol must be positive")

    @property
    def effective_residual_tol(self) -> float:
        # converged points must satisfy the fixed-point equation to 10*tol
        return 10.0 * self.tol if self.residual_tol is None else self.residual_tol


@dataclass(frozen=True)
class SpectralCurve:
    """Normalized-trace Cauchy values on ``xs + i*epsilon`` and their density."""

    epsilon: float
    xs: np.ndarray
    g_values: np.ndarray
    density: np.ndarray = field(default=None)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        g = np.asarray(self.g_values, dtype=complex)
        if xs.ndim != 1 or g.shape != xs.shape:
            raise ValueError("xs and g_values must be 1-D arrays of equal length")
        if xs.size > 1 and np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be strictly increasing")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.density is None:
            from .spectral import stieltjes_density

            dens = stieltjes_density(g)
        else:
            dens = np.asarray(self.density, dtype=float)
            if dens.shape != xs.shape:
                raise ValueError("density must match xs")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "g_values", g)
        object.__setattr__(self, "density", dens)

    def __len__(self):
        return self.xs.size


def normalized_trace(values) -> complex:
    """``(1/d) * sum(values)`` for a diagonal given by its entries."""
    return complex(np.mean(np.asarray(values, dtype=complex)))


def l1_norm(values) -> float:
    """Entrywise 1-norm (sum of moduli) of a diagonal matrix."""
    return float(np.abs(np.asarray(values, dtype=complex)).sum())


def check_cauchy_diagonal(values, z: complex) -> None:
    """Raise if ``values`` cannot be a Cauchy-transform value at ``z``."""
    v = np.asarray(values, dtype=complex)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    if np.any(v.imag >= 0):
        raise ValueError("Cauchy transform diagonal must have negative imaginary parts")
    if l1_norm(v) > v.size / z.imag * (1 + 1e-12):
        raise ValueError("Cauchy transform diagonal violates the d/Im(z) bound")


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``.

    Each distinct key tuple yields a statistically independent stream, so
    work can be split across workers without changing results.
    """
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)
