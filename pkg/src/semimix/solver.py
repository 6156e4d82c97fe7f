"""Fixed-point machinery for a single, already sampled variance profile."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import SolverSettings, VarianceProfile

__all__ = [
    "FixedPointResult",
    "GridSolution",
    "eta",
    "t_map",
    "fixed_point_residual",
    "solve_point",
    "solve_grid",
    "closed_form_constant_rowsum",
    "default_init",
]


@dataclass(frozen=True)
class FixedPointResult:
    g: np.ndarray
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class GridSolution:
    """Per-point solutions of a warm-started sweep, stored as arrays.

    Indexing yields :class:`FixedPointResult` objects.
    """

    xs: np.ndarray
    epsilon: float
    g: np.ndarray  # (L, d)
    iterations: np.ndarray
    residual: np.ndarray
    converged: np.ndarray

    def __len__(self):
        return self.xs.size

    def __getitem__(self, k) -> FixedPointResult:
        return FixedPointResult(
            g=self.g[k].copy(),
            iterations=int(self.iterations[k]),
            residual=float(self.residual[k]),
            converged=bool(self.converged[k]),
        )

    @property
    def trace(self) -> np.ndarray:
        return self.g.mean(axis=-1)

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())


def _squares(A) -> np.ndarray:
    if isinstance(A, VarianceProfile):
        return A.squared
    a = np.asarray(A, dtype=float)
    return a * a


def default_init(d: int) -> np.ndarray:
    return np.full(d, -1j, dtype=complex)


def eta(A, D) -> np.ndarray:
    """Covariance map on diagonals: ``eta(D)_i = sum_j A_ij**2 * D_j``.

    Broadcasts over leading batch dimensions of both arguments.
    """
    a2 = _squares(A)
    D = np.asarray(D, dtype=complex)
    if a2.shape[-1] != D.shape[-1]:
        raise ValueError(f"dimension mismatch: profile d={a2.shape[-1]}, diagonal d={D.shape[-1]}")
    return np.einsum("...ij,...j->...i", a2, D)


def t_map(A, z: complex, D) -> np.ndarray:
    """One step of the iteration: ``W_i = 1 / (z - eta(D)_i)``."""
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    return 1.0 / (z - eta(A, D))


def fixed_point_residual(A, z: complex, g) -> float:
    """``|| (zI - eta(g)) g - I ||_1`` for diagonal ``g``."""
    g = np.asarray(g, dtype=complex)
    return float(np.abs((z - eta(A, g)) * g - 1.0).sum())


def _run(A, xs, epsilon, settings: SolverSettings, init, backend=None) -> GridSolution:
    a2 = _squares(A)
    d = a2.shape[0]
    init = default_init(d) if init is None else np.asarray(init, dtype=complex)
    if init.shape != (d,):
        raise ValueError(f"init must have length {d}")
    if np.any(init.imag > 0):
        raise ValueError("init must lie in the closed lower half-plane")
    sweep = kernels.get_sweep(backend)
    g, it, res, conv = sweep(
        a2[None],
        xs,
        float(epsilon),
        float(settings.tol),
        float(settings.effective_residual_tol),
        int(settings.max_iter),
        init[None],
    )
    return GridSolution(
        xs=np.asarray(xs, dtype=float), epsilon=float(epsilon),
        g=g[0], iterations=it[0], residual=res[0], converged=conv[0],
    )


def solve_point(A, z: complex, init=None, settings: SolverSettings | None = None,
                backend=None) -> FixedPointResult:
    """Iterate :func:`t_map` at ``z`` from ``init`` (default ``-iI``).

    Stops once successive iterates differ by less than ``settings.tol`` in
    1-norm and the fixed-point residual is within the residual tolerance;
    otherwise returns a result flagged ``converged=False`` after
    ``settings.max_iter`` steps. ``settings.epsilon`` is ignored, ``z`` is
    used as given.
    """
    settings = settings or SolverSettings()
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    return _run(A, np.array([z.real]), z.imag, settings, init, backend)[0]


def solve_grid(A, xs, settings: SolverSettings | None = None, init=None,
               backend=None) -> GridSolution:
    """Warm-started sweep over ``xs + i*settings.epsilon``.

    The first point starts from ``init`` (default ``-iI``); every later point
    starts from the final iterate of its predecessor.
    """
    settings = settings or SolverSettings()
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("xs must be a non-empty 1-D grid")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly increasing")
    return _run(A, xs, settings.epsilon, settings, init, backend)


def closed_form_constant_rowsum(K, z):
    """Cauchy transform diagonal entry when every row of ``A**2`` sums to ``K``.

    Solves ``K g**2 - z g + 1 = 0`` and keeps the root in the lower
    half-plane. Vectorized over ``K`` and ``z``.
    """
    K = np.asarray(K, dtype=float)
    z = np.asarray(z, dtype=complex)
    if np.any(K <= 0):
        raise ValueError("K must be positive")
    if np.any(z.imag <= 0):
        raise ValueError("z must lie in the upper half-plane")
    s = np.sqrt(z * z - 4.0 * K)
    # larger-modulus root first (no cancellation), the other via the product 1/K
    sgn = np.where((z.conjugate() * s).real >= 0, 1.0, -1.0)
    big = (z + sgn * s) / (2.0 * K)
    small = 1.0 / (K * big)
    out = np.where(small.imag < 0, small, big)
    return out[()] if out.ndim == 0 else out
