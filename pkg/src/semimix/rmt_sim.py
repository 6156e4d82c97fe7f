"""Finite block-Gaussian approximations of semicircular mixtures."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, VarianceProfile, WorkGuardError, stream_rng
from .spectral import EmpiricalDistribution

__all__ = [
    "BlockMatrixSpec",
    "block_gaussian",
    "sample_mixture_matrix",
    "mixture_from_profile",
    "eigenvalues",
    "ensemble_spectrum",
    "block_trace",
    "SIM_PROFILE_STREAM",
    "SIM_MATRIX_STREAM",
    "MAX_EIG_WORK",
]

SIM_PROFILE_STREAM = 1
SIM_MATRIX_STREAM = 2
MAX_EIG_WORK = 5 * 10**11


@dataclass(frozen=True)
class BlockMatrixSpec:
    """``d x d`` grid of ``block_N x block_N`` complex Gaussian blocks, entry variance ``1/block_N``."""

    d: int
    block_N: int

    def __post_init__(self):
        if int(self.d) < 1 or int(self.block_N) < 1:
            raise ConfigError("d and block_N must be positive integers")

    @property
    def size(self) -> int:
        return self.d * self.block_N


def block_gaussian(n: int, block_N: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian ``n x n`` matrix with entries of variance ``1/block_N``.

    Off-diagonal entries are complex Gaussian, diagonal ones real; the
    result is exactly Hermitian.
    """
    s = np.sqrt(0.5 / block_N)
    g = rng.standard_normal((n, n)) * s + 1j * (rng.standard_normal((n, n)) * s)
    return (g + g.conj().T) * np.sqrt(0.5)


def mixture_from_profile(A, X: np.ndarray, block_N: int) -> np.ndarray:
    """Scale block ``(i, j)`` of ``X`` by ``A[i, j]``."""
    a = A.entries if isinstance(A, VarianceProfile) else np.asarray(A, dtype=float)
    ones = np.ones((block_N, block_N))
    return np.kron(a, ones) * X


def sample_mixture_matrix(A, spec: BlockMatrixSpec, seed: int, index: int,
                          stream: int = SIM_MATRIX_STREAM) -> np.ndarray:
    """Hermitian ``dN x dN`` matrix whose block ``(i, j)`` is ``A[i, j] X^(i,j)``."""
    a = A if isinstance(A, VarianceProfile) else VarianceProfile(A)
    if a.d != spec.d:
        raise ValueError(f"dimension mismatch: profile d={a.d}, spec d={spec.d}")
    X = block_gaussian(spec.size, spec.block_N, stream_rng(seed, stream, index))
    return mixture_from_profile(a, X, spec.block_N)


def eigenvalues(M: np.ndarray, herm_tol: float = 1e-10) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix, with trace self-check."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.conj().T).max() > herm_tol * scale:
        raise ValueError("matrix is not Hermitian")
    lam = np.linalg.eigvalsh(M)
    tr = float(np.trace(M).real)
    if abs(lam.sum() - tr) > 1e-8 * max(1.0, np.linalg.norm(M)):
        raise ArithmeticError("eigenvalue sum disagrees with trace")
    return lam


def block_trace(M: np.ndarray, block_N: int) -> np.ndarray:
    """``(I (x) tr_N)(M)``: the ``d x d`` matrix of normalized block traces."""
    n = M.shape[0]
    d = n // block_N
    return np.einsum("iaja->ij", M.reshape(d, block_N, d, block_N)) / block_N


def ensemble_spectrum(sampler, spec: BlockMatrixSpec, n_matrices: int, seed: int = 0,
                      threads: int = 1, max_work: float = MAX_EIG_WORK) -> EmpiricalDistribution:
    """Pooled eigenvalues of ``n_matrices`` independent mixtures, each with a fresh profile."""
    if sampler.d != spec.d:
        raise ConfigError(f"sampler d={sampler.d} does not match spec d={spec.d}")
    if n_matrices < 1:
        raise ConfigError("n_matrices must be >= 1")
    work = float(n_matrices) * float(spec.size) ** 3
    if work > max_work:
        raise WorkGuardError(f"n_matrices * (dN)**3 = {work:.3g} exceeds {max_work:.3g}")

    def one(k: int) -> np.ndarray:
        A = sampler.sample(seed, k, stream=SIM_PROFILE_STREAM)
        return eigenvalues(sample_mixture_matrix(A, spec, seed, k))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(n_matrices)))
    else:
        parts = [one(k) for k in range(n_matrices)]
    return EmpiricalDistribution(np.concatenate(parts))
