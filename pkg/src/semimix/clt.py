"""Central-limit machinery for independent, free sums of semicircular mixtures."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, WorkGuardError, stream_rng
from .moments import Estimate, moment_from_map
from .rmt_sim import block_gaussian, block_trace, eigenvalues, mixture_from_profile

__all__ = [
    "MeanCovarianceProfile",
    "hat_eta",
    "clt_limit_moment",
    "empirical_clt_moments",
    "empirical_clt_moment",
    "PairCancellation",
    "pair_cancellation_check",
    "CLT_PROFILE_STREAM",
    "CLT_MATRIX_STREAM",
    "MAX_CLT_WORK",
]

CLT_PROFILE_STREAM = 3
CLT_MATRIX_STREAM = 4
MAX_CLT_WORK = 10**12


@dataclass(frozen=True)
class MeanCovarianceProfile:
    """``E[A_ij**2]`` for every entry of the random profile."""

    second_moments: np.ndarray

    def __post_init__(self):
        s = np.array(self.second_moments, dtype=float, copy=True)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] == 0:
            raise ConfigError("second moments must form a non-empty square matrix")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ConfigError("second moments must be finite and nonnegative")
        if np.any(np.abs(s - s.T) > 1e-12 * max(1.0, s.max())):
            raise ConfigError("second moments must be symmetric")
        s.setflags(write=False)
        object.__setattr__(self, "second_moments", s)

    @classmethod
    def from_sampler(cls, sampler) -> "MeanCovarianceProfile":
        return cls(sampler.second_moments())

    @property
    def d(self) -> int:
        return self.second_moments.shape[0]


def hat_eta(cov: MeanCovarianceProfile, D) -> np.ndarray:
    """Mean covariance map on diagonals: ``sum_j E[A_ij**2] D_j``."""
    D = np.asarray(D, dtype=complex)
    if D.shape[-1] != cov.d:
        raise ValueError(f"dimension mismatch: cov d={cov.d}, diagonal d={D.shape[-1]}")
    return np.einsum("ij,...j->...i", cov.second_moments, D)


def clt_limit_moment(cov: MeanCovarianceProfile, m: int) -> np.ndarray:
    """Limiting mean moment: the NC2 sum of nested ``hat_eta`` words."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return moment_from_map(cov.second_moments, m)


def _check_work(trials, n_summands, size, max_work):
    work = float(trials) * (float(n_summands) * size**2 + float(size) ** 3)
    if work > max_work:
        raise WorkGuardError(f"estimated work {work:.3g} exceeds {max_work:.3g}")


def _normalized_sum(sampler, N_sum, matrix_N, seed, trial):
    d = sampler.d
    n = d * matrix_N
    S = np.zeros((n, n), dtype=complex)
    for k in range(N_sum):
        A = sampler.sample(seed, trial * N_sum + k, stream=CLT_PROFILE_STREAM)
        X = block_gaussian(n, matrix_N, stream_rng(seed, CLT_MATRIX_STREAM, N_sum, trial, k))
        S += mixture_from_profile(A, X, matrix_N)
    S /= math.sqrt(N_sum)
    return S


def empirical_clt_moments(sampler, N_sum: int, matrix_N: int, ms, trials: int,
                          seed: int = 0, max_work: float = MAX_CLT_WORK) -> dict:
    """Estimate ``E[trd E(S**m)]`` for ``S = sum_n A_n o X_n / sqrt(N_sum)``.

    Every summand has its own profile draw and its own block-Gaussian
    matrix. Returns ``{m: Estimate}`` over ``trials`` independent sums.
    """
    if N_sum < 1 or matrix_N < 1 or trials < 1:
        raise ConfigError("N_sum, matrix_N and trials must be positive")
    ms = [int(m) for m in ms]
    _check_work(trials, N_sum, sampler.d * matrix_N, max_work)
    vals = np.empty((trials, len(ms)))
    for t in range(trials):
        lam = eigenvalues(_normalized_sum(sampler, N_sum, matrix_N, seed, t))
        vals[t] = [np.mean(lam**m) for m in ms]
    out = {}
    for j, m in enumerate(ms):
        se = float(vals[:, j].std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
        out[m] = Estimate(float(vals[:, j].mean()), se)
    return out


def empirical_clt_moment(sampler, N_sum: int, matrix_N: int, m: int, trials: int,
                         seed: int = 0, max_work: float = MAX_CLT_WORK) -> Estimate:
    return empirical_clt_moments(sampler, N_sum, matrix_N, [m], trials, seed, max_work)[int(m)]


@dataclass(frozen=True)
class PairCancellation:
    lhs: np.ndarray
    rhs: np.ndarray
    rel_err: float
    lhs_matrix: np.ndarray


def pair_cancellation_check(sampler, matrix_N: int, B, trials: int, seed: int = 0,
                            max_work: float = MAX_CLT_WORK) -> PairCancellation:
    """Compare simulated ``E[E(Z1 Z2 B Z2 Z1)]`` with ``hat_eta(hat_eta(B))``.

    ``Z1`` and ``Z2`` carry independent profiles and independent Gaussian
    blocks. ``rel_err`` uses the full ``d x d`` simulated block-trace matrix,
    so off-diagonal leakage counts against it.
    """
    d = sampler.d
    b = np.asarray(B)
    if b.ndim == 2:
        if np.any(b != np.diag(np.diag(b))):
            raise ValueError("B must be diagonal")
        b = np.diag(b)
    b = b.astype(float)
    if b.shape != (d,):
        raise ValueError(f"B must have {d} diagonal entries")
    n = d * matrix_N
    _check_work(trials, 2, n, max_work)
    cov = MeanCovarianceProfile.from_sampler(sampler)
    rhs = hat_eta(cov, hat_eta(cov, b))
    bfull = np.repeat(b, matrix_N)
    acc = np.zeros((d, d), dtype=complex)
    for t in range(trials):
        Z = []
        for k in range(2):
            A = sampler.sample(seed, 2 * t + k, stream=CLT_PROFILE_STREAM)
            X = block_gaussian(n, matrix_N, stream_rng(seed, CLT_MATRIX_STREAM, 0, t, k))
            Z.append(mixture_from_profile(A, X, matrix_N))
        Z1, Z2 = Z
        inner = Z2 @ (bfull[:, None] * Z2)
        P = Z1 @ inner
        # block traces of P @ Z1 without forming the product
        blocks = np.einsum("iajb,jbka->ik",
                           P.reshape(d, matrix_N, d, matrix_N),
                           Z1.reshape(d, matrix_N, d, matrix_N)) / matrix_N
        acc += blocks
    lhs_mat = acc / trials
    rhs_mat = np.diag(rhs)
    denom = np.abs(rhs_mat).sum()
    if denom == 0:
        rel = float(np.abs(lhs_mat).sum())
    else:
        rel = float(np.abs(lhs_mat - rhs_mat).sum() / denom)
    return PairCancellation(lhs=np.diag(lhs_mat).copy(), rhs=rhs, rel_err=rel, lhs_matrix=lhs_mat)
