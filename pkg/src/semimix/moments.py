"""Combinatorial moments of semicircular mixtures.

A non-crossing pairing is evaluated as a nested word in the covariance map:
every pair contributes ``eta`` applied to the product of the blocks it
encloses (``I`` when it encloses nothing), and sibling blocks multiply.
All values are diagonal, so products are entrywise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .core import ConfigError, WorkGuardError
from .montecarlo import PROFILE_STREAM, sample_squared_profiles

__all__ = [
    "NoncrossingPairing",
    "Estimate",
    "catalan",
    "enumerate_nc2",
    "evaluate_pairing",
    "kappa_pi",
    "ov_moment",
    "moment_from_map",
    "wick_entrywise_moment",
    "mean_moment",
    "free_mixed_moment_abab",
    "WICK_MAX_TERMS",
]

WICK_MAX_TERMS = 10**8


class Estimate(NamedTuple):
    value: float
    stderr: float


@dataclass(frozen=True)
class NoncrossingPairing:
    """Perfect non-crossing matching of ``{1..m}``; pairs are 1-based ``(a, b)``, ``a < b``."""

    m: int
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((min(a, b), max(a, b)) for a, b in self.pairs))
        seen = sorted(x for p in pairs for x in p)
        if seen != list(range(1, self.m + 1)):
            raise ValueError(f"pairs do not form a perfect matching of 1..{self.m}")
        for a, b in pairs:
            for c, d in pairs:
                if a < c < b < d:
                    raise ValueError(f"pairs ({a},{b}) and ({c},{d}) cross")
        object.__setattr__(self, "pairs", pairs)

    def partner(self) -> list:
        """0-based partner array."""
        out = [0] * self.m
        for a, b in self.pairs:
            out[a - 1], out[b - 1] = b - 1, a - 1
        return out


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


@lru_cache(maxsize=None)
def _pairings(lo: int, hi: int) -> tuple:
    # pairings of lo..hi (inclusive, 1-based); canonical order by lo's partner
    if lo > hi:
        return ((),)
    out = []
    for k in range(lo + 1, hi + 1, 2):
        for inner in _pairings(lo + 1, k - 1):
            for outer in _pairings(k + 1, hi):
                out.append(((lo, k),) + inner + outer)
    return tuple(out)


def enumerate_nc2(m: int) -> list:
    """All non-crossing pairings of ``{1..m}``; empty for odd ``m``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m % 2:
        return []
    if m == 0:
        return [NoncrossingPairing(0, ())]
    return [NoncrossingPairing(m, p) for p in _pairings(1, m)]


def evaluate_pairing(cov_map: Callable, pi: NoncrossingPairing, identity: np.ndarray) -> np.ndarray:
    """Nested ``cov_map`` word of ``pi``, innermost pairs first.

    ``identity`` fixes shape and batch dimensions of the result.
    """
    partner = pi.partner()
    m = pi.m
    # value[p] for a block opened at position p, filled innermost-first
    value = {}
    for a, b in sorted(pi.pairs, key=lambda ab: ab[1] - ab[0]):
        lo, hi = a - 1, b - 1
        prod = identity
        p = lo + 1
        while p < hi:
            prod = prod * value[p]
            p = partner[p] + 1
        value[lo] = cov_map(prod)
    out = identity
    p = 0
    while p < m:
        out = out * value[p]
        p = partner[p] + 1
    return out


def _eta_from_squares(a2):
    return lambda D: np.einsum("...ij,...j->...i", a2, D)


def _as_squares(A) -> np.ndarray:
    if hasattr(A, "squared"):
        return A.squared
    a = np.asarray(A, dtype=float)
    return a * a


def kappa_pi(A, pi: NoncrossingPairing) -> np.ndarray:
    """Diagonal of ``kappa_pi`` for the mixture with fixed profile ``A``."""
    a2 = _as_squares(A)
    return evaluate_pairing(_eta_from_squares(a2), pi, np.ones(a2.shape[:-1]))


def moment_from_map(a2, m: int) -> np.ndarray:
    """Sum of nested-word values over NC2(m) for the covariance matrix ``a2``.

    ``a2`` holds the weights of the diagonal covariance map
    ``D -> a2 @ D``; it may carry leading batch dimensions.
    """
    a2 = np.asarray(a2, dtype=float)
    ident = np.ones(a2.shape[:-1])
    total = np.zeros(a2.shape[:-1])
    cov_map = _eta_from_squares(a2)
    for pi in enumerate_nc2(m):
        total = total + evaluate_pairing(cov_map, pi, ident)
    return total


def ov_moment(A, m: int) -> np.ndarray:
    """Diagonal of the ``M_d(C)``-valued moment ``E(H**m)`` for a fixed profile."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return moment_from_map(_as_squares(A), m)


def wick_entrywise_moment(A, m: int, max_terms: int = WICK_MAX_TERMS) -> float:
    """Brute-force ``trd E(H**m)`` summed over all index tuples.

    For every tuple ``(i_1..i_m)`` the scalar moment of the word
    ``X[i1,i2] X[i2,i3] ... X[im,i1]`` is the number of non-crossing
    pairings whose pairs all satisfy the circular covariance rule
    ``phi(X[i,j] X[k,l]) = delta(i,l) delta(j,k)``.
    """
    a = np.asarray(A.entries if hasattr(A, "entries") else A, dtype=float)
    d = a.shape[0]
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m % 2:
        return 0.0
    if m == 0:
        return 1.0
    n_pairings = catalan(m // 2)
    if d**m * n_pairings > max_terms:
        raise WorkGuardError(f"d**m * Catalan(m/2) = {d**m * n_pairings} exceeds {max_terms}")
    idx = np.indices((d,) * m).reshape(m, -1)
    nxt = np.roll(idx, -1, axis=0)
    word = np.prod(a[idx, nxt], axis=0)
    phi = np.zeros(idx.shape[1])
    for pi in enumerate_nc2(m):
        ok = np.ones(idx.shape[1], dtype=bool)
        for p1, q1 in pi.pairs:
            p, q = p1 - 1, q1 - 1
            ok &= (idx[p] == nxt[q]) & (nxt[p] == idx[q])
        phi += ok
    return float(np.sum(word * phi) / d)


def mean_moment(sampler, m: int, M: int = 1000, seed: int = 0,
                stream: int = PROFILE_STREAM) -> Estimate:
    """Monte-Carlo mean of ``trd E(H**m)`` over ``M`` profile draws.

    Draw ``k`` is the same profile that :func:`~semimix.montecarlo.mean_cauchy`
    uses for the same ``seed``.
    """
    if M < 1:
        raise ConfigError("M must be >= 1")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m % 2:
        return Estimate(0.0, 0.0)
    a2 = sample_squared_profiles(sampler, seed, range(M), stream=stream)
    per_draw = moment_from_map(a2, m).mean(axis=-1)
    stderr = float(per_draw.std(ddof=1) / math.sqrt(M)) if M > 1 else float("nan")
    return Estimate(float(per_draw.mean()), stderr)


def free_mixed_moment_abab(phi_a1: float, phi_a1_sq: float, phi_a2: float, phi_a2_sq: float) -> float:
    """``phi(b1 b2 b1 b2)`` for freely independent ``b1``, ``b2``."""
    return phi_a1_sq * phi_a2**2 + phi_a1**2 * phi_a2_sq - phi_a1**2 * phi_a2**2
