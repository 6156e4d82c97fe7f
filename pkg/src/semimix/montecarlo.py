"""Random variance profiles and Monte-Carlo averaging of fixed-point solutions."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (
    ConfigError,
    NumericalFailure,
    SolverSettings,
    SpectralCurve,
    VarianceProfile,
    stream_rng,
)
from .solver import default_init

__all__ = [
    "EntryLaw",
    "ProfileSampler",
    "MeanTransformResult",
    "sample_profile",
    "sample_squared_profiles",
    "mean_cauchy",
    "PROFILE_STREAM",
]

# stream tags keep unrelated consumers of the same seed independent
PROFILE_STREAM = 0

_LAW_PARAMS = {
    "rayleigh": ("sigma",),
    "uniform": ("a", "b"),
    "constant": ("value",),
    "bernoulli_scaled": ("p", "c"),
    "exponential": ("lambda",),
}


@dataclass(frozen=True)
class EntryLaw:
    """Distribution of a single nonnegative profile entry."""

    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in _LAW_PARAMS:
            raise ConfigError(f"unknown law {self.name!r}; expected one of {sorted(_LAW_PARAMS)}")
        missing = [p for p in _LAW_PARAMS[self.name] if p not in self.params]
        if missing:
            raise ConfigError(f"law {self.name!r} missing parameter(s) {missing}")
        extra = set(self.params) - set(_LAW_PARAMS[self.name])
        if extra:
            raise ConfigError(f"law {self.name!r} got unknown parameter(s) {sorted(extra)}")
        p = {k: float(v) for k, v in self.params.items()}
        if not all(math.isfinite(v) for v in p.values()):
            raise ConfigError(f"law {self.name!r} parameters must be finite")
        ok = {
            "rayleigh": lambda: p["sigma"] > 0,
            "uniform": lambda: 0 <= p["a"] < p["b"],
            "constant": lambda: p["value"] >= 0,
            "bernoulli_scaled": lambda: 0 <= p["p"] <= 1 and p["c"] >= 0,
            "exponential": lambda: p["lambda"] > 0,
        }[self.name]()
        if not ok:
            raise ConfigError(f"invalid parameters for law {self.name!r}: {p}")
        object.__setattr__(self, "params", p)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.name == "rayleigh":
            return rng.rayleigh(p["sigma"], size)
        if self.name == "uniform":
            return rng.uniform(p["a"], p["b"], size)
        if self.name == "constant":
            return np.full(size, p["value"])
        if self.name == "bernoulli_scaled":
            return p["c"] * (rng.random(size) < p["p"])
        return rng.exponential(1.0 / p["lambda"], size)

    def second_moment(self) -> float:
        p = self.params
        if self.name == "rayleigh":
            return 2.0 * p["sigma"] ** 2
        if self.name == "uniform":
            a, b = p["a"], p["b"]
            return (a * a + a * b + b * b) / 3.0
        if self.name == "constant":
            return p["value"] ** 2
        if self.name == "bernoulli_scaled":
            return p["p"] * p["c"] ** 2
        return 2.0 / p["lambda"] ** 2

    def to_dict(self) -> dict:
        return {"law": self.name, **self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "EntryLaw":
        data = dict(data)
        try:
            name = data.pop("law")
        except KeyError:
            raise ConfigError("entry law needs a 'law' field") from None
        return cls(name, data)


@dataclass(frozen=True)
class ProfileSampler:
    """Joint law of a random profile: i.i.d. entries on and above the diagonal.

    Either ``law`` (applied to every entry ``i <= j``, with per-entry
    ``overrides``) or a fixed ``matrix`` must be given; the latter is the
    degenerate ``constant(matrix)`` law.
    """

    d: int
    law: EntryLaw | None = None
    overrides: tuple = ()
    matrix: VarianceProfile | None = None

    def __post_init__(self):
        if int(self.d) < 1:
            raise ConfigError("d must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        if (self.law is None) == (self.matrix is None):
            raise ConfigError("sampler needs exactly one of 'law' or 'matrix'")
        if self.matrix is not None:
            m = self.matrix
            if not isinstance(m, VarianceProfile):
                m = VarianceProfile.from_matrix(m)
            if m.d != self.d:
                raise ConfigError(f"constant matrix has d={m.d}, sampler has d={self.d}")
            object.__setattr__(self, "matrix", m)
            if self.overrides:
                raise ConfigError("overrides are not allowed with a constant matrix")
        ov = []
        for (i, j), law in self.overrides:
            i, j = sorted((int(i), int(j)))
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise ConfigError(f"override index ({i}, {j}) out of range for d={self.d}")
            ov.append(((i, j), law))
        object.__setattr__(self, "overrides", tuple(ov))

    @classmethod
    def constant(cls, matrix) -> "ProfileSampler":
        m = VarianceProfile.from_matrix(matrix)
        return cls(d=m.d, matrix=m)

    @classmethod
    def iid(cls, d: int, name: str, **params) -> "ProfileSampler":
        return cls(d=d, law=EntryLaw(name, params))

    @property
    def is_constant(self) -> bool:
        return self.matrix is not None

    def sample(self, seed: int, draw_index: int, stream: int = PROFILE_STREAM) -> VarianceProfile:
        if self.matrix is not None:
            return self.matrix
        rng = stream_rng(seed, stream, draw_index)
        iu = np.triu_indices(self.d)
        vals = self.law.draw(rng, iu[0].size)
        for (i, j), law in self.overrides:
            k = int(np.flatnonzero((iu[0] == i) & (iu[1] == j))[0])
            vals[k] = law.draw(rng, 1)[0]
        a = np.zeros((self.d, self.d))
        a[iu] = vals
        a = a + np.triu(a, 1).T
        return VarianceProfile(a)

    def second_moments(self) -> np.ndarray:
        """Exact ``E[A_ij**2]`` for every entry."""
        if self.matrix is not None:
            return self.matrix.squared.copy()
        out = np.full((self.d, self.d), self.law.second_moment())
        for (i, j), law in self.overrides:
            out[i, j] = out[j, i] = law.second_moment()
        return out

    def to_dict(self) -> dict:
        if self.matrix is not None:
            return {"d": self.d, "law": "constant_matrix", "matrix": self.matrix.entries.tolist()}
        out = {"d": self.d, **self.law.to_dict()}
        if self.overrides:
            out["overrides"] = [{"i": i, "j": j, **law.to_dict()} for (i, j), law in self.overrides]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ProfileSampler":
        data = dict(data)
        try:
            d = data.pop("d")
        except KeyError:
            raise ConfigError("sampler needs field 'd'") from None
        if data.get("law") == "constant_matrix":
            if "matrix" not in data:
                raise ConfigError("constant_matrix law needs field 'matrix'")
            return cls(d=d, matrix=np.asarray(data["matrix"], dtype=float))
        overrides = []
        for o in data.pop("overrides", []):
            o = dict(o)
            try:
                i, j = o.pop("i"), o.pop("j")
            except KeyError:
                raise ConfigError("override needs fields 'i' and 'j'") from None
            overrides.append(((i, j), EntryLaw.from_dict(o)))
        return cls(d=d, law=EntryLaw.from_dict(data), overrides=tuple(overrides))


def sample_profile(sampler, seed: int, draw_index: int, stream: int = PROFILE_STREAM) -> VarianceProfile:
    """Profile number ``draw_index`` of the family identified by ``seed``."""
    return sampler.sample(seed, draw_index, stream=stream)


def sample_squared_profiles(sampler, seed: int, indices, stream: int = PROFILE_STREAM) -> np.ndarray:
    """Stack of ``A**2`` for the given draw indices, shape ``(len(indices), d, d)``."""
    return np.stack([sampler.sample(seed, i, stream=stream).squared for i in indices])


@dataclass(frozen=True)
class MeanTransformResult:
    curve: SpectralCurve
    mean_diagonal: np.ndarray  # (L, d)
    draws: int
    discarded: int
    per_point_stderr: np.ndarray
    total_iterations: int
    max_residual: float  # worst fixed-point residual among kept draws

    @property
    def kept(self) -> int:
        return self.draws - self.discarded


@dataclass
class _Partial:
    n: int
    g_sum: np.ndarray
    mean_im: np.ndarray
    m2_im: np.ndarray
    discarded: int
    iterations: int
    max_residual: float


def _combine(a: _Partial, b: _Partial) -> _Partial:
    # Chan et al. pairwise update of mean and sum of squared deviations
    n = a.n + b.n
    if a.n == 0:
        mean, m2 = b.mean_im, b.m2_im
    elif b.n == 0:
        mean, m2 = a.mean_im, a.m2_im
    else:
        delta = b.mean_im - a.mean_im
        mean = a.mean_im + delta * (b.n / n)
        m2 = a.m2_im + b.m2_im + delta * delta * (a.n * b.n / n)
    return _Partial(n, a.g_sum + b.g_sum, mean, m2, a.discarded + b.discarded,
                    a.iterations + b.iterations, max(a.max_residual, b.max_residual))


def mean_cauchy(sampler, xs, settings: SolverSettings | None = None, M: int = 1000,
                seed: int = 0, threads: int = 1, chunk_size: int = 32,
                backend=None) -> MeanTransformResult:
    """Monte-Carlo estimate of the mean Cauchy transform on ``xs + i*epsilon``.

    Each of the ``M`` draws is solved with a warm-started sweep starting from
    ``-iI``. A draw with any non-converged grid point is discarded and
    counted. Draws are processed in fixed chunks whose partial sums are
    combined in draw order, so results do not depend on ``threads``.
    """
    settings = settings or SolverSettings()
    M = int(M)
    if M < 1:
        raise ConfigError("M must be >= 1")
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0 or np.any(np.diff(xs) <= 0):
        raise ConfigError("xs must be a non-empty strictly increasing grid")
    sweep = kernels.get_sweep(backend)
    d = sampler.d
    L = xs.size
    init = default_init(d)

    def run_chunk(lo: int) -> _Partial:
        hi = min(lo + chunk_size, M)
        a2 = sample_squared_profiles(sampler, seed, range(lo, hi))
        g, it, res, conv = sweep(
            a2, xs, settings.epsilon, settings.tol, settings.effective_residual_tol,
            settings.max_iter, np.repeat(init[None], hi - lo, axis=0),
        )
        ok = conv.all(axis=1)
        kept = g[ok]
        im_tr = kept.mean(axis=2).imag
        n = int(ok.sum())
        if n:
            mean = im_tr.mean(axis=0)
            m2 = ((im_tr - mean) ** 2).sum(axis=0)
        else:
            mean = np.zeros(L)
            m2 = np.zeros(L)
        return _Partial(n, kept.sum(axis=0) if n else np.zeros((L, d), complex), mean, m2,
                        int((~ok).sum()), int(it.sum()),
                        float(res[ok].max()) if n else 0.0)

    starts = range(0, M, chunk_size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(run_chunk, starts))
    else:
        partials = [run_chunk(s) for s in starts]
    total = partials[0]
    for p in partials[1:]:
        total = _combine(total, p)
    if total.n == 0:
        raise NumericalFailure(f"all {M} draws failed to converge")
    mean_diag = total.g_sum / total.n
    if total.n > 1:
        stderr = np.sqrt(total.m2_im / (total.n - 1) / total.n)
    else:
        stderr = np.full(L, np.nan)
    curve = SpectralCurve(epsilon=settings.epsilon, xs=xs, g_values=mean_diag.mean(axis=1))
    return MeanTransformResult(
        curve=curve, mean_diagonal=mean_diag, draws=M, discarded=total.discarded,
        per_point_stderr=stderr, total_iterations=total.iterations,
        max_residual=total.max_residual,
    )
