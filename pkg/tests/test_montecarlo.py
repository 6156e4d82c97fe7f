import math

import numpy as np
import pytest

from semimix.core import ConfigError, NumericalFailure, SolverSettings, VarianceProfile
from semimix.montecarlo import EntryLaw, ProfileSampler, mean_cauchy, sample_profile
from semimix.solver import closed_form_constant_rowsum, solve_grid
from semimix.spectral import total_mass

GRID = np.round(np.arange(-40, 41) * 0.1, 12)


def test_constant_sampler_returns_matrix():
    s = ProfileSampler.constant([[1, 1], [1, 1]])
    assert np.array_equal(sample_profile(s, 123, 7).entries, np.ones((2, 2)))


def test_sampling_is_deterministic_and_symmetric():
    s = ProfileSampler.iid(4, "rayleigh", sigma=1.0)
    a = sample_profile(s, 99, 3).entries
    b = sample_profile(s, 99, 3).entries
    assert np.array_equal(a, b)
    assert np.array_equal(a, a.T)
    assert np.all(a >= 0)
    assert not np.array_equal(a, sample_profile(s, 99, 4).entries)
    assert not np.array_equal(a, sample_profile(s, 98, 3).entries)


def test_rayleigh_mean():
    s = ProfileSampler.iid(3, "rayleigh", sigma=1.0)
    vals = np.array([sample_profile(s, 1, k).entries[0, 1] for k in range(100_000)])
    assert vals.mean() == pytest.approx(math.sqrt(math.pi / 2), rel=0.01)


@pytest.mark.parametrize("name,params", [
    ("uniform", {"a": 0.5, "b": 2.0}),
    ("bernoulli_scaled", {"p": 0.3, "c": 2.0}),
    ("exponential", {"lambda": 2.0}),
    ("rayleigh", {"sigma": 0.7}),
    ("constant", {"value": 1.5}),
])
def test_law_second_moments(name, params):
    law = EntryLaw(name, params)
    x = law.draw(np.random.default_rng(0), 200_000)
    assert np.all(x >= 0)
    assert np.mean(x**2) == pytest.approx(law.second_moment(), rel=0.02)


@pytest.mark.parametrize("name,params", [
    ("rayleigh", {"sigma": 0}),
    ("uniform", {"a": 2, "b": 1}),
    ("uniform", {"a": -1, "b": 1}),
    ("bernoulli_scaled", {"p": 1.5, "c": 1}),
    ("exponential", {"lambda": -1}),
    ("gamma", {"k": 1}),
    ("rayleigh", {}),
    ("rayleigh", {"sigma": 1, "mu": 0}),
])
def test_invalid_law_parameters(name, params):
    with pytest.raises(ConfigError):
        EntryLaw(name, params)


def test_overrides_apply_symmetrically():
    s = ProfileSampler(d=3, law=EntryLaw("rayleigh", {"sigma": 1.0}),
                       overrides=(((2, 0), EntryLaw("constant", {"value": 0.0})),))
    a = sample_profile(s, 5, 0).entries
    assert a[0, 2] == 0 and a[2, 0] == 0
    assert s.second_moments()[0, 2] == 0 and s.second_moments()[1, 1] == 2.0


def test_sampler_roundtrip():
    s = ProfileSampler(d=2, law=EntryLaw("uniform", {"a": 0, "b": 1}),
                       overrides=(((0, 1), EntryLaw("constant", {"value": 2.0})),))
    t = ProfileSampler.from_dict(s.to_dict())
    assert t == s
    c = ProfileSampler.constant(np.eye(2))
    assert np.array_equal(ProfileSampler.from_dict(c.to_dict()).matrix.entries, np.eye(2))


def test_mean_cauchy_constant_sampler_matches_solver_and_closed_form():
    s = SolverSettings(tol=1e-8, max_iter=10**6)
    sampler = ProfileSampler.constant(np.ones((3, 3)))
    res = mean_cauchy(sampler, GRID, s, M=1, seed=0)
    sol = solve_grid(np.ones((3, 3)), GRID, s)
    assert np.array_equal(res.mean_diagonal, sol.g)
    ref = closed_form_constant_rowsum(3.0, GRID + 1j * s.epsilon)
    assert np.abs(res.curve.density - (-ref.imag / math.pi)).max() <= 10 * s.tol
    res2 = mean_cauchy(sampler, GRID, s, M=2, seed=0)
    assert np.array_equal(res2.mean_diagonal, res.mean_diagonal)
    assert np.all(res2.per_point_stderr == 0)


class RotatingSampler:
    """d=2 profiles [[c, s], [s, c]]: every row of A**2 sums to c**2 + s**2."""

    d = 2

    def sample(self, seed, draw_index, stream=0):
        rng = np.random.default_rng([seed, stream, draw_index])
        r = rng.uniform(0.5, 2.0)
        t = rng.uniform(0, math.pi / 2)
        c, s = r * math.cos(t), r * math.sin(t)
        return VarianceProfile([[c, s], [s, c]])


def test_random_constant_rowsum_matches_averaged_closed_form():
    sampler = RotatingSampler()
    s = SolverSettings(tol=1e-9, max_iter=10**6, epsilon=1e-2)
    xs = np.linspace(-5, 5, 51)
    M = 200
    res = mean_cauchy(sampler, xs, s, M=M, seed=3)
    K = np.array([(sampler.sample(3, k).squared[0]).sum() for k in range(M)])
    ref = closed_form_constant_rowsum(K[:, None], xs[None] + 1j * s.epsilon).mean(axis=0)
    err = np.abs(res.curve.g_values.imag - ref.imag)
    assert np.all(err <= 2 * res.per_point_stderr + 1e-7)
    assert np.abs(res.curve.g_values - ref).max() < 1e-6


@pytest.fixture(scope="module")
def rayleigh_runs():
    sampler = ProfileSampler.iid(3, "rayleigh", sigma=1.0)
    s = SolverSettings(tol=1e-3, epsilon=1e-2)
    return sampler, s, {M: mean_cauchy(sampler, GRID, s, M=M, seed=8) for M in (100, 400)}


def test_stderr_scales_like_inverse_sqrt_m(rayleigh_runs):
    _, _, runs = rayleigh_runs
    inner = np.abs(GRID) < 3
    ratio = np.median(runs[400].per_point_stderr[inner] / runs[100].per_point_stderr[inner])
    assert 0.4 <= ratio <= 0.6


def test_mean_diagonal_respects_norm_bound(rayleigh_runs):
    _, s, runs = rayleigh_runs
    for res in runs.values():
        assert np.all(np.abs(res.mean_diagonal).sum(axis=1) <= 3 / s.epsilon)
        assert np.all(res.mean_diagonal.imag < 0)


def test_refining_tolerance_changes_curve_by_order_tol(rayleigh_runs):
    sampler, s, runs = rayleigh_runs
    fine = mean_cauchy(sampler, GRID, SolverSettings(tol=s.tol / 10, epsilon=s.epsilon), M=100, seed=8)
    assert np.abs(fine.curve.g_values - runs[100].curve.g_values).max() <= 5 * s.tol


def test_iteration_counts_add_over_draws(rayleigh_runs):
    sampler, s, runs = rayleigh_runs
    # draws 0..99 are a prefix of draws 0..399; work is additive per draw
    tail = sum(
        int(solve_grid(sampler.sample(8, k), GRID, s).iterations.sum()) for k in range(100, 400)
    )
    assert runs[400].total_iterations == runs[100].total_iterations + tail
    # each iteration costs d**2 multiply-adds; total work O(M * N * d**2)
    assert runs[400].total_iterations >= 400 * GRID.size


def test_thread_count_does_not_change_result():
    sampler = ProfileSampler.iid(3, "rayleigh", sigma=1.0)
    s = SolverSettings(tol=1e-3, epsilon=1e-2)
    a = mean_cauchy(sampler, GRID, s, M=70, seed=2, threads=1)
    b = mean_cauchy(sampler, GRID, s, M=70, seed=2, threads=3)
    assert np.array_equal(a.mean_diagonal, b.mean_diagonal)
    assert np.array_equal(a.per_point_stderr, b.per_point_stderr)


def test_discarded_draws_are_counted_and_excluded():
    sampler = ProfileSampler.iid(2, "rayleigh", sigma=1.0)
    s = SolverSettings(tol=1e-12, max_iter=3, epsilon=1e-3)
    with pytest.raises(NumericalFailure):
        mean_cauchy(sampler, GRID, s, M=4, seed=1)


def test_partial_discard():
    # draws with a zero profile converge in two steps; others need many more
    class Mixed:
        d = 1

        def sample(self, seed, k, stream=0):
            return VarianceProfile([[0.0 if k % 2 else 1.0]])

    s = SolverSettings(tol=1e-12, max_iter=50, epsilon=1e-3)
    res = mean_cauchy(Mixed(), GRID, s, M=6, seed=0)
    assert res.discarded == 3 and res.kept == 3
    assert np.allclose(res.mean_diagonal[:, 0], 1 / (GRID + 1e-3j))


def test_density_mass_near_one(rayleigh_runs):
    sampler = ProfileSampler.iid(3, "rayleigh", sigma=1.0)
    xs = np.round(np.arange(-1200, 1201) * 0.01, 12)
    res = mean_cauchy(sampler, xs, SolverSettings(), M=20, seed=0)
    assert 0.97 <= total_mass(res.curve) <= 1.0
    assert res.discarded == 0


def test_mean_cauchy_validates():
    sampler = ProfileSampler.constant(np.eye(2))
    with pytest.raises(ConfigError):
        mean_cauchy(sampler, GRID, M=0)
    with pytest.raises(ConfigError):
        mean_cauchy(sampler, GRID[::-1], M=1)
