import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from semimix.core import (
    ConfigError,
    SolverSettings,
    SpectralCurve,
    VarianceProfile,
    check_cauchy_diagonal,
    l1_norm,
    normalized_trace,
    stream_rng,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_normalized_trace_examples():
    assert normalized_trace([2 + 3j]) == 2 + 3j
    assert normalized_trace([1j, -1j]) == 0
    assert normalized_trace([1, 2, 3]) == 2


def test_l1_norm_examples():
    assert l1_norm([3 + 4j]) == 5
    assert l1_norm([1j, -1j]) == 2
    assert l1_norm([0, 0, 0]) == 0


@given(st.lists(cplx, min_size=1, max_size=6), st.data(), cplx)
def test_trace_is_linear(d1, data, alpha):
    d2 = data.draw(st.lists(cplx, min_size=len(d1), max_size=len(d1)))
    lhs = normalized_trace(alpha * np.array(d1) + np.array(d2))
    rhs = alpha * normalized_trace(d1) + normalized_trace(d2)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(alpha)) * (1 + max(map(abs, d1 + d2)))


@given(st.lists(cplx, min_size=1, max_size=6), st.data())
def test_l1_triangle_inequality(d1, data):
    d2 = data.draw(st.lists(cplx, min_size=len(d1), max_size=len(d1)))
    s = l1_norm(np.array(d1) + np.array(d2))
    assert s <= l1_norm(d1) + l1_norm(d2) + 1e-9 * (1 + s)


@pytest.mark.parametrize("bad", [
    [[1.0, 2.0], [0.5, 1.0]],
    [[1.0, -1.0], [-1.0, 1.0]],
    [[np.nan]],
    [[1.0, 2.0]],
    np.zeros((0, 0)),
])
def test_profile_rejects_invalid(bad):
    with pytest.raises(ConfigError):
        VarianceProfile(np.asarray(bad))


@given(arrays(np.float64, (3, 3), elements=st.floats(-5, 5)))
def test_from_matrix_takes_moduli(m):
    sym = m + m.T
    p = VarianceProfile.from_matrix(sym)
    assert np.array_equal(p.entries, np.abs(sym))
    assert np.array_equal(p.entries, p.entries.T)


def test_from_matrix_accepts_complex_hermitian():
    a = np.array([[1, 1 + 1j], [1 - 1j, 2]])
    p = VarianceProfile.from_matrix(a)
    assert np.allclose(p.entries, [[1, np.sqrt(2)], [np.sqrt(2), 2]])


def test_profile_is_immutable():
    p = VarianceProfile(np.ones((2, 2)))
    with pytest.raises(ValueError):
        p.entries[0, 0] = 3


@pytest.mark.parametrize("kw", [{"tol": 0}, {"max_iter": 0}, {"epsilon": -1e-3}, {"residual_tol": 0}])
def test_settings_validation(kw):
    with pytest.raises(ConfigError):
        SolverSettings(**kw)


def test_residual_tolerance_default():
    assert SolverSettings(tol=1e-4).effective_residual_tol == pytest.approx(1e-3)
    assert SolverSettings(tol=1e-4, residual_tol=0.5).effective_residual_tol == 0.5


def test_spectral_curve_invariants():
    c = SpectralCurve(0.01, [0.0, 1.0], [-1j, -0.5j])
    assert np.allclose(c.density, [1 / np.pi, 0.5 / np.pi])
    with pytest.raises(ValueError):
        SpectralCurve(0.01, [1.0, 0.0], [-1j, -1j])
    with pytest.raises(ValueError):
        SpectralCurve(0.01, [0.0], [0.5j])


def test_check_cauchy_diagonal():
    check_cauchy_diagonal([-0.5j, -1j], 1j)
    with pytest.raises(ValueError):
        check_cauchy_diagonal([0.1j], 1j)
    with pytest.raises(ValueError):
        check_cauchy_diagonal([-3j], 0.5j)


def test_stream_rng_is_keyed():
    a = stream_rng(5, 0, 1).random(4)
    assert np.array_equal(a, stream_rng(5, 0, 1).random(4))
    assert not np.array_equal(a, stream_rng(5, 0, 2).random(4))
    assert not np.array_equal(a, stream_rng(5, 1, 1).random(4))
