import math
import warnings

import numpy as np
import pytest

from semimix.core import SpectralCurve
from semimix.solver import closed_form_constant_rowsum
from semimix.spectral import (
    EmpiricalDistribution,
    SupportTruncationWarning,
    ks_distance,
    l1_density_distance,
    quadrature_moment,
    stieltjes_density,
    total_mass,
)

from conftest import semicircle_density, semicircle_samples


def semicircle_curve(eps=1e-3, lo=-2.5, hi=2.5, step=0.01, K=1.0):
    xs = np.round(np.arange(round(lo / step), round(hi / step) + 1) * step, 12)
    return SpectralCurve(eps, xs, closed_form_constant_rowsum(K, xs + 1j * eps))


def test_stieltjes_examples():
    assert stieltjes_density([-1j]) == pytest.approx([1 / math.pi])
    assert stieltjes_density([0]) == [0]
    g0 = closed_form_constant_rowsum(1.0, 1e-9j)
    assert g0 == pytest.approx(-1j, abs=1e-8)
    assert stieltjes_density([g0])[0] == pytest.approx(1 / math.pi, abs=1e-8)


def test_stieltjes_leak_handling():
    assert stieltjes_density([5e-13j])[0] == 0
    with pytest.raises(ValueError):
        stieltjes_density([1e-9j])


def test_quadrature_moments_of_semicircle():
    c = semicircle_curve()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportTruncationWarning)
        assert quadrature_moment(c, 0) == pytest.approx(1, abs=0.02)
        assert quadrature_moment(c, 2) == pytest.approx(1, abs=0.03)
        assert quadrature_moment(c, 1) == pytest.approx(0, abs=0.01)


def test_truncation_warning():
    narrow = semicircle_curve(lo=-1, hi=1)
    with pytest.warns(SupportTruncationWarning):
        quadrature_moment(narrow, 2)
    with pytest.raises(ValueError):
        quadrature_moment(narrow, -1)


def test_mass_and_nonnegativity():
    c = semicircle_curve(lo=-2.5, hi=2.5)
    assert np.all(c.density >= 0)
    assert 0.97 <= total_mass(c) <= 1.0


def test_density_converges_to_real_axis_limit():
    xs = np.linspace(-1.8, 1.8, 37)
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        dens = stieltjes_density(closed_form_constant_rowsum(1.0, xs + 1j * eps))
        errs.append(np.abs(dens - semicircle_density(xs)).max())
    assert errs[0] > errs[1] > errs[2]


def test_l1_examples(rng):
    emp = EmpiricalDistribution(rng.normal(size=1000))
    assert l1_density_distance(emp, emp, 0.1) == 0
    far = EmpiricalDistribution(rng.normal(size=1000) + 100)
    assert l1_density_distance(emp, far, 0.1) == pytest.approx(2)
    c = semicircle_curve(eps=1e-6, lo=-2.2, hi=2.2, step=0.001)
    assert l1_density_distance(c, far, 0.1) == pytest.approx(2, abs=1e-3)


def test_ks_examples(rng):
    emp = EmpiricalDistribution(rng.normal(size=1000))
    assert ks_distance(emp, emp) == 0
    far = EmpiricalDistribution(rng.normal(size=1000) + 100)
    assert ks_distance(emp, far) == 1
    c = semicircle_curve(eps=1e-6, lo=-2.2, hi=2.2, step=0.001)
    assert ks_distance(c, far) == pytest.approx(1, abs=1e-3)


def test_semicircle_samples_close_to_curve(rng):
    emp = EmpiricalDistribution(semicircle_samples(100_000, rng))
    c = semicircle_curve(eps=1e-4, lo=-2.5, hi=2.5, step=0.001)
    assert l1_density_distance(c, emp, 0.1) < 0.03
    assert ks_distance(c, emp) < 0.01
    assert ks_distance(emp, c) == ks_distance(c, emp)


def test_distances_symmetric_and_triangle(rng):
    for _ in range(20):
        a, b, c = (EmpiricalDistribution(rng.normal(rng.normal(), rng.uniform(0.5, 2), 300))
                   for _ in range(3))
        for f in (lambda x, y: l1_density_distance(x, y, 0.1), ks_distance):
            assert f(a, b) == pytest.approx(f(b, a), abs=1e-12)
            assert f(a, c) <= f(a, b) + f(b, c) + 1e-12


def test_empirical_distribution_validation():
    with pytest.raises(ValueError):
        EmpiricalDistribution([])
    with pytest.raises(ValueError):
        EmpiricalDistribution([np.inf])
    e = EmpiricalDistribution([3.0, 1.0, 2.0])
    assert list(e.samples) == [1, 2, 3]
    assert e.moment(2) == pytest.approx(14 / 3)
