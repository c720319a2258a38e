"""Tests for the innovation families: validation, sampling, tails."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from longtail.innovations import (
    InnovationSpec,
    innovation_tail,
    moment_index,
    sample_innovations,
    tail_constant,
)


# ----------------------------------------------------------------------
# spec validation
# ----------------------------------------------------------------------

def test_family_validation():
    with pytest.raises(ValueError):
        InnovationSpec("Lognormal", nu=1.5)
    with pytest.raises(ValueError):
        InnovationSpec("Gaussian", scale=0.0)
    with pytest.raises(ValueError):
        InnovationSpec("Gaussian", scale=math.inf)
    with pytest.raises(ValueError):
        InnovationSpec("Gaussian", nu=1.5)  # Gaussian means nu = inf
    with pytest.raises(ValueError):
        InnovationSpec("SymmetricStable", nu=2.0)  # alpha=2 stable is Gaussian
    with pytest.raises(ValueError):
        InnovationSpec("SymmetricStable", nu=0.9)
    with pytest.raises(ValueError):
        InnovationSpec("SymmetricStable")  # nu required
    with pytest.raises(ValueError):
        InnovationSpec("StudentT", nu=1.0)
    with pytest.raises(ValueError):
        InnovationSpec("StudentT", nu=math.inf)


def test_gaussian_nu_normalizes_to_inf():
    spec = InnovationSpec("Gaussian")
    assert math.isinf(spec.nu)
    assert math.isinf(moment_index(spec))


def test_moment_index_passthrough():
    assert moment_index(InnovationSpec("SymmetricStable", nu=1.7)) == 1.7
    assert moment_index(InnovationSpec("StudentT", nu=3.0)) == 3.0


def test_cauchy_endpoint_tail_only():
    # nu = 1 builds (for tail arithmetic) but refuses to sample
    spec = InnovationSpec("SymmetricStable", nu=1.0, scale=1.0)
    assert innovation_tail(spec, 1.0) == pytest.approx(0.25, abs=1e-14)
    assert innovation_tail(spec, 0.0) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError):
        sample_innovations(spec, 8, seed=1)


# ----------------------------------------------------------------------
# tail constants, P[eps > x] ~ (A/2) x^{-nu}
# ----------------------------------------------------------------------

def test_tail_constant_frozen_values():
    # closed forms evaluated offline
    assert tail_constant(
        InnovationSpec("SymmetricStable", nu=1.5, scale=1.0)
    ) == pytest.approx(0.3989422804014, rel=1e-11)
    assert tail_constant(
        InnovationSpec("StudentT", nu=1.5, scale=1.0)
    ) == pytest.approx(0.7541704864032, rel=1e-11)
    assert tail_constant(
        InnovationSpec("StudentT", nu=1.2, scale=2.0)
    ) == pytest.approx(1.5396019858283, rel=1e-11)


def test_tail_constant_rejects_gaussian():
    with pytest.raises(ValueError):
        tail_constant(InnovationSpec("Gaussian"))


@given(
    family=st.sampled_from(["SymmetricStable", "StudentT"]),
    nu=st.floats(1.1, 1.9),
    scale=st.floats(0.3, 3.0),
)
@settings(max_examples=40, deadline=None)
def test_tail_constant_matches_far_tail(family, nu, scale):
    # the constant must reproduce the actual survival function far out
    spec = InnovationSpec(family, nu=nu, scale=scale)
    x = 2000.0 * scale
    asym = 0.5 * tail_constant(spec) * x**-nu
    assert float(innovation_tail(spec, x)) == pytest.approx(asym, rel=5e-3)


def test_tail_constant_scale_power_law():
    # A(scale) = scale^nu A(1)
    a1 = tail_constant(InnovationSpec("SymmetricStable", nu=1.4, scale=1.0))
    a3 = tail_constant(InnovationSpec("SymmetricStable", nu=1.4, scale=3.0))
    assert a3 == pytest.approx(3.0**1.4 * a1, rel=1e-12)


# ----------------------------------------------------------------------
# exact tails
# ----------------------------------------------------------------------

def test_gaussian_tail_closed_form():
    spec = InnovationSpec("Gaussian", scale=2.0)
    for x in (0.0, 1.0, 3.0):
        exact = 0.5 * math.erfc(x / (2.0 * math.sqrt(2.0)))
        assert float(innovation_tail(spec, x)) == pytest.approx(exact, rel=1e-12)


def test_student_tail_matches_density_integral():
    # independent route: numeric integral of the t density
    from scipy import integrate

    spec = InnovationSpec("StudentT", nu=1.5, scale=1.0)
    val, _ = integrate.quad(lambda t: stats.t.pdf(t, 1.5), 4.0, math.inf)
    assert float(innovation_tail(spec, 4.0)) == pytest.approx(val, rel=1e-9)
    assert float(innovation_tail(spec, 4.0)) == pytest.approx(0.044916263477, rel=1e-9)


@given(x=st.floats(-20.0, 20.0))
@settings(max_examples=50, deadline=None)
def test_tail_symmetry(x):
    for spec in (
        InnovationSpec("Gaussian", scale=1.3),
        InnovationSpec("SymmetricStable", nu=1.6, scale=0.8),
        InnovationSpec("StudentT", nu=2.5, scale=1.1),
    ):
        up = float(innovation_tail(spec, x))
        dn = float(innovation_tail(spec, -x))
        assert up + dn == pytest.approx(1.0, abs=1e-10)


def test_tail_accepts_arrays():
    spec = InnovationSpec("SymmetricStable", nu=1.5, scale=1.0)
    xs = np.array([0.5, 2.0, 8.0])
    vals = innovation_tail(spec, xs)
    assert vals.shape == (3,)
    assert np.all(np.diff(vals) < 0.0)


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------

def test_sampling_deterministic_and_seed_sensitive():
    for spec in (
        InnovationSpec("Gaussian", scale=1.0),
        InnovationSpec("SymmetricStable", nu=1.5, scale=2.0),
        InnovationSpec("StudentT", nu=1.8, scale=0.5),
    ):
        a = sample_innovations(spec, 128, seed=42)
        b = sample_innovations(spec, 128, seed=42)
        c = sample_innovations(spec, 128, seed=43)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert a.shape == (128,)


def test_sampling_rejects_bad_count():
    with pytest.raises(ValueError):
        sample_innovations(InnovationSpec("Gaussian"), 0, seed=1)


def test_gaussian_draws_distribution():
    spec = InnovationSpec("Gaussian", scale=2.5)
    xs = sample_innovations(spec, 40000, seed=7)
    _, p = stats.kstest(xs / 2.5, "norm")
    assert p > 1e-3


def test_student_draws_distribution():
    spec = InnovationSpec("StudentT", nu=1.5, scale=2.0)
    xs = sample_innovations(spec, 40000, seed=8)
    _, p = stats.kstest(xs / 2.0, lambda x: stats.t.cdf(x, 1.5))
    assert p > 1e-3


def test_stable_draws_match_tail_function():
    # KS of the sampled stream against the family's own exact tail
    spec = InnovationSpec("SymmetricStable", nu=1.4, scale=1.5)
    xs = np.sort(sample_innovations(spec, 40000, seed=9))
    cdf = 1.0 - innovation_tail(spec, xs)
    i = np.arange(1, xs.size + 1)
    ks = np.max(np.maximum(i / xs.size - cdf, cdf - (i - 1) / xs.size))
    assert ks < 0.012


def test_student_heavy_tail_is_heavy():
    # a nu = 1.2 stream at 2e5 draws must show values far beyond Gaussian range
    spec = InnovationSpec("StudentT", nu=1.2, scale=1.0)
    xs = sample_innovations(spec, 200000, seed=10)
    assert np.max(np.abs(xs)) > 50.0
