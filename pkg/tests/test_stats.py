from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from spingraph.stats import (
    StatsError, form_factor_from_spectrum, goe_series_coefficients, ks_distance, nns_statistics,
    rmt_cdf, rmt_reference, rmt_series, sample_surmise, series_coefficients,
    series_relation_holds, slope_through_origin,
)


def test_spacings_of_grid():
    s = nns_statistics(np.array([1.0, 2, 3, 4]))
    assert np.allclose(s.spacings, 1)
    fence = nns_statistics(np.arange(200.0))
    assert fence.cdf(0.999) == 0 and fence.cdf(1.0) == 1
    with pytest.raises(StatsError):
        nns_statistics(np.array([1.0]))


@pytest.mark.parametrize("ens", ["GOE", "GSE"])
def test_surmise_normalisation(ens):
    assert rmt_reference(ens, 0.0) == 0
    norm, _ = quad(lambda s: rmt_reference(ens, s), 0, np.inf, epsabs=1e-12)
    mean, _ = quad(lambda s: s * rmt_reference(ens, s), 0, np.inf, epsabs=1e-12)
    assert abs(norm - 1) < 1e-6 and abs(mean - 1) < 1e-6
    x = np.linspace(0, 3, 7)
    cdf = [quad(lambda s: rmt_reference(ens, s), 0, t)[0] for t in x]
    assert np.allclose(rmt_cdf(ens, x), cdf, atol=1e-9)


def test_series_coefficients():
    assert series_coefficients("GSE") == tuple(Fraction(1, n) for n in (2, 4, 8, 12))
    assert goe_series_coefficients() == (2, -2, 2, Fraction(-8, 3))
    assert series_relation_holds() == [True] * 4
    for m, (a, b) in enumerate(zip(series_coefficients("GSE"), series_coefficients("GOE")), 1):
        assert a == Fraction(-1, 2) ** (m + 1) * b
    assert rmt_series("GSE", 0.1, order=1) == pytest.approx(0.05)


@pytest.mark.parametrize("ens", ["GOE", "GSE"])
def test_self_sample_ks(ens):
    x = sample_surmise(ens, 10**4, np.random.default_rng(0))
    assert ks_distance(x, ens) < 0.02


def test_picket_fence_far_from_both():
    fence = nns_statistics(np.arange(500.0))
    assert ks_distance(fence, "GSE") >= 0.2
    assert ks_distance(fence, "GOE") >= 0.2


@settings(max_examples=25)
@given(st.integers(0, 2**31))
def test_ks_symmetric_and_zero_on_identical(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.exponential(size=300), rng.exponential(size=200)
    assert ks_distance(a, b) == ks_distance(b, a)
    assert ks_distance(a, a.copy()) == 0


def test_form_factor_poisson():
    # each window gives an exponential variate, so average over windows and over tau bins
    x = np.sort(np.random.default_rng(4).uniform(0, 64000, 64000))
    tau = np.arange(0.1, 1.0, 0.02)
    K = form_factor_from_spectrum(x, tau, window_count=64).K
    assert np.all(np.abs(np.convolve(K, np.ones(10) / 10, "valid") - 1) < 0.15)


def test_form_factor_picket_fence_peaks():
    tau = np.array([0.5, 0.98, 1.0, 1.02, 1.5, 2.0])
    K = form_factor_from_spectrum(np.arange(4000.0), tau).K
    assert K[2] > 100 and K[5] > 100
    assert K[0] < 1e-6 and K[4] < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.floats(-1e3, 1e3))
def test_form_factor_shift_invariant(c):
    x = np.sort(np.random.default_rng(2).uniform(0, 2000, 2000))
    tau = np.linspace(0.05, 1.0, 20)
    a = form_factor_from_spectrum(x, tau).K
    b = form_factor_from_spectrum(x + c, tau).K
    assert np.allclose(a, b, rtol=1e-8, atol=1e-10)


def test_form_factor_preconditions():
    with pytest.raises(StatsError):
        form_factor_from_spectrum(np.arange(500.0), [0.1])
    with pytest.raises(StatsError):
        form_factor_from_spectrum(np.arange(2000.0), [0.1], window_count=4)


def test_slope_through_origin():
    tau = np.linspace(0.05, 0.2, 10)
    assert slope_through_origin(tau, 0.5 * tau) == pytest.approx(0.5)
