import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scalemix import autocorrelation, batch_means_se, effective_sample_size


def ar1(phi, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n) * math.sqrt(1 - phi * phi)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    for i in range(1, n):
        x[i] = phi * x[i - 1] + e[i]
    return x


def test_batch_means_se_ar1():
    # asymptotic sd of the mean is sqrt((1 + phi) / (1 - phi)) = 4.36 at phi = 0.9
    n = 200_000
    ses = [batch_means_se(ar1(0.9, n, seed))[1] for seed in range(5)]
    assert np.mean(ses) * math.sqrt(n) == pytest.approx(math.sqrt(19), rel=0.1)


def test_batch_count():
    mean, se, k = batch_means_se(np.arange(110, dtype=float))
    assert k == 11 and mean == pytest.approx(54.5)


def test_ess_ar1_and_iid():
    n = 100_000
    assert effective_sample_size(ar1(0.9, n, 1)) == pytest.approx(n / 19, rel=0.2)
    iid = np.random.default_rng(0).standard_normal(n)
    assert effective_sample_size(iid) == pytest.approx(n, rel=0.1)


def test_ess_of_antithetic_series_is_capped():
    x = np.tile([1.0, -1.0], 500) + 1e-3 * np.random.default_rng(0).standard_normal(1000)
    assert effective_sample_size(x) <= 1000


def test_ess_of_repeated_pairs():
    x = np.repeat(np.random.default_rng(3).standard_normal(50_000), 2)
    assert effective_sample_size(x) == pytest.approx(50_000, rel=0.2)


def test_iid_se_and_constant_series():
    ses = [batch_means_se(np.random.default_rng(s).standard_normal(10_000))[1] for s in range(20)]
    assert np.mean(ses) == pytest.approx(0.01, rel=0.3)
    assert batch_means_se(np.full(100, 2.5))[1] == 0.0


def test_white_noise_bands():
    n = 20_000
    acf = autocorrelation(np.random.default_rng(4).standard_normal(n), 200)
    assert np.mean(np.abs(acf[1:]) < 4 / math.sqrt(n)) >= 0.95
    assert autocorrelation(ar1(0.5, 100_000, 9), 1)[1] == pytest.approx(0.5, abs=0.05)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.95, 0.95), st.integers(100, 3000))
def test_ess_never_exceeds_length(seed, phi, n):
    x = ar1(phi, n, seed)
    assert effective_sample_size(x) <= 1.05 * n


def test_autocorrelation_ar1():
    acf = autocorrelation(ar1(0.7, 100_000, 2), 5)
    np.testing.assert_allclose(acf, 0.7 ** np.arange(6), atol=0.02)


@pytest.mark.parametrize("series", [np.ones(10), [1.0, np.nan] * 20, np.ones((5, 5))])
def test_rejects_bad_series(series):
    with pytest.raises(ValueError):
        batch_means_se(series)


def test_autocorrelation_errors():
    with pytest.raises(ValueError):
        autocorrelation(np.ones(100), 3)
    with pytest.raises(ValueError):
        autocorrelation(np.arange(100.0), 25)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=16, max_size=400), st.floats(-1e3, 1e3))
def test_batch_means_shift_invariance(values, shift):
    x = np.array(values)
    m0, se0, k0 = batch_means_se(x)
    m1, se1, k1 = batch_means_se(x + shift)
    assert k0 == k1
    assert m1 == pytest.approx(m0 + shift, abs=1e-8)
    assert se1 == pytest.approx(se0, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=16, max_size=400), st.floats(-50, 50))
def test_batch_means_scale_equivariance(values, c):
    x = np.array(values)
    assert batch_means_se(c * x)[1] == pytest.approx(abs(c) * batch_means_se(x)[1],
                                                      rel=1e-9, abs=1e-9)
