import math

import numpy as np
import pytest
from scipy import special, stats

from scalemix import _backend
from scalemix.gig import log_bessel_k, log_gig_integral, sample_gig

REGIMES = [
    (0.3, 0.2, 0.4),     # small omega, lam < 1: non-concave hat
    (0.5, 1.0, 1.0),     # ratio of uniforms without shift
    (2.5, 3.0, 4.0),     # ratio of uniforms with mode shift
    (-1.7, 2.0, 0.5),    # negative lam through the reciprocal
    (0.0, 1.0, 2.0),
    (20.0, 0.1, 50.0),
]


def _scipy_gig(lam, a, b):
    return stats.geninvgauss(lam, math.sqrt(a * b), scale=math.sqrt(b / a))


def test_log_bessel_k_matches_scipy():
    for v, x in [(0.5, 1.0), (3.2, 0.01), (-2.0, 40.0), (10.0, 700.0)]:
        assert log_bessel_k(v, x) == pytest.approx(math.log(special.kve(v, x)) - x, rel=1e-10)


def test_log_gig_integral():
    lam, a, b = 1.3, 2.0, 0.7
    expected = math.log(2) + lam / 2 * math.log(b / a) + math.log(special.kv(lam, math.sqrt(a * b)))
    assert log_gig_integral(lam, a, b) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("lam,a,b", REGIMES)
def test_sampler_matches_density(lam, a, b):
    rng = np.random.default_rng(31)
    x = np.array([sample_gig(lam, a, b, rng) for _ in range(5000)])
    assert stats.kstest(x, _scipy_gig(lam, a, b).cdf).pvalue > 0.001


def test_gamma_and_inverse_gamma_limits():
    rng = np.random.default_rng(2)
    x = np.array([sample_gig(2.0, 3.0, 0.0, rng) for _ in range(4000)])
    assert stats.kstest(x, stats.gamma(2.0, scale=2 / 3.0).cdf).pvalue > 0.001
    x = np.array([sample_gig(-2.0, 0.0, 3.0, rng) for _ in range(4000)])
    assert stats.kstest(x, stats.invgamma(2.0, scale=1.5).cdf).pvalue > 0.001
    with pytest.raises(ValueError):
        sample_gig(-1.0, 2.0, 0.0, rng)
    with pytest.raises(ValueError):
        sample_gig(1.0, -2.0, 1.0, rng)


@pytest.mark.skipif(_backend._kernels is None, reason="compiled extension not built")
@pytest.mark.parametrize("lam,a,b", REGIMES)
def test_compiled_gig_reproduces_python_stream(lam, a, b):
    py_rng = np.random.default_rng(77)
    expected = np.array([sample_gig(lam, a, b, py_rng) for _ in range(500)])
    got = _backend._kernels.gig_draws(lam, a, b, np.random.default_rng(77).bit_generator, 500)
    np.testing.assert_allclose(got, expected, rtol=1e-12)
