import numpy as np
import pytest

from scalemix import (ChainConfig, Gamma, InvertedGamma, LogNormal, RegressionData,
                      ShiftedPareto, UnsupportedCaseError, compare_moments, draw_set,
                      exact_posterior_draw, run_chain)
from scalemix.oracle import grid_posterior_expectations

DATA_1D = RegressionData(np.array([[0.3], [1.9]]), np.ones((2, 1)), 1.0)


def test_exact_case_checks():
    with pytest.raises(UnsupportedCaseError, match="n = p \\+ d"):
        draw_set(RegressionData(np.ones((3, 1)) * [[1], [2], [4]], np.ones((3, 1)), 1.0),
                 Gamma(2, 2), 10, 0)
    with pytest.raises(UnsupportedCaseError, match="a = "):
        draw_set(RegressionData([[0.3], [1.9]], np.ones((2, 1)), 1.5), Gamma(2, 2), 10, 0)
    with pytest.raises(UnsupportedCaseError, match="condition M"):
        draw_set(DATA_1D, ShiftedPareto(1.0, 0.4), 10, 0)


def test_exact_draw_and_seeding():
    state = exact_posterior_draw(DATA_1D, LogNormal(0, 1), np.random.default_rng(0))
    assert state.sigma[0, 0] > 0
    a = draw_set(DATA_1D, Gamma(2, 2), 50, seed=3)
    b = draw_set(DATA_1D, Gamma(2, 2), 50, seed=3)
    np.testing.assert_array_equal(a.flat(), b.flat())
    assert a.count == 50 and len(a.draws) == 50


@pytest.mark.slow
@pytest.mark.parametrize("h", [Gamma(2.0, 2.0), InvertedGamma(2.0, 1.0)], ids=lambda h: h.family)
def test_exact_sampler_matches_grid_quadrature(h):
    # smooth functionals; the posterior moments of beta and sigma2 are infinite here
    funcs = {
        "atan_beta": lambda b, s: np.arctan(b),
        "s_ratio": lambda b, s: s / (1 + s),
        "atan_beta_sq": lambda b, s: np.arctan(b) ** 2,
    }
    grid = grid_posterior_expectations(DATA_1D, h, funcs)
    assert grid["_edge"] < 1e-6
    draws = draw_set(DATA_1D, h, 400_000, seed=17).flat()
    b, s = draws[:, 0], draws[:, 1]
    for name, f in funcs.items():
        v = f(b, s)
        z = (v.mean() - grid[name]) / (v.std() / np.sqrt(len(v)))
        assert abs(z) < 4, (name, z)


def test_grid_quadrature_needs_scalar_model():
    data = RegressionData(np.ones((3, 2)) + np.eye(3, 2), np.ones((3, 1)), 1.5)
    with pytest.raises(UnsupportedCaseError):
        grid_posterior_expectations(data, Gamma(2, 2), {})


@pytest.mark.slow
def test_moment_check_catches_wrong_dof(monkeypatch):
    # a chain whose Sigma draw uses one extra degree of freedom must be flagged
    h = InvertedGamma(2.0, 1.0)
    oracle = draw_set(DATA_1D, h, 60_000, seed=99)
    cfg = ChainConfig(DATA_1D, h, 60_000, burn_in=500, seed=1)
    good = compare_moments(run_chain(cfg, backend="python"), oracle, transform=np.arctan)
    assert good.max_abs_z < 4
    true_dof = RegressionData.iw_dof
    monkeypatch.setattr(RegressionData, "iw_dof", property(lambda self: true_dof.fget(self) + 1))
    bad = compare_moments(run_chain(cfg, backend="python"), oracle, transform=np.arctan)
    assert bad.max_abs_z > 4
    assert "sigma_1_1" in bad.table()


def test_compare_moments_arrays():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4000, 2))
    b = rng.standard_normal((4000, 2))
    cmp = compare_moments(a, b)
    assert cmp.names == ["col_1", "col_2"] and cmp.z_all.shape == (4,)
    assert compare_moments(a, b + 1).max_abs_z > 10
    with pytest.raises(ValueError):
        compare_moments(a, b[:, :1])


def test_self_comparison_is_zero():
    draws = draw_set(DATA_1D, Gamma(2, 2), 2000, seed=4)
    assert compare_moments(draws.flat(), draws).max_abs_z == 0.0
