import numpy as np
import pytest
from scipy import stats

from scalemix import (GIG, ChainConfig, ConditionUnknownError, Gamma, InvertedGamma,
                      LogNormal, NotIntegrableError, ParameterError, ParameterState,
                      RegressionData, ShiftedPareto, UnsupportedCaseError, _backend,
                      autocorrelation, da_step, pxda_step, run_chain)
from scalemix.chain import check_preconditions, state_column_names
from scalemix.pxda import (ConditionStatus, XiParams, condition_h_check, moment_order,
                           sample_xi, xi_grid)

from conftest import make_data

compiled = pytest.mark.skipif(_backend._kernels is None, reason="compiled extension not built")


def test_da_step_returns_valid_state(small_data, rng):
    state = ChainConfig(small_data, Gamma(2, 2), 10).initial_state()
    for _ in range(20):
        state, z = da_step(state, small_data, LogNormal(0.0, 0.5), rng)
    assert z.shape == (small_data.n,) and np.all(z > 0)
    assert np.all(np.linalg.eigvalsh(state.sigma) > 0)


def test_pxda_with_unit_rescaling_is_da(small_data):
    h = Gamma(3.0, 2.0)
    state = ChainConfig(small_data, h, 10).initial_state()
    a, za = da_step(state, small_data, h, np.random.default_rng(5))
    b, zb = pxda_step(state, small_data, h, np.random.default_rng(5), v=1.0)
    np.testing.assert_array_equal(za, zb)
    np.testing.assert_array_equal(a.beta, b.beta)


def test_pxda_guard():
    data = make_data(12, 2, 2, a=0.5, seed=1)
    # moment order (d + 1 - 2a) d / 2 = 2 is infinite for shifted Pareto with gamma = 1.5
    with pytest.raises(ConditionUnknownError, match="integrability"):
        pxda_step(ChainConfig(data, ShiftedPareto(1.0, 1.5), 5).initial_state(), data,
                  ShiftedPareto(1.0, 1.5), np.random.default_rng(0))


def test_condition_status():
    assert moment_order(2, 1.5) == 0.0
    assert condition_h_check(ShiftedPareto(1, 1.5), 10, 2, 1.5) is ConditionStatus.HOLDS
    assert condition_h_check(ShiftedPareto(1, 2.5), 10, 2, 0.5) is \
        ConditionStatus.HOLDS_VIA_SUFFICIENT
    assert condition_h_check(ShiftedPareto(1, 1.5), 10, 2, 0.5) is ConditionStatus.UNKNOWN
    assert not ConditionStatus.UNKNOWN.ok


@pytest.mark.parametrize("h,a", [(Gamma(2.0, 2.0), 1.5), (Gamma(2.0, 2.0), 0.7),
                                 (InvertedGamma(3.0, 1.0), 1.0), (GIG(0.4, 1.0, 3.0), 1.5)])
def test_xi_grid_matches_closed_form(h, a):
    rng = np.random.default_rng(9)
    xp = XiParams(rng.gamma(2.0, 0.5, size=15), 15, 2, a, h)
    exact = sample_xi(xp, rng, method="exact", size=8000)
    grid = sample_xi(xp, rng, method="grid", size=8000)
    assert stats.ks_2samp(exact, grid).pvalue > 0.001


def test_xi_grid_without_closed_form():
    rng = np.random.default_rng(1)
    xp = XiParams(rng.lognormal(size=8), 8, 1, 1.0, LogNormal(0.0, 1.0))
    v = sample_xi(xp, rng, size=2000)
    assert np.all(v > 0) and np.isfinite(v).all()
    with pytest.raises(ValueError):
        sample_xi(xp, rng, method="exact")
    t, cdf = xi_grid(xp)
    assert cdf[0] == 0.0 and cdf[-1] == 1.0 and np.all(np.diff(cdf) >= 0)


def test_xi_non_integrable_is_reported():
    # exponent n + k - 1 with k = -4 and a density flat enough that v^(power) h(v z) never decays
    xp = XiParams(np.ones(1), 1, 2, 2.5, ShiftedPareto(1.0, 0.1))
    with pytest.raises(NotIntegrableError):
        xi_grid(xp)


def test_xi_params_validation():
    with pytest.raises(ValueError):
        XiParams(np.array([1.0, -1.0]), 2, 1, 1.0, Gamma(1, 1))


def test_pxda_mixes_no_worse_than_da():
    # lag-1 autocorrelation of log sigma_11, averaged over seeds
    data = make_data(15, 2, 2, seed=6)
    h = Gamma(3.0, 3.0)
    rho = {}
    for algo in ("da", "pxda"):
        vals = []
        for seed in range(8):
            out = run_chain(ChainConfig(data, h, 6000, seed=seed, algo=algo))
            vals.append(autocorrelation(np.log(out.sigmas[:, 0, 0]), 1)[1])
        rho[algo] = np.array(vals)
    se = np.std(rho["pxda"] - rho["da"], ddof=1) / np.sqrt(8)
    assert rho["pxda"].mean() <= rho["da"].mean() + 3 * se


def test_chain_config_validation(small_data):
    h = Gamma(2, 2)
    assert ChainConfig(small_data, h, 100).burn_in == 10
    assert ChainConfig(small_data, h, 100, burn_in=4, thin=3).recorded == 32
    for kwargs in ({"burn_in": 100}, {"thin": 0}, {"seed": -1}, {"algo": "gibbs"},
                   {"init": "random"}):
        with pytest.raises(ParameterError):
            ChainConfig(small_data, h, 100, **kwargs)
    with pytest.raises(ParameterError):
        ChainConfig(small_data, h, 0)


def test_recording_and_columns(small_data):
    cfg = ChainConfig(small_data, Gamma(2, 2), 50, burn_in=5, thin=4, keep_latent=True)
    out = run_chain(cfg, backend="python")
    assert len(out) == cfg.recorded == 11
    np.testing.assert_array_equal(out.iteration_index, 5 + 4 * np.arange(1, 12))
    assert out.latent_trace.shape == (11, small_data.n)
    assert out.column_names() == ["beta_1_1", "beta_2_1", "beta_1_2", "beta_2_2",
                                  "sigma_1_1", "sigma_2_1", "sigma_2_2"]
    flat = out.flat()
    np.testing.assert_array_equal(flat[:, 1], out.betas[:, 1, 0])
    np.testing.assert_array_equal(flat[:, 5], out.sigmas[:, 1, 0])
    assert state_column_names(1, 1) == ["beta_1_1", "sigma_1_1"]


def test_chain_uses_given_initial_state(small_data):
    init = ParameterState(np.zeros((2, 2)), np.eye(2) * 50)
    a = run_chain(ChainConfig(small_data, Gamma(2, 2), 3, burn_in=0, init=init), backend="python")
    b = run_chain(ChainConfig(small_data, Gamma(2, 2), 3, burn_in=0), backend="python")
    assert not np.allclose(a.betas[0], b.betas[0])


def test_preconditions():
    data = make_data(10, 2, 2, seed=0)
    X = data.X
    collinear = RegressionData(np.column_stack([X[:, 1], X[:, 1] + 1]), X, 1.5)
    with pytest.raises(UnsupportedCaseError, match="rank"):
        check_preconditions(collinear, Gamma(2, 2), "da")
    with pytest.raises(UnsupportedCaseError, match="condition M"):
        check_preconditions(data, ShiftedPareto(1.0, 0.8), "da")
    small = RegressionData(data.y[:4], X[:4], 0.6)
    with pytest.raises(UnsupportedCaseError, match="must exceed"):
        check_preconditions(small, Gamma(2, 2), "da")
    with pytest.raises(UnsupportedCaseError, match="n = p \\+ d"):
        check_preconditions(data, Gamma(2, 2), "oracle")


@compiled
@pytest.mark.parametrize("h", [Gamma(2.0, 1.5), InvertedGamma(2.5, 1.0), GIG(-0.5, 1.0, 2.0)],
                         ids=lambda h: h.family)
@pytest.mark.parametrize("algo", ["da", "pxda"])
def test_backends_agree(h, algo):
    data = make_data(14, 3, 2, seed=12)
    cfg = ChainConfig(data, h, 300, burn_in=20, seed=4, algo=algo, keep_latent=True)
    py = run_chain(cfg, backend="python")
    cc = run_chain(cfg, backend="compiled")
    assert py.backend == "python" and cc.backend == "compiled"
    np.testing.assert_allclose(cc.betas, py.betas, rtol=1e-9, atol=1e-10)
    np.testing.assert_allclose(cc.sigmas, py.sigmas, rtol=1e-9, atol=1e-10)
    np.testing.assert_allclose(cc.drift_trace, py.drift_trace, rtol=1e-9)
    np.testing.assert_allclose(cc.latent_mean, py.latent_mean, rtol=1e-9)
    np.testing.assert_allclose(cc.latent_trace, py.latent_trace, rtol=1e-9)


@compiled
def test_backends_agree_for_oracle_draws():
    data = RegressionData([[0.3], [1.9]], np.ones((2, 1)), 1.0)
    cfg = ChainConfig(data, InvertedGamma(2, 1), 200, burn_in=0, algo="oracle")
    np.testing.assert_allclose(run_chain(cfg, backend="compiled").flat(),
                               run_chain(cfg, backend="python").flat(), rtol=1e-9)


def test_compiled_backend_refuses_other_families(small_data):
    with pytest.raises(UnsupportedCaseError):
        run_chain(ChainConfig(small_data, LogNormal(0, 1), 10), backend="compiled")
    with pytest.raises(ValueError):
        run_chain(ChainConfig(small_data, LogNormal(0, 1), 10), backend="gpu")


def test_same_seed_same_chain(small_data):
    cfg = ChainConfig(small_data, LogNormal(0, 1), 40, seed=123, algo="pxda")
    np.testing.assert_array_equal(run_chain(cfg).flat(), run_chain(cfg).flat())


def test_latent_draws_follow_gamma_conditional():
    data = make_data(10, 2, 2, seed=2)
    nu = 5.0
    h = Gamma(nu / 2, nu / 2)
    state = ChainConfig(data, h, 10).initial_state()
    from scalemix import residual_quadratics
    r1 = residual_quadratics(state, data)[0]
    rng = np.random.default_rng(21)
    z1 = [da_step(state, data, h, rng)[1][0] for _ in range(5000)]
    ref = stats.gamma(nu / 2 + 1.0, scale=1 / (nu / 2 + r1 / 2))
    assert stats.kstest(z1, ref.cdf).pvalue > 0.001


def test_da_step_is_seeded(small_data):
    state = ChainConfig(small_data, Gamma(2, 2), 10).initial_state()
    a, _ = da_step(state, small_data, Gamma(2, 2), np.random.default_rng(3))
    b, _ = da_step(state, small_data, Gamma(2, 2), np.random.default_rng(3))
    np.testing.assert_array_equal(a.sigma, b.sigma)
    assert a.beta.shape == (2, 2)


def test_recorded_count_example(small_data):
    out = run_chain(ChainConfig(small_data, Gamma(2, 2), 100, burn_in=50, thin=5))
    assert len(out) == 10


def test_gamma_xi_examples():
    rng = np.random.default_rng(14)
    z = rng.gamma(2.0, 1.0, size=6)
    h = Gamma(1.5, 2.0)
    xp = XiParams(z, 6, 2, 1.5, h)
    ref = stats.gamma(6 * 1.5, scale=1 / (2.0 * z.sum()))
    assert stats.kstest(sample_xi(xp, rng, method="grid", size=8000), ref.cdf).pvalue > 0.01
    v = sample_xi(XiParams(np.ones(3), 3, 1, 1.0, Gamma(1, 1)), rng, method="grid", size=20_000)
    assert abs(v.mean() - 1.0) < 3 * v.std() / np.sqrt(len(v))
    v = sample_xi(XiParams(np.ones(1), 1, 1, 1.0, Gamma(1, 1)), rng, method="grid", size=8000)
    assert stats.kstest(v, stats.expon().cdf).pvalue > 0.01


def test_gamma_condition_via_moment():
    assert condition_h_check(Gamma(2.0, 1.0), 10, 2, 2.0) is ConditionStatus.HOLDS_VIA_SUFFICIENT
    assert condition_h_check(Gamma(0.5, 1.0), 10, 2, 2.0) is ConditionStatus.UNKNOWN
