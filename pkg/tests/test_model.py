import numpy as np
import pytest

from scalemix import (DegenerateWeightsError, InvalidStateError, ParameterState,
                      RegressionData, drift_value, residual_quadratics, validate_design,
                      weighted_stats)
from scalemix.model import default_init

from conftest import make_data


def test_vectors_become_columns():
    data = RegressionData([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], 1.0)
    assert (data.n, data.p, data.d) == (3, 1, 1)
    assert data.iw_dof == 3 - 1 + 2 - 1 - 1
    with pytest.raises(ValueError):
        data.y[0, 0] = 5.0


@pytest.mark.parametrize("y,X,a", [
    (np.ones((3, 1)), np.ones((4, 1)), 1.0),
    (np.array([[np.nan], [1.0]]), np.ones((2, 1)), 1.0),
    (np.ones((3, 1)), np.ones((3, 1)), 0.0),
    (np.ones((3, 1)), np.ones((3, 1)), np.inf),
])
def test_invalid_data(y, X, a):
    with pytest.raises(ValueError):
        RegressionData(y, X, a)


def test_jeffreys_exponent():
    assert RegressionData.jeffreys(np.ones((5, 3)), np.ones((5, 1))).a == 2.0
    assert RegressionData.jeffreys(np.ones(5), np.ones((5, 1))).a == 1.0


def test_validate_design():
    data = make_data(10, 2, 2, seed=1)
    report = validate_design(data)
    assert report.n1_holds and report.n2_holds and report.rank_lambda == 4
    X = data.X.copy()
    collinear = RegressionData(np.column_stack([X[:, 1] * 2, data.y[:, 1]]), X, 1.5)
    assert not validate_design(collinear).n1_holds
    tiny = RegressionData(np.random.default_rng(0).standard_normal((4, 3)), np.ones((4, 1)), 0.5)
    # n = 4 is not above p + 2d - 2a = 6
    assert not validate_design(tiny).n2_holds


def test_residual_quadratics_and_drift():
    data = make_data(9, 2, 3, seed=2)
    state = default_init(data)
    e = data.y - data.X @ state.beta
    expected = np.einsum("ij,jk,ik->i", e, np.linalg.inv(state.sigma), e)
    np.testing.assert_allclose(residual_quadratics(state, data), expected, rtol=1e-10)
    assert drift_value(state, data) == pytest.approx(expected.sum())


def test_weighted_stats_against_normal_equations():
    data = make_data(11, 3, 2, seed=4)
    z = np.random.default_rng(1).gamma(2.0, 1.0, size=11)
    st = weighted_stats(z, data)
    Q = np.diag(z)
    gram = data.X.T @ Q @ data.X
    mu = np.linalg.solve(gram, data.X.T @ Q @ data.y)
    scatter = data.y.T @ Q @ data.y - mu.T @ gram @ mu
    np.testing.assert_allclose(st.mu, mu, rtol=1e-10)
    np.testing.assert_allclose(st.omega, np.linalg.inv(gram), rtol=1e-10)
    np.testing.assert_allclose(st.scatter, scatter, rtol=1e-8, atol=1e-10)


def test_weighted_stats_rejects_bad_weights():
    data = make_data(6, 2, 1, seed=0)
    with pytest.raises(DegenerateWeightsError):
        weighted_stats(np.r_[np.ones(5), 0.0], data)
    with pytest.raises(ValueError):
        weighted_stats(np.ones(5), data)


def test_parameter_state_validation():
    with pytest.raises(InvalidStateError):
        ParameterState(np.zeros((2, 2)), np.eye(3))
    with pytest.raises(InvalidStateError):
        ParameterState(np.zeros((1, 1)), [[np.inf]])
    with pytest.raises(InvalidStateError):
        residual_quadratics(ParameterState(np.zeros((1, 1)), [[-1.0]]),
                            RegressionData(np.ones((2, 1)), np.ones((2, 1)), 1.0))


def test_design_boundaries():
    g = np.random.default_rng(0)
    X = g.standard_normal((4, 2))
    report = validate_design(RegressionData(g.standard_normal((4, 2)), X, 1.5))
    assert report.n1_holds and report.n2_holds
    col = g.standard_normal(5)
    dup = RegressionData(g.standard_normal((5, 1)), np.column_stack([col, col]), 1.0)
    assert not validate_design(dup).n1_holds
    # n = p + 2d - 2a exactly
    edge = RegressionData(g.standard_normal((2, 1)), g.standard_normal((2, 1)), 0.5)
    assert not validate_design(edge).n2_holds


def test_residual_quadratic_examples():
    data = RegressionData([[1.0], [3.0]], [[1.0], [1.0]], 1.0)
    state = ParameterState([[2.0]], [[4.0]])
    np.testing.assert_allclose(residual_quadratics(state, data), [0.25, 0.25])
    assert drift_value(state, data) == pytest.approx(0.5)
    assert drift_value(ParameterState([[2.0]], [[12.0]]), data) == pytest.approx(0.5 / 3)
    multi = make_data(7, 2, 3, seed=5)
    zero = ParameterState(np.zeros((2, 3)), np.eye(3))
    np.testing.assert_allclose(residual_quadratics(zero, multi), np.sum(multi.y ** 2, axis=1))
    beta = np.ones((2, 3))
    exact = RegressionData(multi.X @ beta, multi.X, 2.0)
    sigma = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.1], [0.0, 0.1, 3.0]])
    assert drift_value(ParameterState(beta, sigma), exact) == pytest.approx(0.0, abs=1e-20)


def test_weighted_stats_examples():
    data = make_data(9, 3, 2, seed=8)
    ones = weighted_stats(np.ones(9), data)
    ols, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    np.testing.assert_allclose(ones.mu, ols, rtol=1e-10)
    np.testing.assert_allclose(ones.omega, np.linalg.inv(data.X.T @ data.X), rtol=1e-10)
    z = np.random.default_rng(2).gamma(3.0, 1.0, size=9)
    base, scaled = weighted_stats(z, data), weighted_stats(4.0 * z, data)
    np.testing.assert_allclose(scaled.mu, base.mu, rtol=1e-10)
    np.testing.assert_allclose(scaled.omega, base.omega / 4.0, rtol=1e-10)
    np.testing.assert_allclose(scaled.scatter, 4.0 * base.scatter, rtol=1e-10)
    square = make_data(5, 3, 2, seed=9)   # n = p + d
    assert np.all(np.linalg.eigvalsh(weighted_stats(z[:5], square).scatter) > 0)
