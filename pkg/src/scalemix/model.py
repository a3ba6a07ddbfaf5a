"""Regression data, parameter states and the basic quantities of the model.

The observation model is ``Y = X beta + eps Sigma^{1/2}`` with rows of
``eps`` drawn from a scale mixture of normals, and the prior on
``(beta, Sigma)`` is proportional to ``|Sigma|^{-a}``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DegenerateWeightsError, InvalidStateError

#: relative singular value cutoff used to decide rank(X : y)
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class RegressionData:
    y: np.ndarray
    X: np.ndarray
    a: float

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        X = np.array(self.X, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 2 or X.ndim != 2:
            raise ValueError("y and X must be matrices")
        if y.shape[0] != X.shape[0]:
            raise ValueError(
                f"y has {y.shape[0]} rows but X has {X.shape[0]}")
        if y.shape[0] < 1 or y.shape[1] < 1 or X.shape[1] < 1:
            raise ValueError("empty data")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise ValueError("data contain non-finite entries")
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"prior exponent a must be positive, got {self.a}")
        y.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "a", float(self.a))

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def d(self):
        return self.y.shape[1]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def iw_dof(self):
        """Degrees of freedom of the inverse Wishart draw, n - p + 2a - d - 1."""
        return self.n - self.p + 2.0 * self.a - self.d - 1.0

    @classmethod
    def jeffreys(cls, y, X):
        """Data with the independence Jeffreys prior a = (d + 1) / 2."""
        y = np.asarray(y, dtype=float)
        d = 1 if y.ndim == 1 else y.shape[1]
        return cls(y, X, (d + 1) / 2)


@dataclass(frozen=True)
class ParameterState:
    beta: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        beta = np.atleast_2d(np.array(self.beta, dtype=float))
        sigma = np.atleast_2d(np.array(self.sigma, dtype=float))
        if sigma.shape[0] != sigma.shape[1] or beta.shape[1] != sigma.shape[0]:
            raise InvalidStateError(
                f"incompatible shapes beta {beta.shape}, sigma {sigma.shape}")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(sigma))):
            raise InvalidStateError("state contains non-finite entries")
        beta.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class ConditionReport:
    n1_holds: bool
    n2_holds: bool
    rank_lambda: int


@dataclass(frozen=True)
class WeightedStats:
    q_inv_diag: np.ndarray
    omega: np.ndarray
    mu: np.ndarray
    scatter: np.ndarray


def cholesky(a, error=InvalidStateError, what="matrix"):
    """Lower Cholesky factor; failure to factor means ``a`` is not SPD."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise error(f"{what} is not symmetric positive definite") from None


def spd_inverse(a, error=InvalidStateError, what="matrix"):
    """Inverse of an SPD matrix through its Cholesky factor."""
    c = cholesky(a, error, what)
    inv = scipy.linalg.cho_solve((c, True), np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


def validate_design(data: RegressionData) -> ConditionReport:
    lam = np.hstack([data.X, data.y])
    sv = np.linalg.svd(lam, compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    return ConditionReport(
        n1_holds=rank == data.p + data.d,
        n2_holds=data.n > data.p + 2 * data.d - 2 * data.a,
        rank_lambda=rank,
    )


def residual_quadratics(state: ParameterState, data: RegressionData) -> np.ndarray:
    """r_i = (y_i - beta^T x_i)^T Sigma^{-1} (y_i - beta^T x_i) for every row."""
    c = cholesky(state.sigma, what="sigma")
    resid = data.y - data.X @ state.beta
    w = scipy.linalg.solve_triangular(c, resid.T, lower=True)
    return np.einsum("ij,ij->j", w, w)


def drift_value(state: ParameterState, data: RegressionData) -> float:
    """The drift function V(beta, Sigma) = sum_i r_i."""
    return float(np.sum(residual_quadratics(state, data)))


def weighted_stats(z, data: RegressionData) -> WeightedStats:
    z = np.asarray(z, dtype=float)
    if z.shape != (data.n,):
        raise ValueError(f"z must have length {data.n}")
    if not np.all(z > 0) or not np.all(np.isfinite(z)):
        raise DegenerateWeightsError("latent weights must be positive and finite")
    xw = data.X * z[:, None]
    gram = data.X.T @ xw
    c = cholesky(gram, DegenerateWeightsError, "X^T Q^{-1} X")
    mu = scipy.linalg.cho_solve((c, True), xw.T @ data.y)
    omega = scipy.linalg.cho_solve((c, True), np.eye(data.p))
    omega = 0.5 * (omega + omega.T)
    # weighted residual form of y^T Q^{-1} y - mu^T Omega^{-1} mu
    e = data.y - data.X @ mu
    scatter = (e * z[:, None]).T @ e
    scatter = 0.5 * (scatter + scatter.T)
    return WeightedStats(q_inv_diag=z, omega=omega, mu=mu, scatter=scatter)


def default_init(data: RegressionData) -> ParameterState:
    """Least squares fit at unit weights, residual covariance plus a 1e-8 ridge."""
    beta, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    e = data.y - data.X @ beta
    sigma = e.T @ e / data.n + 1e-8 * np.eye(data.d)
    return ParameterState(beta, 0.5 * (sigma + sigma.T))
