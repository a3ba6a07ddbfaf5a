"""Matrix normal and inverse Wishart distributions.

``IW_r(m, Theta)`` has density proportional to
``|w|^{-(m+r+1)/2} exp(-tr(Theta^{-1} w^{-1}) / 2)``, i.e. ``W^{-1}`` is
Wishart with ``m`` degrees of freedom and scale ``Theta``.  Textbook
inverse Wishart code calls ``Theta^{-1}`` the scale; here ``Theta`` is
passed exactly as it appears in the Gibbs step.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from .exceptions import ParameterError
from .model import cholesky, spd_inverse


@dataclass(frozen=True)
class MatrixNormalParams:
    theta: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        r, c = theta.shape
        if A.shape != (r, r) or B.shape != (c, c):
            raise ParameterError(
                f"shapes theta {theta.shape}, A {A.shape}, B {B.shape} do not agree")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class InverseWishartParams:
    m: float
    theta_mat: np.ndarray

    def __post_init__(self):
        theta = np.atleast_2d(np.asarray(self.theta_mat, dtype=float))
        r = theta.shape[0]
        if theta.shape != (r, r):
            raise ParameterError("Theta must be square")
        if not (np.isfinite(self.m) and self.m > r - 1):
            raise ParameterError(f"inverse Wishart needs m > r - 1 = {r - 1}, got {self.m}")
        object.__setattr__(self, "theta_mat", theta)
        object.__setattr__(self, "m", float(self.m))

    @property
    def r(self):
        return self.theta_mat.shape[0]


def sample_matrix_normal(params: MatrixNormalParams, rng):
    """theta + L_A G L_B^T with G filled row by row from standard normals."""
    la = cholesky(params.A, ParameterError, "row covariance A")
    lb = cholesky(params.B, ParameterError, "column covariance B")
    g = rng.standard_normal(params.theta.shape)
    return params.theta + la @ g @ lb.T


def logpdf_matrix_normal(params: MatrixNormalParams, z):
    la = cholesky(params.A, ParameterError, "row covariance A")
    lb = cholesky(params.B, ParameterError, "column covariance B")
    r, c = params.theta.shape
    e = np.asarray(z, dtype=float).reshape(r, c) - params.theta
    # tr(A^{-1} E B^{-1} E^T) = ||L_A^{-1} E L_B^{-T}||_F^2
    w = np.linalg.solve(la, e)
    w = np.linalg.solve(lb, w.T).T
    logdet_a = 2 * np.sum(np.log(np.diag(la)))
    logdet_b = 2 * np.sum(np.log(np.diag(lb)))
    return float(-0.5 * r * c * math.log(2 * math.pi) - 0.5 * c * logdet_a
                 - 0.5 * r * logdet_b - 0.5 * np.sum(w * w))


def bartlett_factor(m, r, rng):
    """Lower-triangular A with A A^T ~ Wishart_r(m, I); m may be fractional.

    The diagonal is drawn first (chi with m - i degrees of freedom via a
    gamma variate), then the strict lower triangle row by row.
    """
    a = np.zeros((r, r))
    for i in range(r):
        a[i, i] = math.sqrt(2.0 * rng.standard_gamma(0.5 * (m - i)))
    rows, cols = np.tril_indices(r, -1)
    a[rows, cols] = rng.standard_normal(len(rows))
    return a


def sample_inverse_wishart(params: InverseWishartParams, rng):
    lt = cholesky(params.theta_mat, ParameterError, "Theta")
    a = bartlett_factor(params.m, params.r, rng)
    la = lt @ a
    w = la @ la.T
    return spd_inverse(0.5 * (w + w.T), ParameterError, "Wishart draw")


def logpdf_inverse_wishart(params: InverseWishartParams, w):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    r, m = params.r, params.m
    try:
        lw = np.linalg.cholesky(w)
    except np.linalg.LinAlgError:
        return -math.inf
    lt = cholesky(params.theta_mat, ParameterError, "Theta")
    logdet_w = 2 * np.sum(np.log(np.diag(lw)))
    logdet_t = 2 * np.sum(np.log(np.diag(lt)))
    # tr(Theta^{-1} w^{-1}) = ||L_W^{-1} L_T^{-T}||_F^2
    k = np.linalg.solve(lw, np.linalg.inv(lt).T)
    tr = np.sum(k * k)
    log_norm = (0.5 * m * r * math.log(2.0) + special.multigammaln(0.5 * m, r)
                + 0.5 * m * logdet_t)
    return float(-0.5 * (m + r + 1) * logdet_w - 0.5 * tr - log_norm)
