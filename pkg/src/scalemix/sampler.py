"""The data augmentation (DA) Gibbs transition.

One DA iteration draws the latent precisions ``z_i ~ psi(.; r_i)``, then
``Sigma ~ IW_d(n - p + 2a - d - 1, S^{-1})`` with ``S`` the weighted
scatter, then ``beta ~ N_{p,d}(mu, Omega, Sigma)``.
"""

import numpy as np

from .mixing import sample_psi_vector
from .model import ParameterState, residual_quadratics, spd_inverse, weighted_stats
from .mvdist import (InverseWishartParams, MatrixNormalParams,
                     sample_inverse_wishart, sample_matrix_normal)

#: floor on r_i used by the generic (rejection) psi sampler only
R_FLOOR = 1e-12


def draw_latent(h, d, r, rng):
    """z_i ~ psi(.; r_i) independently."""
    return sample_psi_vector(h, d, r, rng, floor=R_FLOOR)


def draw_parameters(z, data, rng):
    """Draw (beta, Sigma) from their conditional given the latent z.

    Shared by the DA and PX-DA transitions and by the exact sampler.
    """
    stats = weighted_stats(z, data)
    theta = spd_inverse(stats.scatter, what="weighted scatter")
    sigma = sample_inverse_wishart(InverseWishartParams(data.iw_dof, theta), rng)
    beta = sample_matrix_normal(MatrixNormalParams(stats.mu, stats.omega, sigma), rng)
    return ParameterState(beta, sigma)


def da_step(state, data, h, rng):
    """One DA iteration; returns the new state and the latent z used."""
    r = residual_quadratics(state, data)
    z = draw_latent(h, data.d, r, rng)
    return draw_parameters(z, data, rng), z
