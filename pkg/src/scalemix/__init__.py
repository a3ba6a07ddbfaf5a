"""Bayesian multivariate regression with scale-mixture-of-normal errors.

Data augmentation and Haar PX-DA Gibbs samplers, an exact sampler for the
solvable special case, a sufficient-condition certifier for geometric
ergodicity, and batch-means output analysis.
"""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .certify import (Certificate, certify, certify_mixture, certify_pxda,
                      empirical_drift_fit)
from .chain import ChainConfig, ChainOutput, run_chain
from .diagnostics import autocorrelation, batch_means_se, effective_sample_size
from .exceptions import (ConditionUnknownError, ConfigError, DegenerateWeightsError,
                         InvalidStateError, NotIntegrableError, ParameterError,
                         RatioInfiniteError, ScaleMixError, UnsupportedCaseError,
                         UnsupportedDegenerateError)
from .mixing import (F, GIG, Beta, FasterThanPolynomial, FiniteMixture, Frechet, Gamma,
                     InvertedGamma, LogNormal, MixingDensity, Polynomial, PsiParams,
                     Scaled, ShiftedPareto, Truncated, Weibull, ZeroNearOrigin,
                     condition_m_holds, key_ratio, lambda_h, log_density, origin_class,
                     sample_h, sample_psi)
from .model import (ConditionReport, ParameterState, RegressionData, WeightedStats,
                    drift_value, residual_quadratics, validate_design, weighted_stats)
from .mvdist import (InverseWishartParams, MatrixNormalParams, logpdf_inverse_wishart,
                     logpdf_matrix_normal, sample_inverse_wishart, sample_matrix_normal)
from .oracle import OracleDrawSet, compare_moments, draw_set, exact_posterior_draw
from .pxda import XiParams, condition_h_check, pxda_step, sample_xi
from .sampler import da_step
