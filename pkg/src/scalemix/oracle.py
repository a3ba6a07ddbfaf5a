"""Exact posterior sampling when n = p + d and a = (d + 1) / 2.

In that case the latent z are a posteriori iid from h, so one exact draw
is z ~ h followed by the usual Sigma and beta conditional draws.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, interpolate

from .chain import ChainConfig, ChainOutput, flatten_states, run_chain, state_column_names
from .diagnostics import batch_means_se
from .exceptions import UnsupportedCaseError
from .mixing import condition_m_holds
from .model import ParameterState, RegressionData, validate_design
from .sampler import draw_parameters


def check_exact_case(data: RegressionData, h):
    if data.n != data.p + data.d:
        raise UnsupportedCaseError(
            f"exact sampling needs n = p + d, got n = {data.n}, p + d = {data.p + data.d}")
    if data.a != (data.d + 1) / 2:
        raise UnsupportedCaseError(
            f"exact sampling needs a = (d + 1) / 2 = {(data.d + 1) / 2:g}, got a = {data.a:g}")
    if not validate_design(data).n1_holds:
        raise UnsupportedCaseError("exact sampling needs rank(X:y) = p + d")
    if not condition_m_holds(h, data.d):
        raise UnsupportedCaseError(f"exact sampling needs condition M, which fails for {h.family}")


def exact_posterior_draw(data: RegressionData, h, rng) -> ParameterState:
    check_exact_case(data, h)
    z = np.asarray(h.sample_many(rng, data.n), dtype=float)
    return draw_parameters(z, data, rng)


@dataclass
class OracleDrawSet:
    betas: np.ndarray
    sigmas: np.ndarray
    count: int
    seed: int

    @property
    def draws(self):
        return [ParameterState(b, s) for b, s in zip(self.betas, self.sigmas)]

    def flat(self):
        return flatten_states(self.betas, self.sigmas)


def draw_set(data: RegressionData, h, count, seed, backend="auto") -> OracleDrawSet:
    """``count`` iid exact posterior draws from a Generator seeded with ``seed``."""
    check_exact_case(data, h)
    cfg = ChainConfig(data=data, h=h, iterations=count, burn_in=0, seed=seed, algo="oracle")
    out = run_chain(cfg, backend=backend)
    if not out.complete:
        raise RuntimeError(out.error)
    return OracleDrawSet(out.betas, out.sigmas, count, seed)


@dataclass
class MomentComparison:
    names: list
    z_first: np.ndarray
    z_second: np.ndarray

    @property
    def z_all(self):
        return np.concatenate([self.z_first, self.z_second])

    @property
    def max_abs_z(self):
        return float(np.max(np.abs(self.z_all)))

    def table(self):
        lines = [f"{'column':>14} {'z(mean)':>10} {'z(second)':>10}"]
        for name, a, b in zip(self.names, self.z_first, self.z_second):
            lines.append(f"{name:>14} {a:10.3f} {b:10.3f}")
        return "\n".join(lines)


def _zscores(chain_cols, oracle_cols):
    zs = []
    for j in range(chain_cols.shape[1]):
        cm, cse, _ = batch_means_se(chain_cols[:, j])
        o = oracle_cols[:, j]
        om = o.mean()
        ose = o.std(ddof=1) / math.sqrt(len(o))
        se = math.hypot(cse, ose)
        zs.append((cm - om) / se if se > 0 else 0.0)
    return np.array(zs)


def _columns(draws):
    if isinstance(draws, (ChainOutput, OracleDrawSet)):
        return draws.flat()
    return np.asarray(draws, dtype=float)


def compare_moments(chain, oracle, transform=None) -> MomentComparison:
    """z-scores of first and second moments of vec(beta) and vech(Sigma).

    Chain standard errors come from batch means, oracle ones from the iid
    formula. ``chain`` and ``oracle`` may be ChainOutput / OracleDrawSet
    objects or plain (draws x columns) arrays. ``transform`` is applied
    elementwise first; a bounded one such as arctan keeps the comparison
    meaningful when the posterior moments themselves are infinite.
    """
    c = _columns(chain)
    o = _columns(oracle)
    if transform is not None:
        c, o = transform(c), transform(o)
    if c.ndim != 2 or o.ndim != 2 or c.shape[1] != o.shape[1]:
        raise ValueError(f"column mismatch: chain {c.shape}, oracle {o.shape}")
    if isinstance(chain, ChainOutput):
        names = state_column_names(*chain.betas.shape[1:])
    else:
        names = [f"col_{j + 1}" for j in range(c.shape[1])]
    return MomentComparison(names, _zscores(c, o), _zscores(c * c, o * o))


# ---------------------------------------------------------------------------
# brute-force quadrature check for d = p = 1

GRID = 400
PHI_MAX = 30.0


def _log_error_kernel(h):
    """log g(q) with g(q) = int sqrt(u / 2 pi) exp(-u q / 2) h(u) du, as a function of log q.

    The normal error density with precision u / sigma2 mixed over h is
    sigma^-1 g(e^2 / sigma2). Tabulated by the trapezoid rule on a log-u
    grid, interpolated by a cubic spline in log q and continued linearly
    past the table.
    """
    t = np.linspace(-90.0, 90.0, 18001)
    u = np.exp(t)
    with np.errstate(divide="ignore"):
        lh = np.asarray(h.log_density(u), dtype=float)
    base = 1.5 * t - 0.5 * math.log(2 * math.pi) + lh
    lq = np.linspace(-70.0, 70.0, 1401)
    out = np.empty_like(lq)
    for k, l in enumerate(lq):
        f = base - 0.5 * u * math.exp(l)
        m = np.max(f)
        out[k] = m + math.log(integrate.trapezoid(np.exp(f - m), t))
    spline = interpolate.CubicSpline(lq, out)
    slope = (out[-1] - out[-2]) / (lq[-1] - lq[-2])

    def log_g(q):
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            lqq = np.log(q)
        res = spline(np.clip(lqq, lq[0], lq[-1]))
        return np.where(lqq > lq[-1], out[-1] + slope * (lqq - lq[-1]), res)

    return log_g


def grid_posterior_expectations(data: RegressionData, h, functionals, grid=GRID):
    """Posterior expectations of ``functionals`` by the trapezoid rule on a grid.

    Only for d = p = 1. Works from the marginal error density (the
    latent scale integrated out numerically), so it shares no code with
    the samplers. ``functionals`` maps names to vectorized f(beta, sigma2).
    The beta axis is beta_hat + scale * sinh(phi), which turns polynomial
    posterior tails into exponential ones; the second axis is log sigma2.
    """
    if data.d != 1 or data.p != 1:
        raise UnsupportedCaseError("grid quadrature is only for d = p = 1")
    x = data.X[:, 0]
    y = data.y[:, 0]
    log_g = _log_error_kernel(h)

    bhat = float(np.sum(x * y) / np.sum(x * x))
    resid = y - bhat * x
    s2hat = max(float(np.mean(resid ** 2)), 1e-8)
    scale = math.sqrt(s2hat / np.sum(x * x))
    th = np.linspace(-PHI_MAX, PHI_MAX, grid)
    bs = bhat + scale * np.sinh(th)
    jac = scale * np.cosh(th)
    ls2 = np.linspace(math.log(s2hat) - 40.0, math.log(s2hat) + 40.0, grid)
    s2 = np.exp(ls2)

    e2 = (y[None, :] - bs[:, None] * x[None, :]) ** 2
    logpost = np.zeros((grid, grid))
    for i in range(data.n):
        q = e2[:, i][:, None] / s2[None, :]
        logpost += log_g(q) - 0.5 * ls2[None, :]
    # prior sigma2^-a, measure d(log sigma2) = dsigma2 / sigma2, measure dbeta = jac dtheta
    logpost += (1 - data.a) * ls2[None, :] + np.log(jac)[:, None]
    w = np.exp(logpost - logpost.max())

    def integral(vals):
        return integrate.trapezoid(integrate.trapezoid(vals, ls2, axis=1), th)

    mass = integral(w)
    bb, ss = np.meshgrid(bs, s2, indexing="ij")
    out = {name: float(integral(w * f(bb, ss)) / mass) for name, f in functionals.items()}
    out["_edge"] = float(max(w[:, 0].max(), w[:, -1].max(), w[0].max(), w[-1].max()))
    return out
