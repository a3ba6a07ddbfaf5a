"""Haar PX-DA: the DA transition plus a global rescaling of the latent z.

After ``z'`` is drawn, ``v ~ xi(.; z')`` with

    xi(v; z') proportional to v^(n + (d+1-2a)d/2 - 1) prod_i h(v z'_i)

and the parameter draws use ``z = v z'``.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from .exceptions import ConditionUnknownError, NotIntegrableError
from .gig import sample_gig
from .mixing import GIG, Gamma, InvertedGamma, Scaled, moment_finite
from .model import residual_quadratics
from .sampler import draw_latent, draw_parameters

GRID_NODES = 4096
#: log-density drop treated as negligible mass when bracketing xi
_BRACKET_DROP = 50.0
_MAX_DOUBLINGS = 1000


class ConditionStatus(enum.Enum):
    HOLDS = "Holds"
    HOLDS_VIA_SUFFICIENT = "HoldsViaSufficient"
    UNKNOWN = "Unknown"

    @property
    def ok(self):
        return self is not ConditionStatus.UNKNOWN


def moment_order(d, a):
    """(d + 1 - 2a) d / 2, the moment order in the sufficient condition."""
    return (d + 1 - 2 * a) * d / 2


def condition_h_check(h, n, d, a):
    """Whether the xi density is known to be integrable for almost all z."""
    if a == (d + 1) / 2:
        return ConditionStatus.HOLDS
    if moment_finite(h, moment_order(d, a)):
        return ConditionStatus.HOLDS_VIA_SUFFICIENT
    return ConditionStatus.UNKNOWN


@dataclass(frozen=True)
class XiParams:
    z: np.ndarray
    n: int
    d: int
    a: float
    h: object

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (self.n,) or not np.all(z > 0):
            raise ValueError("xi needs a positive latent vector of length n")
        object.__setattr__(self, "z", z)

    @property
    def exponent(self):
        return self.n + moment_order(self.d, self.a) - 1


def _xi_exact(h, z, n, d, a, rng):
    k = moment_order(d, a)
    if isinstance(h, Gamma):
        return rng.standard_gamma(n * h.alpha + k) / (h.gamma * np.sum(z))
    if isinstance(h, InvertedGamma):
        return h.gamma * np.sum(1 / z) / rng.standard_gamma(n * h.alpha - k)
    if isinstance(h, GIG):
        return sample_gig(n * h.v + k, h.a * np.sum(z), h.b * np.sum(1 / z), rng)
    if isinstance(h, Scaled):
        return _xi_exact(h.inner, z / h.scale, n, d, a, rng)
    return None


def has_exact_xi(h):
    if isinstance(h, Scaled):
        return has_exact_xi(h.inner)
    return isinstance(h, (Gamma, InvertedGamma, GIG))


def _log_xi_t(params):
    """log density of t = log v, up to a constant."""
    z, h = params.z, params.h
    power = params.exponent + 1

    def f(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        v = np.exp(t)
        with np.errstate(invalid="ignore"):
            out = power * t + np.sum(np.asarray(h.log_density(np.outer(v, z))), axis=1)
        return np.where(np.isnan(out), -np.inf, out)

    return f


def xi_grid(params):
    """(t nodes, normalized CDF) of log V on an adaptive grid."""
    f = _log_xi_t(params)
    step = math.log(2.0)
    js = np.arange(-8, 9)
    vals = f(js * step)
    lo, hi = -8, 8
    while True:
        peak = np.max(vals)
        if np.isfinite(peak):
            left_ok = vals[0] < peak - _BRACKET_DROP
            right_ok = vals[-1] < peak - _BRACKET_DROP
            if left_ok and right_ok:
                break
        else:
            left_ok = right_ok = False
        if lo <= -_MAX_DOUBLINGS or hi >= _MAX_DOUBLINGS:
            raise NotIntegrableError(
                "xi does not decay on the search bracket, it may not be integrable")
        if not left_ok:
            new = np.arange(lo - 8, lo)
            vals = np.concatenate([f(new * step), vals])
            lo -= 8
        if not right_ok:
            new = np.arange(hi + 1, hi + 9)
            vals = np.concatenate([vals, f(new * step)])
            hi += 8

    t_all = np.arange(lo, hi + 1) * step
    keep = np.nonzero(vals >= peak - _BRACKET_DROP)[0]
    ta = t_all[max(keep[0] - 1, 0)]
    tb = t_all[min(keep[-1] + 1, len(t_all) - 1)]
    for _ in range(2):
        t = np.linspace(ta, tb, GRID_NODES)
        g = f(t)
        peak = np.max(g)
        keep = np.nonzero(g >= peak - _BRACKET_DROP)[0]
        na, nb = t[max(keep[0] - 1, 0)], t[min(keep[-1] + 1, len(t) - 1)]
        if nb - na > 0.5 * (tb - ta):
            break
        ta, tb = na, nb
    dens = np.exp(g - peak)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
    if not (np.isfinite(cdf[-1]) and cdf[-1] > 0):
        raise NotIntegrableError("xi has no mass on its grid")
    return t, cdf / cdf[-1]


def _xi_grid_draw(params, rng, size):
    t, cdf = xi_grid(params)
    inc = np.concatenate([[True], np.diff(cdf) > 0])
    inv = PchipInterpolator(cdf[inc], t[inc])
    if size is None:
        return math.exp(float(inv(rng.random())))
    return np.exp(inv(rng.random(size)))


def sample_xi(params: XiParams, rng, method="auto", size=None):
    """Draw the rescaling factor v; ``size`` draws share one z (and one grid)."""
    if method in ("auto", "exact"):
        if has_exact_xi(params.h):
            if size is None:
                return _xi_exact(params.h, params.z, params.n, params.d, params.a, rng)
            return np.array([_xi_exact(params.h, params.z, params.n, params.d, params.a, rng)
                             for _ in range(size)])
        if method == "exact":
            raise ValueError(f"no closed-form xi sampler for {params.h.family}")
    elif method != "grid":
        raise ValueError(f"unknown method {method!r}")
    return _xi_grid_draw(params, rng, size)


def require_condition(h, n, d, a):
    status = condition_h_check(h, n, d, a)
    if not status.ok:
        raise ConditionUnknownError(
            "PX-DA unavailable: integrability of the rescaling density xi(v; z) "
            f"could not be established for {h.family} (its moment of order "
            f"{moment_order(d, a):g} is not known to be finite)")
    return status


def pxda_step(state, data, h, rng, v=None):
    """One Haar PX-DA iteration; ``v`` overrides the rescaling draw."""
    require_condition(h, data.n, data.d, data.a)
    r = residual_quadratics(state, data)
    z1 = draw_latent(h, data.d, r, rng)
    if v is None:
        v = sample_xi(XiParams(z1, data.n, data.d, data.a, h), rng)
    z = v * z1
    return draw_parameters(z, data, rng), z
