"""Mixing densities h for scale mixtures of normals.

Every family is a frozen dataclass.  Besides density and sampling, a family
knows how it behaves near the origin (``origin_class``), which of its
upper-tail moments are finite, and, for the conjugate families, how to draw
from

    psi(u; s)  proportional to  u^(d/2) exp(-s u / 2) h(u)

without rejection.  Parametrizations follow the usual rate conventions:
``Gamma(alpha, gamma)`` is proportional to ``w^(alpha-1) exp(-gamma w)``,
``InvertedGamma(alpha, gamma)`` to ``w^(-alpha-1) exp(-gamma / w)`` and
``LogNormal(mu, gamma)`` uses ``gamma`` as the variance of ``log w``.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy import special, stats

from . import quadrature
from .exceptions import ParameterError, RatioInfiniteError, UnsupportedDegenerateError
from .gig import log_bessel_k, log_gig_integral, sample_gig

#: cap on proposals for rejection samplers before giving up
MAX_PROPOSALS = 10_000_000


# ---------------------------------------------------------------------------
# behaviour near the origin


@dataclass(frozen=True)
class ZeroNearOrigin:
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError("ZeroNearOrigin needs delta > 0")


@dataclass(frozen=True)
class Polynomial:
    c: float

    def __post_init__(self):
        if not self.c > -1:
            raise ParameterError("Polynomial origin class needs c > -1")


@dataclass(frozen=True)
class FasterThanPolynomial:
    pass


# ---------------------------------------------------------------------------
# base class


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive, got {value}")
    return float(value)


def _real(name, value):
    if not np.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    return float(value)


class MixingDensity:
    """Common interface of the mixing-density families."""

    family = "abstract"
    support = (0.0, math.inf)

    def log_density(self, u):
        """Normalized log density; -inf outside the support."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(u > 0, self._logpdf(np.where(u > 0, u, 1.0)), -np.inf)
        out = np.where(np.isnan(out), -np.inf, out)
        return out if out.ndim else float(out)

    def _logpdf(self, u):
        raise NotImplementedError

    def sample(self, rng):
        raise NotImplementedError

    def sample_many(self, rng, size):
        return np.array([self.sample(rng) for _ in range(size)])

    def origin_class(self):
        raise NotImplementedError

    def tail_moment_finite(self, k):
        """Whether int_1^inf u^k h(u) du is finite."""
        return True

    #: whether ``isf`` is available for inverse-CDF truncation sampling
    invertible = True

    def sf(self, x):
        return self.dist().sf(x)

    def isf(self, q):
        return self.dist().isf(q)

    def dist(self):
        """The equivalent frozen scipy.stats distribution."""
        raise NotImplementedError

    def _log_moment_exact(self, order, s):
        return None

    psi_closed_form = False

    def _psi_exact(self, d, s, rng):
        return None

    def to_dict(self):
        """Nested dict with ``family`` and parameter entries."""
        raise NotImplementedError


# ---------------------------------------------------------------------------
# polynomial-near-origin families


@dataclass(frozen=True)
class Gamma(MixingDensity):
    alpha: float
    gamma: float
    family = "gamma"
    psi_closed_form = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        a, g = self.alpha, self.gamma
        return a * math.log(g) - special.gammaln(a) + (a - 1) * np.log(u) - g * u

    def sample(self, rng):
        return rng.standard_gamma(self.alpha) / self.gamma

    def sample_many(self, rng, size):
        return rng.standard_gamma(self.alpha, size=size) / self.gamma

    def origin_class(self):
        return Polynomial(self.alpha - 1)

    def dist(self):
        return stats.gamma(self.alpha, scale=1 / self.gamma)

    def _log_moment_exact(self, order, s):
        a, g = self.alpha, self.gamma
        return (a * math.log(g) - special.gammaln(a) + special.gammaln(a + order)
                - (a + order) * math.log(g + 0.5 * s))

    def _psi_exact(self, d, s, rng):
        return rng.standard_gamma(self.alpha + 0.5 * d) / (self.gamma + 0.5 * s)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "gamma": self.gamma}


@dataclass(frozen=True)
class Beta(MixingDensity):
    alpha: float
    gamma: float
    family = "beta"
    support = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        out = ((self.alpha - 1) * np.log(u) + (self.gamma - 1) * np.log1p(-u)
               - special.betaln(self.alpha, self.gamma))
        return np.where(u < 1, out, -np.inf)

    def sample(self, rng):
        return rng.beta(self.alpha, self.gamma)

    def origin_class(self):
        return Polynomial(self.alpha - 1)

    def dist(self):
        return stats.beta(self.alpha, self.gamma)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "gamma": self.gamma}


@dataclass(frozen=True)
class Weibull(MixingDensity):
    """Density proportional to w^(alpha-1) exp(-gamma w^alpha)."""

    alpha: float
    gamma: float
    family = "weibull"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        a, g = self.alpha, self.gamma
        return math.log(a * g) + (a - 1) * np.log(u) - g * u ** a

    def sample(self, rng):
        return (rng.standard_exponential() / self.gamma) ** (1 / self.alpha)

    def origin_class(self):
        return Polynomial(self.alpha - 1)

    def dist(self):
        return stats.weibull_min(self.alpha, scale=self.gamma ** (-1 / self.alpha))

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "gamma": self.gamma}


@dataclass(frozen=True)
class F(MixingDensity):
    nu1: float
    nu2: float
    family = "f"

    def __post_init__(self):
        object.__setattr__(self, "nu1", _positive("nu1", self.nu1))
        object.__setattr__(self, "nu2", _positive("nu2", self.nu2))

    def _logpdf(self, u):
        n1, n2 = self.nu1, self.nu2
        return (0.5 * n1 * math.log(n1 / n2) - special.betaln(0.5 * n1, 0.5 * n2)
                + (0.5 * n1 - 1) * np.log(u) - 0.5 * (n1 + n2) * np.log1p(n1 / n2 * u))

    def sample(self, rng):
        return rng.f(self.nu1, self.nu2)

    def origin_class(self):
        return Polynomial((self.nu1 - 2) / 2)

    def tail_moment_finite(self, k):
        return k < self.nu2 / 2

    def dist(self):
        return stats.f(self.nu1, self.nu2)

    def to_dict(self):
        return {"family": self.family, "nu1": self.nu1, "nu2": self.nu2}


@dataclass(frozen=True)
class ShiftedPareto(MixingDensity):
    """gamma alpha^gamma / (w + alpha)^(gamma + 1) on w > 0."""

    alpha: float
    gamma: float
    family = "shifted_pareto"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        a, g = self.alpha, self.gamma
        return math.log(g) + g * math.log(a) - (g + 1) * np.log(u + a)

    def sample(self, rng):
        return self.alpha * ((1.0 - rng.random()) ** (-1 / self.gamma) - 1)

    def origin_class(self):
        return Polynomial(0.0)

    def tail_moment_finite(self, k):
        return k < self.gamma

    def dist(self):
        return stats.lomax(self.gamma, scale=self.alpha)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "gamma": self.gamma}


# ---------------------------------------------------------------------------
# faster-than-polynomial families


@dataclass(frozen=True)
class InvertedGamma(MixingDensity):
    alpha: float
    gamma: float
    family = "inverted_gamma"
    psi_closed_form = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        a, g = self.alpha, self.gamma
        return a * math.log(g) - special.gammaln(a) - (a + 1) * np.log(u) - g / u

    def sample(self, rng):
        return self.gamma / rng.standard_gamma(self.alpha)

    def sample_many(self, rng, size):
        return self.gamma / rng.standard_gamma(self.alpha, size=size)

    def origin_class(self):
        return FasterThanPolynomial()

    def tail_moment_finite(self, k):
        return k < self.alpha

    def dist(self):
        return stats.invgamma(self.alpha, scale=self.gamma)

    def _log_moment_exact(self, order, s):
        a, g = self.alpha, self.gamma
        return (a * math.log(g) - special.gammaln(a)
                + log_gig_integral(order - a, s, 2 * g))

    def _psi_exact(self, d, s, rng):
        return sample_gig(0.5 * d - self.alpha, s, 2 * self.gamma, rng)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "gamma": self.gamma}


@dataclass(frozen=True)
class GIG(MixingDensity):
    """Generalized inverse Gaussian, proportional to w^(v-1) exp(-(a w + b / w) / 2)."""

    v: float
    a: float
    b: float
    family = "gig"
    psi_closed_form = True

    def __post_init__(self):
        object.__setattr__(self, "v", _real("v", self.v))
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))

    @cached_property
    def _log_norm(self):
        return (0.5 * self.v * math.log(self.a / self.b) - math.log(2.0)
                - log_bessel_k(self.v, math.sqrt(self.a * self.b)))

    def _logpdf(self, u):
        return self._log_norm + (self.v - 1) * np.log(u) - 0.5 * (self.a * u + self.b / u)

    def sample(self, rng):
        return sample_gig(self.v, self.a, self.b, rng)

    def origin_class(self):
        return FasterThanPolynomial()

    def dist(self):
        return stats.geninvgauss(self.v, math.sqrt(self.a * self.b),
                                 scale=math.sqrt(self.b / self.a))

    def _log_moment_exact(self, order, s):
        return self._log_norm + log_gig_integral(self.v + order, self.a + s, self.b)

    def _psi_exact(self, d, s, rng):
        return sample_gig(self.v + 0.5 * d, self.a + s, self.b, rng)

    def to_dict(self):
        return {"family": self.family, "v": self.v, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class LogNormal(MixingDensity):
    mu: float
    gamma: float
    family = "lognormal"

    def __post_init__(self):
        object.__setattr__(self, "mu", _real("mu", self.mu))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        lu = np.log(u)
        return -lu - 0.5 * math.log(2 * math.pi * self.gamma) - (lu - self.mu) ** 2 / (2 * self.gamma)

    def sample(self, rng):
        return math.exp(self.mu + math.sqrt(self.gamma) * rng.standard_normal())

    def origin_class(self):
        return FasterThanPolynomial()

    def dist(self):
        return stats.lognorm(math.sqrt(self.gamma), scale=math.exp(self.mu))

    def to_dict(self):
        return {"family": self.family, "mu": self.mu, "gamma": self.gamma}


@dataclass(frozen=True)
class Frechet(MixingDensity):
    """Density proportional to w^-(alpha+1) exp(-(gamma / w)^alpha)."""

    alpha: float
    gamma: float
    family = "frechet"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    def _logpdf(self, u):
        a, g = self.alpha, self.gamma
        return math.log(a) + a * math.log(g) - (a + 1) * np.log(u) - (g / u) ** a

    def sample(self, rng):
        return self.gamma * rng.standard_exponential() ** (-1 / self.alpha)

    def origin_class(self):
        return FasterThanPolynomial()

    def tail_moment_finite(self, k):
        return k < self.alpha

    def dist(self):
        return stats.invweibull(self.alpha, scale=self.gamma)

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "gamma": self.gamma}


# ---------------------------------------------------------------------------
# combinators


@dataclass(frozen=True)
class FiniteMixture(MixingDensity):
    weights: tuple
    components: tuple
    family = "mixture"

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        comps = tuple(self.components)
        if len(w) != len(comps) or not comps:
            raise ParameterError("mixture needs one weight per component")
        if any(not (np.isfinite(x) and x > 0) for x in w):
            raise ParameterError("mixture weights must be positive")
        if abs(sum(w) - 1) > 1e-9:
            raise ParameterError(f"mixture weights sum to {sum(w)}, not 1")
        if not all(isinstance(c, MixingDensity) for c in comps):
            raise ParameterError("mixture components must be mixing densities")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def support(self):
        return (min(c.support[0] for c in self.components),
                max(c.support[1] for c in self.components))

    def log_density(self, u):
        u = np.asarray(u, dtype=float)
        parts = [math.log(w) + np.asarray(c.log_density(u))
                 for w, c in zip(self.weights, self.components)]
        with np.errstate(invalid="ignore"):
            out = special.logsumexp(np.stack(parts), axis=0)
        return out if out.ndim else float(out)

    def sample(self, rng):
        u = rng.random()
        acc = 0.0
        for w, c in zip(self.weights, self.components):
            acc += w
            if u < acc:
                return c.sample(rng)
        return self.components[-1].sample(rng)

    def origin_class(self):
        classes = [c.origin_class() for c in self.components]
        poly = [k.c for k in classes if isinstance(k, Polynomial)]
        if poly:
            return Polynomial(min(poly))
        if all(isinstance(k, ZeroNearOrigin) for k in classes):
            return ZeroNearOrigin(min(k.delta for k in classes))
        return FasterThanPolynomial()

    def tail_moment_finite(self, k):
        return all(c.tail_moment_finite(k) for c in self.components)

    def sf(self, x):
        return sum(w * c.sf(x) for w, c in zip(self.weights, self.components))

    invertible = False

    def isf(self, q):
        return None

    def _log_moment_exact(self, order, s):
        parts = [math.log(w) + log_moment(c, order, s)
                 for w, c in zip(self.weights, self.components)]
        return float(special.logsumexp(parts))

    def to_dict(self):
        return {"family": self.family,
                "components": [dict(c.to_dict(), weight=w)
                               for w, c in zip(self.weights, self.components)]}


@dataclass(frozen=True)
class Truncated(MixingDensity):
    """``inner`` restricted to [delta, inf) and renormalized."""

    inner: MixingDensity
    delta: float
    family = "truncated"

    def __post_init__(self):
        if not isinstance(self.inner, MixingDensity):
            raise ParameterError("truncation needs a mixing density")
        object.__setattr__(self, "delta", _positive("delta", self.delta))
        if not self._log_mass > -math.inf:
            raise ParameterError("inner density has no mass above delta")

    @cached_property
    def _log_mass(self):
        mass = float(self.inner.sf(self.delta))
        if mass > 0:
            return math.log(mass)
        return log_moment(self.inner, 0.0, 0.0, lower=self.delta)

    @property
    def support(self):
        return (max(self.delta, self.inner.support[0]), self.inner.support[1])

    def _logpdf(self, u):
        out = np.asarray(self.inner.log_density(u)) - self._log_mass
        return np.where(u >= self.delta, out, -np.inf)

    def sample(self, rng):
        mass = math.exp(self._log_mass)
        if self.inner.invertible and mass > 1e-250:
            q = (1.0 - rng.random()) * mass
            return max(float(self.inner.isf(q)), self.delta)
        for _ in range(MAX_PROPOSALS):
            x = self.inner.sample(rng)
            if x >= self.delta:
                return x
        raise RuntimeError("truncated sampler exceeded its proposal budget")

    def origin_class(self):
        k = self.inner.origin_class()
        if isinstance(k, ZeroNearOrigin):
            return ZeroNearOrigin(max(k.delta, self.delta))
        return ZeroNearOrigin(self.delta)

    def tail_moment_finite(self, k):
        return self.inner.tail_moment_finite(k)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= self.delta, 1.0,
                       self.inner.sf(np.maximum(x, self.delta)) / math.exp(self._log_mass))
        return out if out.ndim else float(out)

    invertible = False

    def isf(self, q):
        return None

    def to_dict(self):
        return {"family": self.family, "delta": self.delta, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Scaled(MixingDensity):
    """The scale-family member u -> h(u / scale) / scale."""

    inner: MixingDensity
    scale: float
    family = "scaled"

    def __post_init__(self):
        if not isinstance(self.inner, MixingDensity):
            raise ParameterError("scaling needs a mixing density")
        object.__setattr__(self, "scale", _positive("scale", self.scale))

    @property
    def support(self):
        lo, hi = self.inner.support
        return (lo * self.scale, hi * self.scale)

    @property
    def psi_closed_form(self):
        return self.inner.psi_closed_form

    @property
    def invertible(self):
        return self.inner.invertible

    def log_density(self, u):
        out = np.asarray(self.inner.log_density(np.asarray(u, dtype=float) / self.scale)) - math.log(self.scale)
        return out if out.ndim else float(out)

    def sample(self, rng):
        return self.scale * self.inner.sample(rng)

    def sample_many(self, rng, size):
        return self.scale * self.inner.sample_many(rng, size)

    def origin_class(self):
        k = self.inner.origin_class()
        if isinstance(k, ZeroNearOrigin):
            return ZeroNearOrigin(k.delta * self.scale)
        return k

    def tail_moment_finite(self, k):
        return self.inner.tail_moment_finite(k)

    def sf(self, x):
        return self.inner.sf(np.asarray(x, dtype=float) / self.scale)

    def isf(self, q):
        return self.scale * self.inner.isf(q)

    def _log_moment_exact(self, order, s):
        return order * math.log(self.scale) + log_moment(self.inner, order, s * self.scale)

    def _psi_exact(self, d, s, rng):
        x = self.inner._psi_exact(d, s * self.scale, rng)
        return None if x is None else self.scale * x

    def to_dict(self):
        return {"family": self.family, "scale": self.scale, "inner": self.inner.to_dict()}


# ---------------------------------------------------------------------------
# operations


def log_density(h: MixingDensity, u):
    return h.log_density(u)


def sample_h(h: MixingDensity, rng):
    return h.sample(rng)


def origin_class(h: MixingDensity):
    return h.origin_class()


def moment_finite(h: MixingDensity, k):
    """Whether int_0^inf u^k h(u) du is finite, decided from the family."""
    origin = h.origin_class()
    if isinstance(origin, Polynomial) and not k + origin.c > -1:
        return False
    return h.tail_moment_finite(k)


def condition_m_holds(h: MixingDensity, d):
    """Finiteness of the d/2-th moment of h."""
    return moment_finite(h, d / 2)


def log_moment(h: MixingDensity, order, s=0.0, lower=None):
    """log int u^order exp(-s u / 2) h(u) du (over u >= lower when given).

    Returns inf when the integral diverges.
    """
    if lower is None:
        if s == 0 and not moment_finite(h, order):
            return math.inf
        origin = h.origin_class()
        if isinstance(origin, Polynomial) and not order + origin.c > -1:
            return math.inf
        exact = h._log_moment_exact(order, s)
        if exact is not None:
            return float(exact)
        support = h.support
    else:
        support = (max(lower, h.support[0]), h.support[1])
    return quadrature.log_moment(h.log_density, order, s, support)


@dataclass(frozen=True)
class PsiParams:
    s: float
    d: int
    h: MixingDensity
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s >= 0):
            raise ParameterError(f"psi needs s >= 0, got {self.s}")
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"psi needs a positive integer d, got {self.d}")

    @property
    def log_norm(self):
        """log of 1/b(s), computed on first use."""
        if "log_norm" not in self._cache:
            self._cache["log_norm"] = log_moment(self.h, self.d / 2, self.s)
        return self._cache["log_norm"]

    def log_density(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return (0.5 * self.d * np.log(u) - 0.5 * self.s * u
                    + np.asarray(self.h.log_density(u)) - self.log_norm)


def _psi_rejection(h, d, s, rng):
    if s <= 0:
        raise UnsupportedDegenerateError(
            "rejection sampling of psi needs s > 0 (no finite envelope at s = 0)")
    # u^(d/2) exp(-s u / 2) peaks at u = d / s
    log_env = 0.5 * d * math.log(d / s) - 0.5 * d
    for _ in range(MAX_PROPOSALS):
        u = h.sample(rng)
        if math.log(1.0 - rng.random()) <= 0.5 * d * math.log(u) - 0.5 * s * u - log_env:
            return u
    raise RuntimeError(f"psi rejection sampler exceeded {MAX_PROPOSALS} proposals (s={s})")


def sample_psi(params: PsiParams, rng, method="auto"):
    """Draw from psi(.; s) by the conjugate closed form or by rejection from h."""
    h, d, s = params.h, params.d, params.s
    if method in ("auto", "exact") and h.psi_closed_form:
        return h._psi_exact(d, s, rng)
    if method == "exact":
        raise ValueError(f"no closed-form psi sampler for {h.family}")
    if method not in ("auto", "rejection"):
        raise ValueError(f"unknown method {method!r}")
    return _psi_rejection(h, d, s, rng)


def sample_psi_vector(h: MixingDensity, d, s, rng, floor=0.0):
    """One psi draw per entry of ``s``; the generic path floors s at ``floor``."""
    s = np.asarray(s, dtype=float)
    if isinstance(h, Gamma):
        return rng.standard_gamma(h.alpha + 0.5 * d, size=s.shape) / (h.gamma + 0.5 * s)
    if h.psi_closed_form:
        return np.array([h._psi_exact(d, si, rng) for si in s])
    return np.array([_psi_rejection(h, d, max(si, floor), rng) for si in s])


def key_ratio(h: MixingDensity, d, s):
    """int u^((d-2)/2) e^(-su/2) h / int u^(d/2) e^(-su/2) h."""
    if s < 0:
        raise ValueError("key ratio needs s >= 0")
    num_order = (d - 2) / 2
    origin = h.origin_class()
    if isinstance(origin, Polynomial) and not num_order + origin.c > -1:
        raise RatioInfiniteError(
            f"numerator diverges at the origin (c={origin.c}, d={d})")
    if s == 0 and not condition_m_holds(h, d):
        raise ValueError("condition M fails, the denominator diverges at s = 0")
    num = log_moment(h, num_order, s)
    if not np.isfinite(num):
        raise RatioInfiniteError("numerator of the key ratio diverges")
    return math.exp(num - log_moment(h, d / 2, s))


def lambda_h(h: MixingDensity, d):
    """Infimum affine slope of the key ratio, via h* proportional to u^((d-1)/2) h."""
    origin = h.origin_class()
    if isinstance(origin, Polynomial):
        c_star = origin.c + (d - 1) / 2
        if c_star > -0.5:
            return 1.0 / (2 * c_star + 1)
        return math.inf
    return 0.0
