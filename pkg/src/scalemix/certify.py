"""Sufficient-condition certification of geometric ergodicity.

The rules are one-sided: a certificate either establishes geometric
ergodicity (with posterior propriety for DA) or is Inconclusive with a
machine-readable reason. No rule ever concludes that a chain is not
geometric.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .mixing import (FasterThanPolynomial, FiniteMixture, Gamma, MixingDensity,
                     Polynomial, ShiftedPareto, ZeroNearOrigin, condition_m_holds,
                     key_ratio, lambda_h)
from .pxda import condition_h_check

GEOMETRIC = "Geometric"
GEOMETRIC_AND_PROPER = "GeometricAndProper"
INCONCLUSIVE = "Inconclusive"

REASONS = {
    "certified": "all sufficient conditions hold",
    "condition_m_fails": "the moment of order d/2 of h is infinite",
    "n2_fails": "n <= p + 2d - 2a, the posterior is improper",
    "power_at_or_below_threshold": "h is polynomial near the origin with too small a power",
    "pxda_condition_unknown": "integrability of the PX-DA rescaling density is not established",
    "mixture_component_polynomial": "a mixture component is polynomial near the origin",
    "mixture_component_condition_m_fails": "a mixture component has an infinite moment of order d/2",
}


def default_s_grid():
    return np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 64)])


def _origin_text(o):
    if isinstance(o, ZeroNearOrigin):
        return f"zero:{o.delta!r}"
    if isinstance(o, Polynomial):
        return f"polynomial:{o.c!r}"
    return "faster"


def _origin_parse(text):
    kind, _, val = text.partition(":")
    if kind == "zero":
        return ZeroNearOrigin(float(val))
    if kind == "polynomial":
        return Polynomial(float(val))
    if kind == "faster":
        return FasterThanPolynomial()
    raise ValueError(f"bad origin class {text!r}")


def _num(text):
    return None if text == "none" else float(text)


@dataclass(frozen=True)
class Certificate:
    verdict: str
    reason: str
    chain: str
    family: str
    n: int
    p: int
    d: int
    a: float
    origin: object
    condition_m: bool
    n2_holds: bool
    polynomial_threshold: float
    condition_h: str | None
    lam: float
    lambda_prime: float
    L_fit: float | None = None
    L_prime: float | None = None
    notes: tuple = field(default=())

    @property
    def certified(self):
        return self.verdict != INCONCLUSIVE

    def to_keyvalue(self):
        def fmt(v):
            if v is None:
                return "none"
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        pairs = [
            ("verdict", self.verdict), ("reason", self.reason), ("chain", self.chain),
            ("family", self.family), ("n", self.n), ("p", self.p), ("d", self.d),
            ("a", float(self.a)), ("origin", _origin_text(self.origin)),
            ("condition_m", self.condition_m), ("n2_holds", self.n2_holds),
            ("polynomial_threshold", float(self.polynomial_threshold)),
            ("condition_h", self.condition_h), ("lambda", float(self.lam)),
            ("lambda_prime", float(self.lambda_prime)),
            ("L_fit", None if self.L_fit is None else float(self.L_fit)),
            ("L_prime", None if self.L_prime is None else float(self.L_prime)),
        ]
        lines = [f"{k}={fmt(v)}" for k, v in pairs]
        lines += [f"note={note}" for note in self.notes]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_keyvalue(cls, text):
        vals = {}
        notes = []
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"malformed certificate line {line!r}")
            if key == "note":
                notes.append(val)
            else:
                vals[key] = val
        return cls(
            verdict=vals["verdict"], reason=vals["reason"], chain=vals["chain"],
            family=vals["family"], n=int(vals["n"]), p=int(vals["p"]), d=int(vals["d"]),
            a=float(vals["a"]), origin=_origin_parse(vals["origin"]),
            condition_m=vals["condition_m"] == "true", n2_holds=vals["n2_holds"] == "true",
            polynomial_threshold=float(vals["polynomial_threshold"]),
            condition_h=None if vals["condition_h"] == "none" else vals["condition_h"],
            lam=float(vals["lambda"]), lambda_prime=float(vals["lambda_prime"]),
            L_fit=_num(vals["L_fit"]), L_prime=_num(vals["L_prime"]), notes=tuple(notes))

    def report(self):
        head = f"{self.chain.upper()} chain, h = {self.family}, n={self.n} p={self.p} d={self.d} a={self.a:g}"
        lines = [
            head,
            f"verdict: {self.verdict} ({REASONS[self.reason]})",
            f"origin behaviour: {_origin_text(self.origin)}",
            f"moment of order d/2 finite: {self.condition_m}",
            f"power threshold (n-p+2a-d-1)/2: {self.polynomial_threshold:g}",
            f"lambda: {self.lam:g}   lambda': {self.lambda_prime:g}",
        ]
        if self.L_fit is not None:
            lines.append(f"L: {self.L_fit:g}   L': {self.L_prime:g}")
        if self.condition_h is not None:
            lines.append(f"rescaling density integrable: {self.condition_h}")
        lines += [f"note: {note}" for note in self.notes]
        return "\n".join(lines) + "\n"


def _drift_intercept(h, d, lam, s_grid=None):
    """An intercept L with key_ratio(s) <= lam s + L on the grid (exact for gamma)."""
    if type(h) is Gamma:
        return h.gamma / (h.alpha + d / 2 - 1), True
    s = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    return max(key_ratio(h, d, si) - lam * si for si in s), False


def _mixture_verdict(h, d):
    for comp in h.components:
        if not condition_m_holds(comp, d):
            return "mixture_component_condition_m_fails", comp
        if isinstance(comp.origin_class(), Polynomial):
            return "mixture_component_polynomial", comp
    return "certified", None


def certify(h: MixingDensity, n, p, d, a, fit_intercept=False, s_grid=None) -> Certificate:
    """Certificate for the DA chain.

    ``fit_intercept`` also fills L and L' (L from the key ratio on
    ``s_grid``; exact for gamma, where it is always filled).
    """
    n, p, d = int(n), int(p), int(d)
    a = float(a)
    origin = h.origin_class()
    cond_m = condition_m_holds(h, d)
    n2 = n > p + 2 * d - 2 * a
    threshold = (n - p + 2 * a - d - 1) / 2
    lam = lambda_h(h, d)
    factor = n - p + 2 * a - 1
    lam_prime = lam * factor
    notes = []

    if isinstance(h, FiniteMixture):
        reason, bad = _mixture_verdict(h, d)
        if bad is not None:
            notes.append(f"component {bad.family} is outside the finite-mixture rule")
        if reason == "certified":
            lam, lam_prime = 0.0, 0.0
    elif not cond_m:
        reason = "condition_m_fails"
    elif isinstance(origin, Polynomial) and not origin.c > threshold:
        reason = "power_at_or_below_threshold"
        notes.append(f"power c={origin.c:g} must exceed {threshold:g}")
        if isinstance(h, ShiftedPareto):
            notes.append("shifted Pareto is polynomial with c=0, so the criterion never applies")
    else:
        reason = "certified"
    if reason == "certified" and not n2:
        reason = "n2_fails"

    L = L_prime = None
    verdict = GEOMETRIC_AND_PROPER if reason == "certified" else INCONCLUSIVE
    if verdict != INCONCLUSIVE and (fit_intercept or type(h) is Gamma):
        L, exact = _drift_intercept(h, d, lam, s_grid)
        L_prime = factor * n * L
        if not exact:
            notes.append("L is the largest excess of the key ratio over lambda*s on the s grid")
    return Certificate(
        verdict=verdict, reason=reason, chain="da", family=h.family, n=n, p=p, d=d, a=a,
        origin=origin, condition_m=cond_m, n2_holds=n2, polynomial_threshold=threshold,
        condition_h=None, lam=lam, lambda_prime=lam_prime, L_fit=L, L_prime=L_prime,
        notes=tuple(notes))


def certify_pxda(h: MixingDensity, n, p, d, a, **kwargs) -> Certificate:
    base = certify(h, n, p, d, a, **kwargs)
    status = condition_h_check(h, n, d, a)
    cert = replace(base, chain="pxda", condition_h=status.value)
    if base.verdict == GEOMETRIC_AND_PROPER and status.ok:
        return replace(cert, verdict=GEOMETRIC)
    if base.verdict == GEOMETRIC_AND_PROPER:
        return replace(cert, verdict=INCONCLUSIVE, reason="pxda_condition_unknown")
    return cert


def certify_mixture(components, weights, n, p, d, a, **kwargs) -> Certificate:
    return certify(FiniteMixture(tuple(weights), tuple(components)), n, p, d, a, **kwargs)


def empirical_drift_fit(h: MixingDensity, d, s_grid=None):
    """Least-squares line through the key ratio on ``s_grid``.

    Returns (slope, intercept, largest excess of the ratio over the line).
    """
    s = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    ratio = np.array([key_ratio(h, d, si) for si in s])
    design = np.column_stack([s, np.ones_like(s)])
    (lam_hat, L_hat), *_ = np.linalg.lstsq(design, ratio, rcond=None)
    excess = float(np.max(ratio - (lam_hat * s + L_hat)))
    return float(lam_hat), float(L_hat), max(excess, 0.0)
