"""Generalized inverse Gaussian variates and Bessel-function helpers.

GIG(lam, a, b) has density proportional to
``x^(lam - 1) exp(-(a x + b / x) / 2)`` on ``x > 0``.

The sampler follows Hoermann & Leydold (2014): ratio-of-uniforms with or
without a mode shift for the log-concave region, and a piecewise
constant/power/exponential hat when the density is not T-concave.  Only
``rng.random()`` and ``rng.standard_gamma()`` are consumed, in a fixed
order, so the compiled kernel reproduces the same stream.
"""

import math

import numpy as np
from scipy import special


def log_bessel_k(v, x):
    """log K_v(x) for x > 0, stable for large x and tiny x."""
    v = abs(v)
    val = special.kve(v, x)
    if np.isfinite(val) and val > 0:
        return math.log(val) - x
    # small-argument asymptotics, where kve overflows
    if v == 0:
        return math.log(-math.log(x / 2) - np.euler_gamma)
    return special.gammaln(v) - math.log(2.0) + v * math.log(2.0 / x)


def log_gig_integral(lam, a, b):
    """log of int_0^inf x^(lam-1) exp(-(a x + b/x)/2) dx; inf when divergent."""
    if a < 0 or b < 0:
        raise ValueError("GIG integral needs a, b >= 0")
    if a == 0 and b == 0:
        return math.inf
    if b == 0:
        if lam <= 0:
            return math.inf
        return special.gammaln(lam) - lam * math.log(a / 2)
    if a == 0:
        if lam >= 0:
            return math.inf
        return special.gammaln(-lam) + lam * math.log(b / 2)
    return math.log(2.0) + 0.5 * lam * math.log(b / a) + log_bessel_k(lam, math.sqrt(a * b))


def gig_mode(lam, omega):
    """Mode of x^(lam-1) exp(-omega (x + 1/x) / 2)."""
    if lam >= 1:
        return (math.sqrt((lam - 1) ** 2 + omega ** 2) + (lam - 1)) / omega
    return omega / (math.sqrt((1 - lam) ** 2 + omega ** 2) + (1 - lam))


def _rou_noshift(lam, omega, rng):
    t = 0.5 * (lam - 1)
    s = 0.25 * omega
    xm = gig_mode(lam, omega)
    nc = t * math.log(xm) - s * (xm + 1 / xm)
    ym = ((lam + 1) + math.sqrt((lam + 1) ** 2 + omega ** 2)) / omega
    um = math.exp(0.5 * (lam + 1) * math.log(ym) - s * (ym + 1 / ym) - nc)
    while True:
        u = um * rng.random()
        v = rng.random()
        if u <= 0 or v <= 0:
            continue
        x = u / v
        if math.log(v) <= t * math.log(x) - s * (x + 1 / x) - nc:
            return x


def _rou_shift(lam, omega, rng):
    t = 0.5 * (lam - 1)
    s = 0.25 * omega
    xm = gig_mode(lam, omega)
    nc = t * math.log(xm) - s * (xm + 1 / xm)
    # extremes of (x - xm) sqrt(f(x)) are roots of a cubic
    a = -(2 * (lam + 1) / omega + xm)
    b = 2 * (lam - 1) * xm / omega - 1
    c = xm
    p = b - a * a / 3
    q = (2 * a * a * a) / 27 - (a * b) / 3 + c
    arg = -q / (2 * math.sqrt(-(p * p * p) / 27))
    fi = math.acos(min(1.0, max(-1.0, arg)))
    fak = 2 * math.sqrt(-p / 3)
    y1 = fak * math.cos(fi / 3) - a / 3
    y2 = fak * math.cos(fi / 3 + 4 / 3 * math.pi) - a / 3
    uplus = (y1 - xm) * math.exp(t * math.log(y1) - s * (y1 + 1 / y1) - nc)
    uminus = (y2 - xm) * math.exp(t * math.log(y2) - s * (y2 + 1 / y2) - nc)
    while True:
        u = uminus + rng.random() * (uplus - uminus)
        v = rng.random()
        if v <= 0:
            continue
        x = u / v + xm
        if x > 0 and math.log(v) <= t * math.log(x) - s * (x + 1 / x) - nc:
            return x


def _hat_nonconcave(lam, omega, rng):
    xm = gig_mode(lam, omega)
    x0 = omega / (1 - lam)
    k0 = math.exp((lam - 1) * math.log(xm) - 0.5 * omega * (xm + 1 / xm))
    a0 = k0 * x0
    if x0 >= 2 / omega:
        k1 = 0.0
        a1 = 0.0
        k2 = x0 ** (lam - 1)
        a2 = k2 * 2 * math.exp(-omega * x0 / 2) / omega
    else:
        k1 = math.exp(-omega)
        if lam == 0:
            a1 = k1 * math.log(2 / (omega * omega))
        else:
            a1 = k1 / lam * ((2 / omega) ** lam - x0 ** lam)
        k2 = (2 / omega) ** (lam - 1)
        a2 = k2 * 2 * math.exp(-1) / omega
    total = a0 + a1 + a2
    edge = max(x0, 2 / omega)
    while True:
        v = total * rng.random()
        if v <= a0:
            x = x0 * v / a0
            hx = k0
        else:
            v -= a0
            if v <= a1:
                if lam == 0:
                    x = omega * math.exp(math.exp(omega) * v)
                    hx = k1 / x
                else:
                    x = (x0 ** lam + lam / k1 * v) ** (1 / lam)
                    hx = k1 * x ** (lam - 1)
            else:
                v -= a1
                x = -2 / omega * math.log(math.exp(-omega / 2 * edge) - omega / (2 * k2) * v)
                hx = k2 * math.exp(-omega / 2 * x)
        u = rng.random() * hx
        if x <= 0:
            continue
        if u <= 0 or math.log(u) <= (lam - 1) * math.log(x) - omega / 2 * (x + 1 / x):
            return x


def standard_gig(lam, omega, rng):
    """Draw from the density proportional to x^(lam-1) exp(-omega (x+1/x)/2), lam >= 0."""
    if lam > 2 or omega > 3:
        return _rou_shift(lam, omega, rng)
    if lam >= 1 - 2.25 * omega * omega or omega > 0.2:
        return _rou_noshift(lam, omega, rng)
    return _hat_nonconcave(lam, omega, rng)


def sample_gig(lam, a, b, rng):
    """One GIG(lam, a, b) draw; a = 0 or b = 0 fall back to (inverse) gamma."""
    if b == 0:
        if not (lam > 0 and a > 0):
            raise ValueError(f"GIG({lam}, {a}, 0) is not a proper density")
        return rng.standard_gamma(lam) / (0.5 * a)
    if a == 0:
        if not (lam < 0 and b > 0):
            raise ValueError(f"GIG({lam}, 0, {b}) is not a proper density")
        return 0.5 * b / rng.standard_gamma(-lam)
    if a < 0 or b < 0:
        raise ValueError("GIG parameters a, b must be nonnegative")
    omega = math.sqrt(a * b)
    eta = math.sqrt(b / a)
    if lam < 0:
        return eta / standard_gig(-lam, omega, rng)
    return eta * standard_gig(lam, omega, rng)
