"""Output analysis for MCMC series: batch means, autocorrelation, ESS."""

import math

import numpy as np

MIN_LENGTH = 16


def _series(series):
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def batch_means_se(series):
    """(mean, standard error, batch count) from non-overlapping batch means.

    The batch size is floor(sqrt(N)); a trailing partial batch is dropped.
    """
    x = _series(series)
    n = len(x)
    if n < MIN_LENGTH:
        raise ValueError(f"batch means needs at least {MIN_LENGTH} values, got {n}")
    b = math.isqrt(n)
    k = n // b
    means = x[: k * b].reshape(k, b).mean(axis=1)
    se = float(np.std(means, ddof=1) / math.sqrt(k))
    return float(x.mean()), se, k


def autocorrelation(series, max_lag):
    """Biased sample autocorrelations at lags 0..max_lag."""
    x = _series(series)
    n = len(x)
    if not 0 <= max_lag < n / 4:
        raise ValueError(f"max_lag must be below N/4 = {n / 4:g}")
    xc = x - x.mean()
    var = float(np.dot(xc, xc)) / n
    if not var > 0:
        raise ValueError("series has zero variance")
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, m)
    acov = np.fft.irfft(f * np.conj(f), m)[: max_lag + 1] / n
    acf = acov / var
    acf[0] = 1.0
    return acf


def effective_sample_size(series):
    """N / (1 + 2 sum rho_k), truncated by Geyer's initial positive sequence.

    The result is capped at N, so anti-correlated series never report more
    information than independent draws.
    """
    x = _series(series)
    n = len(x)
    max_lag = max(1, (n - 1) // 4 - 1) if n >= 8 else 0
    if max_lag < 1:
        raise ValueError("series too short for an ESS estimate")
    rho = autocorrelation(x, max_lag)
    # pair sums Gamma_m = rho_2m + rho_2m+1, kept while positive and made monotone
    total = 0.0
    prev = math.inf
    for m in range(0, (len(rho) - 1) // 2):
        g = rho[2 * m] + rho[2 * m + 1]
        if g <= 0:
            break
        g = min(g, prev)
        total += g
        prev = g
    tau = -1.0 + 2.0 * total
    return n / max(tau, 1.0)
