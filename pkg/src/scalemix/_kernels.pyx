# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled chain loop for the gamma, inverted gamma and GIG families.

Draws come from the numpy ``bitgen_t`` of the caller's Generator in the
same order as the pure-Python engine, so both backends follow one random
stream. Small dense linear algebra is done by hand on row-major buffers.
"""

from libc.math cimport sqrt, log, exp, cos, acos, pow, M_PI
from libc.stdlib cimport malloc, free
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (random_standard_uniform,
                                           random_standard_normal,
                                           random_standard_gamma)

import numpy as np

cdef enum:
    FAM_GAMMA = 0
    FAM_IG = 1
    FAM_GIG = 2

cdef enum:
    MODE_DA = 0
    MODE_PXDA = 1
    MODE_ORACLE = 2

cdef enum:
    OK = 0
    ERR_WEIGHTS = 1
    ERR_SCATTER = 2
    ERR_WISHART = 3
    ERR_SIGMA = 4
    ERR_OMEGA = 5

FAMILY_CODES = {"gamma": FAM_GAMMA, "inverted_gamma": FAM_IG, "gig": FAM_GIG}
MODE_CODES = {"da": MODE_DA, "pxda": MODE_PXDA, "oracle": MODE_ORACLE}
ERROR_MESSAGES = {
    ERR_WEIGHTS: "X^T Q^{-1} X is not symmetric positive definite",
    ERR_SCATTER: "weighted scatter is not symmetric positive definite",
    ERR_WISHART: "Wishart draw is not symmetric positive definite",
    ERR_SIGMA: "sigma is not symmetric positive definite",
    ERR_OMEGA: "Omega is not symmetric positive definite",
}


# ---------------------------------------------------------------------------
# GIG variates, mirroring the pure-Python sampler draw for draw

cdef inline double _gig_mode(double lam, double omega) noexcept nogil:
    if lam >= 1:
        return (sqrt(pow(lam - 1, 2) + pow(omega, 2)) + (lam - 1)) / omega
    return omega / (sqrt(pow(1 - lam, 2) + pow(omega, 2)) + (1 - lam))


cdef double _rou_noshift(double lam, double omega, bitgen_t *bg) noexcept nogil:
    cdef double t = 0.5 * (lam - 1)
    cdef double s = 0.25 * omega
    cdef double xm = _gig_mode(lam, omega)
    cdef double nc = t * log(xm) - s * (xm + 1 / xm)
    cdef double ym = ((lam + 1) + sqrt(pow(lam + 1, 2) + pow(omega, 2))) / omega
    cdef double um = exp(0.5 * (lam + 1) * log(ym) - s * (ym + 1 / ym) - nc)
    cdef double u, v, x
    while True:
        u = um * random_standard_uniform(bg)
        v = random_standard_uniform(bg)
        if u <= 0 or v <= 0:
            continue
        x = u / v
        if log(v) <= t * log(x) - s * (x + 1 / x) - nc:
            return x


cdef double _rou_shift(double lam, double omega, bitgen_t *bg) noexcept nogil:
    cdef double t = 0.5 * (lam - 1)
    cdef double s = 0.25 * omega
    cdef double xm = _gig_mode(lam, omega)
    cdef double nc = t * log(xm) - s * (xm + 1 / xm)
    cdef double a = -(2 * (lam + 1) / omega + xm)
    cdef double b = 2 * (lam - 1) * xm / omega - 1
    cdef double c = xm
    cdef double p = b - a * a / 3
    cdef double q = (2 * a * a * a) / 27 - (a * b) / 3 + c
    cdef double arg = -q / (2 * sqrt(-(p * p * p) / 27))
    if arg > 1.0:
        arg = 1.0
    if arg < -1.0:
        arg = -1.0
    cdef double fi = acos(arg)
    cdef double fak = 2 * sqrt(-p / 3)
    cdef double y1 = fak * cos(fi / 3) - a / 3
    cdef double y2 = fak * cos(fi / 3 + 4.0 / 3.0 * M_PI) - a / 3
    cdef double uplus = (y1 - xm) * exp(t * log(y1) - s * (y1 + 1 / y1) - nc)
    cdef double uminus = (y2 - xm) * exp(t * log(y2) - s * (y2 + 1 / y2) - nc)
    cdef double u, v, x
    while True:
        u = uminus + random_standard_uniform(bg) * (uplus - uminus)
        v = random_standard_uniform(bg)
        if v <= 0:
            continue
        x = u / v + xm
        if x > 0 and log(v) <= t * log(x) - s * (x + 1 / x) - nc:
            return x


cdef double _hat_nonconcave(double lam, double omega, bitgen_t *bg) noexcept nogil:
    cdef double xm = _gig_mode(lam, omega)
    cdef double x0 = omega / (1 - lam)
    cdef double k0 = exp((lam - 1) * log(xm) - 0.5 * omega * (xm + 1 / xm))
    cdef double a0 = k0 * x0
    cdef double k1, a1, k2, a2, total, edge, v, x, hx, u
    if x0 >= 2 / omega:
        k1 = 0.0
        a1 = 0.0
        k2 = pow(x0, lam - 1)
        a2 = k2 * 2 * exp(-omega * x0 / 2) / omega
    else:
        k1 = exp(-omega)
        if lam == 0:
            a1 = k1 * log(2 / (omega * omega))
        else:
            a1 = k1 / lam * (pow(2 / omega, lam) - pow(x0, lam))
        k2 = pow(2 / omega, lam - 1)
        a2 = k2 * 2 * exp(-1.0) / omega
    total = a0 + a1 + a2
    edge = x0 if x0 > 2 / omega else 2 / omega
    while True:
        v = total * random_standard_uniform(bg)
        if v <= a0:
            x = x0 * v / a0
            hx = k0
        else:
            v -= a0
            if v <= a1:
                if lam == 0:
                    x = omega * exp(exp(omega) * v)
                    hx = k1 / x
                else:
                    x = pow(pow(x0, lam) + lam / k1 * v, 1 / lam)
                    hx = k1 * pow(x, lam - 1)
            else:
                v -= a1
                x = -2 / omega * log(exp(-omega / 2 * edge) - omega / (2 * k2) * v)
                hx = k2 * exp(-omega / 2 * x)
        u = random_standard_uniform(bg) * hx
        if x <= 0:
            continue
        if u <= 0 or log(u) <= (lam - 1) * log(x) - omega / 2 * (x + 1 / x):
            return x


cdef double _standard_gig(double lam, double omega, bitgen_t *bg) noexcept nogil:
    if lam > 2 or omega > 3:
        return _rou_shift(lam, omega, bg)
    if lam >= 1 - 2.25 * omega * omega or omega > 0.2:
        return _rou_noshift(lam, omega, bg)
    return _hat_nonconcave(lam, omega, bg)


cdef double _gig(double lam, double a, double b, bitgen_t *bg) noexcept nogil:
    # callers guarantee a proper density
    cdef double omega, eta
    if b == 0:
        return random_standard_gamma(bg, lam) / (0.5 * a)
    if a == 0:
        return 0.5 * b / random_standard_gamma(bg, -lam)
    omega = sqrt(a * b)
    eta = sqrt(b / a)
    if lam < 0:
        return eta / _standard_gig(-lam, omega, bg)
    return eta * _standard_gig(lam, omega, bg)


def gig_draws(double lam, double a, double b, bitgen, Py_ssize_t size):
    """``size`` GIG draws from the compiled sampler (used to test it)."""
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")
    cdef double[::1] out = np.empty(size)
    cdef Py_ssize_t i
    with bitgen.lock, nogil:
        for i in range(size):
            out[i] = _gig(lam, a, b, bg)
    return np.asarray(out)


# ---------------------------------------------------------------------------
# dense helpers on row-major k x k buffers

cdef int _chol(const double *a, double *l, int k) noexcept nogil:
    cdef int i, j, m
    cdef double acc
    for i in range(k * k):
        l[i] = 0.0
    for j in range(k):
        acc = a[j * k + j]
        for m in range(j):
            acc -= l[j * k + m] * l[j * k + m]
        if not acc > 0:
            return 1
        l[j * k + j] = sqrt(acc)
        for i in range(j + 1, k):
            acc = a[i * k + j]
            for m in range(j):
                acc -= l[i * k + m] * l[j * k + m]
            l[i * k + j] = acc / l[j * k + j]
    return 0


cdef void _chol_inverse(const double *l, double *out, double *work, int k) noexcept nogil:
    """(L L^T)^{-1} = L^{-T} L^{-1}, with ``work`` holding L^{-1}."""
    cdef int i, j, m
    cdef double acc
    for i in range(k * k):
        work[i] = 0.0
    for j in range(k):
        work[j * k + j] = 1.0 / l[j * k + j]
        for i in range(j + 1, k):
            acc = 0.0
            for m in range(j, i):
                acc -= l[i * k + m] * work[m * k + j]
            work[i * k + j] = acc / l[i * k + i]
    for i in range(k):
        for j in range(i + 1):
            acc = 0.0
            for m in range(i, k):
                acc += work[m * k + i] * work[m * k + j]
            out[i * k + j] = acc
            out[j * k + i] = acc


cdef struct Work:
    double *gram
    double *lg
    double *omega
    double *lomega
    double *xty
    double *mu
    double *scatter
    double *ls
    double *theta
    double *ltheta
    double *bart
    double *m
    double *w
    double *lw
    double *sigma
    double *lsigma
    double *g
    double *tmp
    double *beta
    double *e
    double *inv_work_p
    double *inv_work_d


cdef int _draw_parameters(const double *y, const double *x, const double *z,
                          int n, int p, int d, double dof, bitgen_t *bg,
                          Work *wk) noexcept nogil:
    """Sigma then beta given z; fills wk.sigma, wk.lsigma, wk.beta."""
    cdef int i, j, k, c
    cdef double acc, zi
    for j in range(p * p):
        wk.gram[j] = 0.0
    for j in range(p * d):
        wk.xty[j] = 0.0
    for i in range(n):
        zi = z[i]
        for j in range(p):
            for k in range(p):
                wk.gram[j * p + k] += zi * x[i * p + j] * x[i * p + k]
            for c in range(d):
                wk.xty[j * d + c] += zi * x[i * p + j] * y[i * d + c]
    if _chol(wk.gram, wk.lg, p):
        return ERR_WEIGHTS
    _chol_inverse(wk.lg, wk.omega, wk.inv_work_p, p)
    for j in range(p):
        for c in range(d):
            acc = 0.0
            for k in range(p):
                acc += wk.omega[j * p + k] * wk.xty[k * d + c]
            wk.mu[j * d + c] = acc

    for j in range(d * d):
        wk.scatter[j] = 0.0
    for i in range(n):
        for c in range(d):
            acc = y[i * d + c]
            for k in range(p):
                acc -= x[i * p + k] * wk.mu[k * d + c]
            wk.e[c] = acc
        for j in range(d):
            for c in range(d):
                wk.scatter[j * d + c] += z[i] * wk.e[j] * wk.e[c]
    if _chol(wk.scatter, wk.ls, d):
        return ERR_SCATTER
    _chol_inverse(wk.ls, wk.theta, wk.inv_work_d, d)
    if _chol(wk.theta, wk.ltheta, d):
        return ERR_SCATTER

    # Bartlett factor: diagonal first, then the strict lower triangle by rows
    for j in range(d * d):
        wk.bart[j] = 0.0
    for j in range(d):
        wk.bart[j * d + j] = sqrt(2.0 * random_standard_gamma(bg, 0.5 * (dof - j)))
    for j in range(1, d):
        for k in range(j):
            wk.bart[j * d + k] = random_standard_normal(bg)
    for j in range(d):
        for k in range(d):
            acc = 0.0
            for c in range(d):
                acc += wk.ltheta[j * d + c] * wk.bart[c * d + k]
            wk.m[j * d + k] = acc
    for j in range(d):
        for k in range(d):
            acc = 0.0
            for c in range(d):
                acc += wk.m[j * d + c] * wk.m[k * d + c]
            wk.w[j * d + k] = acc
    if _chol(wk.w, wk.lw, d):
        return ERR_WISHART
    _chol_inverse(wk.lw, wk.sigma, wk.inv_work_d, d)
    if _chol(wk.sigma, wk.lsigma, d):
        return ERR_SIGMA
    if _chol(wk.omega, wk.lomega, p):
        return ERR_OMEGA

    for j in range(p * d):
        wk.g[j] = random_standard_normal(bg)
    # tmp = L_Omega G, beta = mu + tmp L_Sigma^T
    for j in range(p):
        for c in range(d):
            acc = 0.0
            for k in range(j + 1):
                acc += wk.lomega[j * p + k] * wk.g[k * d + c]
            wk.tmp[j * d + c] = acc
    for j in range(p):
        for c in range(d):
            acc = 0.0
            for k in range(c + 1):
                acc += wk.tmp[j * d + k] * wk.lsigma[c * d + k]
            wk.beta[j * d + c] = wk.mu[j * d + c] + acc
    return OK


cdef void _residuals(const double *y, const double *x, int n, int p, int d,
                     const double *beta, const double *lsigma, double *e,
                     double *r) noexcept nogil:
    cdef int i, k, c
    cdef double acc, tot
    for i in range(n):
        for c in range(d):
            acc = y[i * d + c]
            for k in range(p):
                acc -= x[i * p + k] * beta[k * d + c]
            e[c] = acc
        tot = 0.0
        for c in range(d):
            acc = e[c]
            for k in range(c):
                acc -= lsigma[c * d + k] * e[k]
            e[c] = acc / lsigma[c * d + c]
            tot += e[c] * e[c]
        r[i] = tot


def run_kernel(const double[:, ::1] y, const double[:, ::1] x, double a_prior,
               int family, double h0, double h1, double h2, int mode,
               long iterations, long burn_in, long thin,
               const double[:, ::1] beta0, const double[:, ::1] sigma0,
               bitgen, bint keep_z):
    """Run one chain; the caller has validated every input.

    Returns a dict with the recorded betas, sigmas, drift values, the sum
    of post burn-in latent draws and the number of completed iterations.
    """
    cdef int n = x.shape[0], p = x.shape[1], d = y.shape[1]
    cdef double dof = n - p + 2 * a_prior - d - 1
    cdef double kexp = (d + 1 - 2 * a_prior) * d / 2
    cdef long count = (iterations - burn_in) // thin if iterations > burn_in else 0
    betas_arr = np.zeros((count, p, d))
    sigmas_arr = np.zeros((count, d, d))
    drift_arr = np.zeros(count)
    zsum_arr = np.zeros(n)
    ztrace_arr = np.zeros((count if keep_z else 0, n))
    cdef double[:, :, ::1] betas = betas_arr
    cdef double[:, :, ::1] sigmas = sigmas_arr
    cdef double[::1] drift = drift_arr
    cdef double[::1] zsum = zsum_arr
    cdef double[:, ::1] ztrace = ztrace_arr
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")

    cdef int kk = p if p > d else d
    cdef double *buf = <double *> malloc(sizeof(double) * (20 * kk * kk + 4 * n + 2 * kk))
    if buf == NULL:
        raise MemoryError()
    cdef Work wk
    cdef double *ptr = buf
    wk.gram = ptr; ptr += kk * kk
    wk.lg = ptr; ptr += kk * kk
    wk.omega = ptr; ptr += kk * kk
    wk.lomega = ptr; ptr += kk * kk
    wk.xty = ptr; ptr += kk * kk
    wk.mu = ptr; ptr += kk * kk
    wk.scatter = ptr; ptr += kk * kk
    wk.ls = ptr; ptr += kk * kk
    wk.theta = ptr; ptr += kk * kk
    wk.ltheta = ptr; ptr += kk * kk
    wk.bart = ptr; ptr += kk * kk
    wk.m = ptr; ptr += kk * kk
    wk.w = ptr; ptr += kk * kk
    wk.lw = ptr; ptr += kk * kk
    wk.sigma = ptr; ptr += kk * kk
    wk.lsigma = ptr; ptr += kk * kk
    wk.g = ptr; ptr += kk * kk
    wk.tmp = ptr; ptr += kk * kk
    wk.beta = ptr; ptr += kk * kk
    wk.inv_work_p = ptr; ptr += kk * kk
    wk.e = ptr; ptr += 2 * kk
    wk.inv_work_d = wk.inv_work_p
    cdef double *z = ptr
    ptr += n
    cdef double *r = ptr
    cdef const double *yp = &y[0, 0]
    cdef const double *xp = &x[0, 0]

    cdef long it, rec = 0, done = 0
    cdef int i, j, status = OK
    cdef double shape, sz, sinv, v, tot

    # starting residuals and Cholesky factor of the initial sigma
    for j in range(d * d):
        wk.sigma[j] = sigma0[j // d, j % d]
    for j in range(p * d):
        wk.beta[j] = beta0[j // d, j % d]
    if _chol(wk.sigma, wk.lsigma, d):
        free(buf)
        return {"error": ERR_SIGMA, "done": 0, "betas": betas_arr[:0],
                "sigmas": sigmas_arr[:0], "drift": drift_arr[:0],
                "zsum": zsum_arr, "ztrace": ztrace_arr[:0]}
    _residuals(yp, xp, n, p, d, wk.beta, wk.lsigma, wk.e, r)

    try:
        with bitgen.lock, nogil:
            for it in range(1, iterations + 1):
                if mode == MODE_ORACLE:
                    for i in range(n):
                        if family == FAM_GAMMA:
                            z[i] = random_standard_gamma(bg, h0) / h1
                        elif family == FAM_IG:
                            z[i] = h1 / random_standard_gamma(bg, h0)
                        else:
                            z[i] = _gig(h0, h1, h2, bg)
                else:
                    if family == FAM_GAMMA:
                        shape = h0 + 0.5 * d
                        for i in range(n):
                            z[i] = random_standard_gamma(bg, shape) / (h1 + 0.5 * r[i])
                    elif family == FAM_IG:
                        for i in range(n):
                            z[i] = _gig(0.5 * d - h0, r[i], 2 * h1, bg)
                    else:
                        for i in range(n):
                            z[i] = _gig(h0 + 0.5 * d, h1 + r[i], h2, bg)
                    if mode == MODE_PXDA:
                        sz = 0.0
                        sinv = 0.0
                        for i in range(n):
                            sz += z[i]
                            sinv += 1 / z[i]
                        if family == FAM_GAMMA:
                            v = random_standard_gamma(bg, n * h0 + kexp) / (h1 * sz)
                        elif family == FAM_IG:
                            v = h1 * sinv / random_standard_gamma(bg, n * h0 - kexp)
                        else:
                            v = _gig(n * h0 + kexp, h1 * sz, h2 * sinv, bg)
                        for i in range(n):
                            z[i] = v * z[i]

                status = _draw_parameters(yp, xp, z, n, p, d, dof, bg, &wk)
                if status != OK:
                    break
                _residuals(yp, xp, n, p, d, wk.beta, wk.lsigma, wk.e, r)
                done = it

                if it > burn_in:
                    for i in range(n):
                        zsum[i] += z[i]
                    if (it - burn_in) % thin == 0:
                        tot = 0.0
                        for i in range(n):
                            tot += r[i]
                        drift[rec] = tot
                        for j in range(p * d):
                            betas[rec, j // d, j % d] = wk.beta[j]
                        for j in range(d * d):
                            sigmas[rec, j // d, j % d] = wk.sigma[j]
                        if keep_z:
                            for i in range(n):
                                ztrace[rec, i] = z[i]
                        rec += 1
    finally:
        free(buf)

    return {"error": status, "done": done, "betas": betas_arr[:rec],
            "sigmas": sigmas_arr[:rec], "drift": drift_arr[:rec],
            "zsum": zsum_arr, "ztrace": ztrace_arr[:rec]}
