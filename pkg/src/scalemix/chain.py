"""Chain configuration, the chain runner and its output container."""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .exceptions import ParameterError, ScaleMixError, UnsupportedCaseError
from .mixing import MixingDensity, condition_m_holds
from .model import (ParameterState, RegressionData, default_init,
                    residual_quadratics, validate_design)
from .pxda import XiParams, require_condition, sample_xi
from .sampler import draw_latent, draw_parameters

ALGORITHMS = ("da", "pxda", "oracle")
_U64 = 2 ** 64


@dataclass(frozen=True)
class ChainConfig:
    data: RegressionData
    h: MixingDensity
    iterations: int
    burn_in: int | None = None
    seed: int = 0
    init: ParameterState | str = "default"
    thin: int = 1
    algo: str = "da"
    keep_latent: bool = False

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ParameterError("iterations must be a positive integer")
        object.__setattr__(self, "iterations", int(self.iterations))
        burn = self.iterations // 10 if self.burn_in is None else self.burn_in
        if int(burn) != burn or not 0 <= burn < self.iterations:
            raise ParameterError(f"burn_in must satisfy 0 <= burn_in < iterations, got {burn}")
        object.__setattr__(self, "burn_in", int(burn))
        if int(self.thin) != self.thin or self.thin < 1:
            raise ParameterError("thin must be a positive integer")
        object.__setattr__(self, "thin", int(self.thin))
        if int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))
        if self.algo not in ALGORITHMS:
            raise ParameterError(f"algo must be one of {ALGORITHMS}, got {self.algo!r}")
        if not (self.init == "default" or isinstance(self.init, ParameterState)):
            raise ParameterError("init must be a ParameterState or 'default'")

    @property
    def recorded(self):
        return (self.iterations - self.burn_in) // self.thin

    def initial_state(self):
        return default_init(self.data) if self.init == "default" else self.init


@dataclass
class ChainOutput:
    config_echo: ChainConfig
    betas: np.ndarray
    sigmas: np.ndarray
    drift_trace: np.ndarray
    latent_mean: np.ndarray
    iteration_index: np.ndarray
    complete: bool = True
    error: str | None = None
    backend: str = "python"
    latent_trace: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.drift_trace)

    @property
    def states(self):
        return [ParameterState(b, s) for b, s in zip(self.betas, self.sigmas)]

    def flat(self):
        """One row per recorded state: vec(beta) column-major, then vech(Sigma)."""
        return flatten_states(self.betas, self.sigmas)

    def column_names(self):
        p, d = self.betas.shape[1:] if self.betas.ndim == 3 else (
            self.config_echo.data.p, self.config_echo.data.d)
        return state_column_names(p, d)


def state_column_names(p, d):
    names = [f"beta_{i + 1}_{j + 1}" for j in range(d) for i in range(p)]
    names += [f"sigma_{i + 1}_{j + 1}" for j in range(d) for i in range(j, d)]
    return names


def flatten_states(betas, sigmas):
    betas = np.asarray(betas)
    sigmas = np.asarray(sigmas)
    k, p, d = betas.shape
    vec_beta = betas.transpose(0, 2, 1).reshape(k, p * d)
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    vech = sigmas[:, rows[order], cols[order]]
    return np.hstack([vec_beta, vech])


def check_preconditions(data: RegressionData, h: MixingDensity, algo: str):
    report = validate_design(data)
    if not report.n1_holds:
        raise UnsupportedCaseError(
            f"rank(X:y) = {report.rank_lambda} < p + d = {data.p + data.d}; "
            "the posterior is improper")
    if not report.n2_holds:
        raise UnsupportedCaseError(
            f"n = {data.n} must exceed p + 2d - 2a = {data.p + 2 * data.d - 2 * data.a:g}")
    if not condition_m_holds(h, data.d):
        raise UnsupportedCaseError(
            f"condition M fails for {h.family} at d = {data.d} "
            "(the mixing density has no finite moment of order d/2)")
    if algo == "pxda":
        require_condition(h, data.n, data.d, data.a)
    elif algo == "oracle":
        from .oracle import check_exact_case
        check_exact_case(data, h)


def run_chain(config: ChainConfig, rng=None, backend="auto") -> ChainOutput:
    """Run the chain described by ``config``.

    ``rng`` defaults to a fresh Generator seeded with ``config.seed``.
    A failing step stops the run; the states recorded so far are
    returned with ``complete=False`` and the error message.
    """
    if backend not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown backend {backend!r}")
    check_preconditions(config.data, config.h, config.algo)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    args = _backend.kernel_args(config.h)
    if backend == "compiled" and args is None:
        raise UnsupportedCaseError(
            f"no compiled kernel for {config.h.family} (or the extension is not built)")
    use_kernel = args is not None and (
        backend == "compiled" or (backend == "auto" and _backend.kernels is not None))
    if use_kernel:
        return _run_compiled(config, rng, *args)
    return _run_python(config, rng)


def _output(config, betas, sigmas, drift, zsum, done, error, backend, ztrace):
    burn, thin = config.burn_in, config.thin
    post = max(done - burn, 0)
    latent_mean = zsum / post if post else np.full(config.data.n, math.nan)
    index = burn + thin * np.arange(1, len(drift) + 1)
    return ChainOutput(
        config_echo=config, betas=betas, sigmas=sigmas, drift_trace=drift,
        latent_mean=latent_mean, iteration_index=index,
        complete=error is None, error=error, backend=backend,
        latent_trace=ztrace if config.keep_latent else None)


def _run_python(config, rng):
    data, h = config.data, config.h
    n, p, d = data.n, data.p, data.d
    count = config.recorded
    betas = np.zeros((count, p, d))
    sigmas = np.zeros((count, d, d))
    drift = np.zeros(count)
    ztrace = np.zeros((count if config.keep_latent else 0, n))
    zsum = np.zeros(n)
    state = config.initial_state()
    error = None
    done = rec = 0
    try:
        r = residual_quadratics(state, data)
        for it in range(1, config.iterations + 1):
            if config.algo == "oracle":
                z = np.asarray(h.sample_many(rng, n), dtype=float)
            else:
                z = draw_latent(h, d, r, rng)
                if config.algo == "pxda":
                    z = sample_xi(XiParams(z, n, d, data.a, h), rng) * z
            state = draw_parameters(z, data, rng)
            r = residual_quadratics(state, data)
            done = it
            if it > config.burn_in:
                zsum += z
                if (it - config.burn_in) % config.thin == 0:
                    betas[rec] = state.beta
                    sigmas[rec] = state.sigma
                    drift[rec] = np.sum(r)
                    if config.keep_latent:
                        ztrace[rec] = z
                    rec += 1
    except (ScaleMixError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        error = f"iteration {done + 1}: {exc}"
    return _output(config, betas[:rec], sigmas[:rec], drift[:rec], zsum, done,
                   error, "python", ztrace[:rec])


def _run_compiled(config, rng, family, hpar):
    data = config.data
    k = _backend._kernels
    state = config.initial_state()
    res = k.run_kernel(
        np.ascontiguousarray(data.y, dtype=float),
        np.ascontiguousarray(data.X, dtype=float),
        float(data.a), family, float(hpar[0]), float(hpar[1]), float(hpar[2]),
        k.MODE_CODES[config.algo], config.iterations, config.burn_in, config.thin,
        np.ascontiguousarray(state.beta, dtype=float),
        np.ascontiguousarray(state.sigma, dtype=float),
        rng.bit_generator, bool(config.keep_latent))
    error = None
    if res["error"]:
        error = f"iteration {res['done'] + 1}: {k.ERROR_MESSAGES[res['error']]}"
    return _output(config, res["betas"], res["sigmas"], res["drift"], res["zsum"],
                   res["done"], error, "compiled", res["ztrace"])
