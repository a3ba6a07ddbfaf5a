"""Parser for the ``key=value`` run configuration.

Sections are ``[data]``, ``[mixing]`` and ``[run]``. A line may hold
several pairs (``family=gamma alpha=2 gamma=2``) and ``#`` starts a
comment. Composite mixing densities take sub-blocks: mixture components
are ``[mixing.1]``, ``[mixing.2]``, ... and the density wrapped by a
truncation or a rescaling is ``[mixing.inner]``; these nest
(``[mixing.2.inner]``).
"""

from dataclasses import dataclass
import os
import shlex

import numpy as np

from .chain import ALGORITHMS, ChainConfig
from .exceptions import ConfigError, ParameterError
from .mixing import (F, GIG, Beta, FiniteMixture, Frechet, Gamma, InvertedGamma,
                     LogNormal, Scaled, ShiftedPareto, Truncated, Weibull)
from .model import RegressionData

# family name -> (constructor, required parameter names)
FAMILIES = {
    "gamma": (Gamma, ("alpha", "gamma")),
    "beta": (Beta, ("alpha", "gamma")),
    "weibull": (Weibull, ("alpha", "gamma")),
    "f": (F, ("nu1", "nu2")),
    "shifted_pareto": (ShiftedPareto, ("alpha", "gamma")),
    "inverted_gamma": (InvertedGamma, ("alpha", "gamma")),
    "gig": (GIG, ("v", "a", "b")),
    "lognormal": (LogNormal, ("mu", "gamma")),
    "frechet": (Frechet, ("alpha", "gamma")),
}
ALIASES = {
    "inverse_gamma": "inverted_gamma", "ig": "inverted_gamma",
    "log_normal": "lognormal", "pareto": "shifted_pareto",
    "lomax": "shifted_pareto", "fisher_f": "f",
}
COMPOSITES = {"mixture": ("weights",), "truncated": ("delta",), "scaled": ("scale",),
              "student_t": ("nu",)}

DATA_KEYS = {"y", "x", "a", "n", "p", "d"}
RUN_KEYS = {"iterations", "burn_in", "thin", "seed", "algo", "chains", "keep_latent", "init"}


@dataclass
class _Entry:
    value: str
    line: int


@dataclass
class RunSettings:
    """Everything a config file sets; data files are not read here."""

    h: object
    y_path: str | None = None
    x_path: str | None = None
    a: float | None = None
    dims: tuple | None = None
    iterations: int = 10_000
    burn_in: int | None = None
    thin: int = 1
    seed: int = 0
    algo: str = "da"
    chains: int = 1
    keep_latent: bool = False

    def load_data(self):
        if self.y_path is None or self.x_path is None:
            raise ConfigError("[data] needs both y and X files for this command")
        y = _read_matrix(self.y_path, "y")
        x = _read_matrix(self.x_path, "X")
        if x.shape[0] != y.shape[0]:
            raise ConfigError(f"y has {y.shape[0]} rows but X has {x.shape[0]}")
        d = y.shape[1]
        a = (d + 1) / 2 if self.a is None else self.a
        return RegressionData(y, x, a)

    def dimensions(self):
        """(n, p, d, a), from the data files when given, else from [data] n, p, d."""
        if self.y_path is not None and self.x_path is not None:
            data = self.load_data()
            return data.n, data.p, data.d, data.a
        if self.dims is None:
            raise ConfigError("[data] needs y and X files, or n, p and d")
        n, p, d = self.dims
        return n, p, d, (d + 1) / 2 if self.a is None else self.a

    def chain_config(self, data, seed=None, algo=None):
        return ChainConfig(
            data=data, h=self.h, iterations=self.iterations, burn_in=self.burn_in,
            seed=self.seed if seed is None else seed, thin=self.thin,
            algo=self.algo if algo is None else algo, keep_latent=self.keep_latent)


def _read_matrix(path, what):
    try:
        m = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{what} file {path} is not a numeric CSV: {exc}") from None
    if m.size == 0:
        raise ConfigError(f"{what} file {path} is empty")
    return m


def _split_sections(text):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            current = line[1:-1].strip().lower()
            top = current.split(".", 1)[0]
            if top not in ("data", "mixing", "run") or (top != "mixing" and "." in current):
                raise ConfigError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ConfigError(f"section [{current}] appears twice", lineno)
            sections[current] = {"_line": lineno}
            continue
        if current is None:
            raise ConfigError("key=value line outside any section", lineno)
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise ConfigError(str(exc), lineno) from None
        # allow "key = value" with spaces around '='
        joined = []
        for tok in tokens:
            if joined and (tok == "=" or joined[-1].endswith("=")):
                joined[-1] += tok
            elif tok.startswith("=") and joined:
                joined[-1] += tok
            else:
                joined.append(tok)
        for tok in joined:
            key, sep, value = tok.partition("=")
            key = key.strip().lower()
            if not sep or not key or value == "":
                raise ConfigError(f"expected key=value, got {tok!r}", lineno)
            if key in sections[current]:
                raise ConfigError(f"duplicate key {key!r}", lineno)
            sections[current][key] = _Entry(value.strip(), lineno)
    return sections


def _number(entry, key, kind=float):
    try:
        if kind is int:
            v = float(entry.value)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(entry.value)
    except ValueError:
        raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, "
                          f"got {entry.value!r}", entry.line) from None


def _check_keys(block, allowed, where):
    for key, entry in block.items():
        if key != "_line" and key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{where}]", entry.line)


def _build_density(sections, name, visited):
    if name not in sections:
        raise ConfigError(f"missing section [{name}]")
    visited.add(name)
    block = sections[name]
    if "family" not in block:
        raise ConfigError(f"[{name}] needs a family", block["_line"])
    fam_entry = block["family"]
    family = fam_entry.value.lower()
    family = ALIASES.get(family, family)

    if family in FAMILIES:
        ctor, params = FAMILIES[family]
        _check_keys(block, {"family", *params}, name)
        missing = [p for p in params if p not in block]
        if missing:
            raise ConfigError(f"family {family} needs {', '.join(missing)}", fam_entry.line)
        args = [_number(block[p], p) for p in params]
        try:
            return ctor(*args)
        except ParameterError as exc:
            # point at the offending parameter when the message names it
            line = next((block[p].line for p in params if str(exc).startswith(p + " ")),
                        fam_entry.line)
            raise ConfigError(f"out of range: {exc}", line) from None
    if family not in COMPOSITES:
        raise ConfigError(f"unknown family {fam_entry.value!r}", fam_entry.line)

    (param,) = COMPOSITES[family]
    _check_keys(block, {"family", param}, name)
    if param not in block:
        raise ConfigError(f"family {family} needs {param}", fam_entry.line)
    entry = block[param]
    if family == "student_t":
        nu = _number(entry, "nu")
        return _construct(Gamma, [nu / 2, nu / 2], entry.line)
    if family == "mixture":
        try:
            weights = [float(w) for w in entry.value.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"weights must be numbers, got {entry.value!r}", entry.line) from None
        comps = []
        for k in range(1, len(weights) + 1):
            sub = f"{name}.{k}"
            if sub not in sections:
                raise ConfigError(f"mixture with {len(weights)} weights needs section [{sub}]",
                                  entry.line)
            comps.append(_build_density(sections, sub, visited))
        extra = f"{name}.{len(weights) + 1}"
        if extra in sections:
            raise ConfigError(f"section [{extra}] has no weight", sections[extra]["_line"])
        return _construct(FiniteMixture, [tuple(weights), tuple(comps)], entry.line)
    inner = _build_density(sections, f"{name}.inner", visited)
    value = _number(entry, param)
    ctor = Truncated if family == "truncated" else Scaled
    return _construct(ctor, [inner, value], entry.line)


def _construct(ctor, args, line):
    try:
        return ctor(*args)
    except ParameterError as exc:
        raise ConfigError(f"out of range: {exc}", line) from None


def parse_config(text, base_dir=None) -> RunSettings:
    """Parse config text; relative data paths resolve against ``base_dir``."""
    sections = _split_sections(text)
    if "mixing" not in sections:
        raise ConfigError("missing section [mixing]")
    used = set()
    h = _build_density(sections, "mixing", used)
    for key in sections:
        if key.startswith("mixing") and key not in used:
            raise ConfigError(f"section [{key}] is not attached to a density",
                              sections[key]["_line"])
    settings = RunSettings(h=h)

    data = sections.get("data", {"_line": None})
    _check_keys(data, DATA_KEYS, "data")

    def path(key):
        if key not in data:
            return None
        p = os.path.expanduser(data[key].value)
        if base_dir is not None and not os.path.isabs(p):
            p = os.path.join(base_dir, p)
        return p

    settings.y_path, settings.x_path = path("y"), path("x")
    if "a" in data:
        settings.a = _number(data["a"], "a")
        if not settings.a > 0:
            raise ConfigError("a must be positive", data["a"].line)
    dims = [data.get(k) for k in ("n", "p", "d")]
    if any(dims):
        if not all(dims):
            raise ConfigError("[data] dimensions need all of n, p and d", data["_line"])
        vals = tuple(_number(e, k, int) for e, k in zip(dims, "npd"))
        for e, k, v in zip(dims, "npd", vals):
            if v < 1:
                raise ConfigError(f"{k} must be at least 1", e.line)
        settings.dims = vals

    run = sections.get("run", {"_line": None})
    _check_keys(run, RUN_KEYS, "run")
    for key in ("iterations", "burn_in", "thin", "chains", "seed"):
        if key in run:
            v = _number(run[key], key, int)
            low = 0 if key in ("burn_in", "seed") else 1
            if v < low:
                raise ConfigError(f"{key} must be at least {low}", run[key].line)
            if key == "seed" and v >= 2 ** 64:
                raise ConfigError("seed must fit in 64 bits", run[key].line)
            setattr(settings, key, v)
    if settings.burn_in is not None and settings.burn_in >= settings.iterations:
        raise ConfigError("burn_in must be smaller than iterations", run["burn_in"].line)
    if "algo" in run:
        algo = run["algo"].value.lower().replace("-", "")
        if algo not in ALGORITHMS:
            raise ConfigError(f"algo must be one of {', '.join(ALGORITHMS)}", run["algo"].line)
        settings.algo = algo
    if "keep_latent" in run:
        v = run["keep_latent"].value.lower()
        if v not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError("keep_latent must be true or false", run["keep_latent"].line)
        settings.keep_latent = v in ("true", "1", "yes")
    if "init" in run and run["init"].value.lower() != "default":
        raise ConfigError("init supports only 'default'", run["init"].line)
    return settings


def load_config(path) -> RunSettings:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
