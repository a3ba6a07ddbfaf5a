"""Command-line front end: ``scalemix {run,certify,oracle,diagnose}``."""

import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import os
import sys

import numpy as np

from . import __version__
from .certify import certify, certify_pxda
from .chain import check_preconditions, run_chain, state_column_names
from .config import load_config
from .diagnostics import MIN_LENGTH, batch_means_se, effective_sample_size
from .exceptions import ScaleMixError
from .oracle import draw_set


class CommandError(Exception):
    pass


def _fmt(x):
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, (int, np.integer)) else str(v)
                              for v in row) + "\n")


def read_csv(path):
    """(header, float matrix) from a CSV written by this tool."""
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            body = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=float)
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise CommandError(f"{path} is not a numeric CSV: {exc}") from None
    if body.size and body.shape[1] != len(header):
        raise CommandError(f"{path}: header has {len(header)} columns, rows have {body.shape[1]}")
    return header, body


def _thread_cap():
    raw = os.environ.get("SCALEMIX_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError:
        raise CommandError(f"SCALEMIX_THREADS must be an integer, got {raw!r}") from None
    return max(cap, 1)


def chain_seeds(seed, chains):
    """Seed material for each chain: the seed itself for one chain, spawned streams otherwise."""
    if chains == 1:
        return [seed]
    return np.random.SeedSequence(seed).spawn(chains)


def _out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _metadata(settings, cfg, out, index, stream):
    data = cfg.data
    return {
        "chain": index, "seed": cfg.seed, "stream": stream, "algo": cfg.algo,
        "mixing": settings.h.to_dict(), "n": data.n, "p": data.p, "d": data.d, "a": data.a,
        "iterations": cfg.iterations, "burn_in": cfg.burn_in, "thin": cfg.thin,
        "recorded": len(out), "complete": out.complete, "error": out.error,
        "backend": out.backend, "latent_mean": [float(v) for v in out.latent_mean],
        "version": __version__,
    }


def cmd_run(args, settings):
    algo = args.algo or settings.algo
    seed = settings.seed if args.seed is None else args.seed
    chains = args.chains or settings.chains
    data = settings.load_data()
    check_preconditions(data, settings.h, algo)
    base = settings.chain_config(data, seed=seed, algo=algo)
    seeds = chain_seeds(seed, chains)

    def one(j):
        rng = np.random.default_rng(seeds[j])
        return run_chain(base, rng=rng)

    workers = min(chains, _thread_cap())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(one, range(chains)))
    else:
        outputs = [one(j) for j in range(chains)]

    out_dir = _out_dir(args.out)
    header = ["iteration"] + state_column_names(data.p, data.d) + ["V"]
    failed = []
    with open(os.path.join(out_dir, "metadata.jsonl"), "w", encoding="utf-8") as meta:
        for j, out in enumerate(outputs):
            name = "chain.csv" if chains == 1 else f"chain_{j + 1}.csv"
            rows = (
                [int(it), *vals, v]
                for it, vals, v in zip(out.iteration_index, out.flat(), out.drift_trace))
            write_csv(os.path.join(out_dir, name), header, rows)
            meta.write(json.dumps(_metadata(settings, base, out, j + 1, None if chains == 1 else j),
                                  sort_keys=True) + "\n")
            if not out.complete:
                failed.append(f"chain {j + 1} stopped early at {out.error}")
    if failed:
        raise CommandError("; ".join(failed))
    print(f"wrote {chains} chain file(s) to {out_dir}")


def cmd_certify(args, settings):
    algo = args.algo or settings.algo
    n, p, d, a = settings.dimensions()
    if algo == "pxda":
        cert = certify_pxda(settings.h, n, p, d, a, fit_intercept=True)
    elif algo == "da":
        cert = certify(settings.h, n, p, d, a, fit_intercept=True)
    else:
        raise CommandError("certify applies to the da and pxda chains")
    text = cert.report() + "\n" + cert.to_keyvalue()
    sys.stdout.write(text)
    if args.out:
        with open(os.path.join(_out_dir(args.out), "certificate.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write(text)


def cmd_oracle(args, settings):
    seed = settings.seed if args.seed is None else args.seed
    data = settings.load_data()
    draws = draw_set(data, settings.h, settings.iterations, seed)
    header = ["draw"] + state_column_names(data.p, data.d)
    rows = ([k + 1, *vals] for k, vals in enumerate(draws.flat()))
    out_dir = _out_dir(args.out)
    write_csv(os.path.join(out_dir, "oracle.csv"), header, rows)
    print(f"wrote {draws.count} exact draws to {out_dir}")


def diagnose_table(header, body):
    skip = {"iteration", "draw"}
    lines = [f"{'column':>14} {'mean':>14} {'batch_se':>12} {'ess':>10}"]
    rows = []
    for j, name in enumerate(header):
        if name in skip:
            continue
        col = body[:, j]
        mean, se, _ = batch_means_se(col)
        try:
            ess = effective_sample_size(col)
        except ValueError:
            ess = float("nan")
        rows.append((name, mean, se, ess))
        lines.append(f"{name:>14} {mean:14.6g} {se:12.4g} {ess:10.1f}")
    return "\n".join(lines) + "\n", rows


def cmd_diagnose(args, settings):
    header, body = read_csv(args.chain_csv)
    if len(body) < MIN_LENGTH:
        raise CommandError(f"{args.chain_csv} has {len(body)} rows; at least {MIN_LENGTH} needed")
    text, rows = diagnose_table(header, body)
    sys.stdout.write(text)
    if args.out:
        path = os.path.join(_out_dir(args.out), "diagnostics.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("column,mean,batch_se,ess\n")
            for name, *vals in rows:
                fh.write(name + "," + ",".join(_fmt(v) for v in vals) + "\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scalemix",
        description="Gibbs samplers for multivariate regression with scale-mixture errors")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="configuration file")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("run", help="run DA or PX-DA chains and write chain CSVs")
    common(p)
    p.add_argument("--algo", choices=["da", "pxda", "oracle"])
    p.add_argument("--seed", type=_u64)
    p.add_argument("--chains", type=_positive_int)
    p.set_defaults(func=cmd_run, default_out="scalemix_out")

    p = sub.add_parser("certify", help="print a geometric ergodicity certificate")
    common(p)
    p.add_argument("--algo", choices=["da", "pxda"])
    p.set_defaults(func=cmd_certify, default_out=None)

    p = sub.add_parser("oracle", help="exact posterior draws (n = p + d, a = (d+1)/2)")
    common(p)
    p.add_argument("--seed", type=_u64)
    p.set_defaults(func=cmd_oracle, default_out="scalemix_out")

    p = sub.add_parser("diagnose", help="mean, batch-means SE and ESS per column of a CSV")
    p.add_argument("chain_csv")
    common(p, config_required=False)
    p.set_defaults(func=cmd_diagnose, default_out=None)
    return parser


def _u64(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None:
        args.out = args.default_out
    try:
        settings = load_config(args.config) if args.config else None
        args.func(args, settings)
    except (ScaleMixError, CommandError) as exc:
        print(f"scalemix {args.command}: error: {exc}", file=sys.stderr)
        return 2 if exc.__class__.__name__ == "ConfigError" else 1
    except OSError as exc:
        print(f"scalemix {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
