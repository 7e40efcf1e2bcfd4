"""Command-line entry point: ``bifbm {cov,sample,verify,weak-approx} ...``.

Exit codes: 0 success, 1 verification ran but failed, 2 parameter-domain
error, 3 numerical failure, 64 malformed command line.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import shlex
import sys
import tempfile

import numpy as np

from . import __version__
from .covkernels import BifBm, BifParams, FBm, SubFBm, TimeGrid, XK, cov, x_hk
from .errors import DomainError, NumericalError
from .samplers import sample_decomposition, sample_exact, sample_xk_wiener
from .volterra import sample_fbm_volterra
from .weakapprox import WeakApproxParams, approx_bifbm_ensemble
from . import verify

EXIT_OK, EXIT_FAILED, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 3, 64
MODELS = ("bifbm", "fbm", "subfbm", "xk", "xhk")
METHODS = ("cholesky", "decomposition", "wiener", "volterra", "weak-approx")
# flags that never change results and so stay out of output headers
NOT_ECHOED = {"out", "threads", "args_file", "timing", "command", "format"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--seed", type=int, default=None, help="random seed (falls back to $BIFBM_SEED, then 0)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--args-file", default=None, help="file with one flag per line")


def _model_flags(p):
    p.add_argument("--model", choices=MODELS, default="bifbm")
    p.add_argument("--H", type=float, default=None, help="Hurst-type index of bifBm / X^{H,K}")
    p.add_argument("--K", type=float, default=None, help="second bifBm index, or the X^K index")
    p.add_argument("--h", type=float, default=None, help="fBm / sub-fBm index")


def _grid_flags(p):
    p.add_argument("--T", type=float, default=1.0, help="horizon")
    p.add_argument("--steps", type=int, default=16, help="uniform steps on [0, T]")
    p.add_argument("--points", default=None, help="explicit comma-separated grid times")


def _weak_flags(p):
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.add_argument("--swap", action="store_true", help="sin for the smooth part, cos for the fBm part")


def build_parser():
    parser = _Parser(prog="bifbm", description="Bifractional Brownian motion toolkit.")
    parser.add_argument("--version", action="version", version=f"bifbm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cov", help="evaluate one covariance entry")
    _model_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--digits", type=int, default=7, help="decimals printed")
    _common(p)

    p = sub.add_parser("sample", help="simulate a path ensemble")
    _model_flags(p)
    _grid_flags(p)
    p.add_argument("--method", choices=METHODS, default="cholesky")
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tail-tol", type=float, default=None,
                   help="truncation tolerance (wiener default 1e-3, weak-approx default 1e-2)")
    p.add_argument("--jitter-cap", type=float, default=None)
    p.add_argument("--substeps", type=int, default=8, help="Volterra sub-cells per grid interval")
    _weak_flags(p)
    _common(p)

    p = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    _model_flags(p)
    _grid_flags(p)
    p.add_argument("--paths", type=int, default=None, help="Monte Carlo paths (suite default if omitted)")
    p.add_argument("--tail-tol", type=float, default=None)
    p.add_argument("--timing", action="store_true", help="record runtime_ms (breaks byte-identity)")
    _weak_flags(p)
    _common(p)

    p = sub.add_parser("weak-approx", help="Poisson-driven approximation of bifBm paths")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    _grid_flags(p)
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tail-tol", type=float, default=1e-2)
    _weak_flags(p)
    _common(p)
    return parser


# --- argument plumbing --------------------------------------------------------

def expand_args_file(argv):
    """Replace ``--args-file PATH`` by the flags listed in PATH, one per line."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        path = None
        if a == "--args-file":
            if i + 1 >= len(argv):
                raise UsageError("--args-file needs a path")
            path, i = argv[i + 1], i + 2
        elif a.startswith("--args-file="):
            path, i = a.split("=", 1)[1], i + 1
        else:
            out.append(a)
            i += 1
            continue
        try:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line and not line.startswith("#"):
                        out.extend(shlex.split(line))
        except OSError as exc:
            raise UsageError(f"cannot read args file: {exc}") from exc
    return out


def resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("BIFBM_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise DomainError(f"BIFBM_SEED must be an unsigned integer, got {env!r}") from exc


def make_model(args):
    name = args.model
    if name in ("bifbm", "xhk"):
        if args.H is None or args.K is None:
            raise DomainError(f"model {name} needs --H and --K")
        params = BifParams(args.H, args.K)
        return BifBm(params) if name == "bifbm" else x_hk(params)
    if name in ("fbm", "subfbm"):
        if args.h is None:
            raise DomainError(f"model {name} needs --h")
        return FBm(args.h) if name == "fbm" else SubFBm(args.h)
    if args.K is None:
        raise DomainError("model xk needs --K")
    return XK(args.K)


def make_grid(args):
    if args.points:
        try:
            pts = [float(x) for x in args.points.split(",") if x.strip()]
        except ValueError as exc:
            raise DomainError(f"--points must be comma-separated numbers: {exc}") from exc
        return TimeGrid(np.array(pts))
    return TimeGrid.uniform(args.T, args.steps)


def echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_ECHOED}


def write_atomic(path, text):
    """Write via a temp file in the target directory, then rename over ``path``."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".bifbm-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def ensemble_csv(ens, meta):
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    buf.write(",".join(["t"] + [f"path_{i}" for i in range(ens.n_paths)]) + "\n")
    for j, t in enumerate(ens.grid.points):
        row = [t] + list(ens.paths[:, j])
        buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return buf.getvalue()


def ensemble_json(ens, meta):
    doc = dict(meta)
    doc["t"] = [float(x) for x in ens.grid.points]
    doc["paths"] = [[float(x) for x in row] for row in ens.paths]
    return json.dumps(doc, indent=1) + "\n"


def _write_ensemble(args, ens, meta):
    text = ensemble_csv(ens, meta) if args.format == "csv" else ensemble_json(ens, meta)
    write_atomic(args.out, text)


# --- commands ------------------------------------------------------------------

def cmd_cov(args):
    value = cov(make_model(args), args.t, args.s)
    write_atomic(args.out, f"{value:.{max(args.digits, 0)}f}\n")
    return EXIT_OK


def _weak_params(args, grid):
    params = BifParams(args.H, args.K)
    tail = 1e-2 if args.tail_tol is None else args.tail_tol
    return WeakApproxParams(args.eps, args.theta, params, grid.T, tail)


def cmd_sample(args):
    seed = resolve_seed(args.seed)
    grid = make_grid(args)
    model = make_model(args)
    method = args.method
    if method == "cholesky":
        ens = sample_exact(model, grid, args.paths, seed, jitter_cap=args.jitter_cap, threads=args.threads)
    elif method == "decomposition":
        if not isinstance(model, BifBm):
            raise DomainError("method decomposition needs --model bifbm with K in (1, 2)")
        ens = sample_decomposition(model.params, grid, args.paths, seed, jitter_cap=args.jitter_cap,
                                   threads=args.threads)
    elif method == "wiener":
        if not isinstance(model, XK):
            raise DomainError("method wiener samples X^K only: use --model xk")
        tail = 1e-3 if args.tail_tol is None else args.tail_tol
        ens = sample_xk_wiener(model.K, grid, args.paths, seed, tail, threads=args.threads)
    elif method == "volterra":
        if not isinstance(model, FBm):
            raise DomainError("method volterra samples fBm only: use --model fbm")
        ens = sample_fbm_volterra(model.h, grid, args.paths, seed, args.substeps, threads=args.threads)
    else:
        if not isinstance(model, BifBm):
            raise DomainError("method weak-approx needs --model bifbm with K in (1, 2)")
        ens = approx_bifbm_ensemble(_weak_params(args, grid), grid, args.paths, seed, swap=args.swap,
                                    threads=args.threads)
    meta = {"version": __version__, "command": "sample", "model": ens.model_tag, "seed": seed,
            "params": echo(args)}
    _write_ensemble(args, ens, meta)
    return EXIT_OK


def cmd_weak_approx(args):
    seed = resolve_seed(args.seed)
    grid = make_grid(args)
    ens = approx_bifbm_ensemble(_weak_params(args, grid), grid, args.paths, seed, swap=args.swap,
                                threads=args.threads)
    meta = {"version": __version__, "command": "weak-approx", "model": ens.model_tag, "seed": seed,
            "params": echo(args)}
    _write_ensemble(args, ens, meta)
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(f"suite {args.suite} needs " + ", ".join(f"--{n}" for n in missing))
    return [getattr(args, n) for n in names]


def _mc(args, **kw):
    """Keyword arguments shared by Monte Carlo suites, omitting unset flags."""
    kw.update(seed=resolve_seed(args.seed), threads=args.threads)
    if args.paths is not None:
        kw["n_paths"] = args.paths
    if args.tail_tol is not None:
        kw["tail_tol"] = args.tail_tol
    return kw


def _grid_points(args):
    pts = make_grid(args).points
    return pts[pts > 0.0]


SUITES = {
    "decomposition-identity": lambda a: verify.check_decomposition_identity(*_need(a, "H", "K"), _grid_points(a)),
    "lei-nualart-identity": lambda a: verify.check_lei_nualart_identity(*_need(a, "H", "K"), _grid_points(a)),
    "subfbm-identity": lambda a: verify.check_subfbm_identity(*_need(a, "H", "K"), _grid_points(a)),
    "psd": lambda a: verify.check_psd(*_need(a, "H", "K"), _grid_points(a)),
    "quasi-helix": lambda a: verify.check_quasi_helix(*_need(a, "H", "K"), _grid_points(a)),
    "self-similarity": lambda a: verify.check_self_similarity(*_need(a, "H", "K"), seed=resolve_seed(a.seed)),
    "lrd": lambda a: verify.lrd_exponent(*_need(a, "H", "K")),
    "sampler-agreement": lambda a: verify.check_sampler_agreement(
        *_need(a, "H", "K"), **{k: v for k, v in _mc(a).items() if k != "tail_tol"}),
    "wiener-variance": lambda a: verify.check_wiener_variance(*_need(a, "K"), **_mc(a)),
    "volterra-route": lambda a: verify.check_volterra_route(
        *_need(a, "h"), **{k: v for k, v in _mc(a).items() if k != "tail_tol"}),
    "pvariation": lambda a: verify.pvariation_from_sampler(
        *_need(a, "H", "K"), **{k: v for k, v in _mc(a).items() if k != "tail_tol"}),
    "qv-trend": lambda a: verify.quadratic_variation_trend(
        *_need(a, "H", "K"), **{k: v for k, v in _mc(a).items() if k != "tail_tol"}),
    "weak-approx": lambda a: verify.check_weak_approx(
        *_need(a, "H", "K"), theta=a.theta, eps_values=tuple(sorted({0.5, 0.2, a.eps}, reverse=True)),
        **_mc(a)),
}


def cmd_verify(args):
    report = SUITES[args.suite](args)
    doc = report.to_dict(timing=args.timing)
    doc["cli"] = echo(args)
    write_atomic(args.out, json.dumps(doc, indent=2, default=verify._jsonable) + "\n")
    print(report.summary(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {"cov": cmd_cov, "sample": cmd_sample, "verify": cmd_verify, "weak-approx": cmd_weak_approx}


def run(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(expand_args_file(argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        # echoed headers then record the seed actually used
        args.seed = resolve_seed(args.seed)
        return COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"bifbm: parameter error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"bifbm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
