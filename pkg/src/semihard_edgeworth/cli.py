"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 data or domain error.

Settings resolve as: command-line flag, then ``--config`` key-value file,
then the ``EDGEWORTH_SEED`` environment variable (seed only), then the
built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Dict, List, Optional

from . import __version__
from .cumulants import estimate_cumulants, read_sample, write_sample
from .distributions import ClusterTripletConfig, Normal, NormalMixture, ShiftedGamma, simulate_triplets
from .edgeworth import Convention, EdgeworthModel, loss_expansion, recommend_batch_size
from .errors import EdgeworthError
from .report import fmt
from .sweep import sweep, validate_batch_means

log = logging.getLogger("semihard_edgeworth")

DEFAULTS = {
    "convention": "cdf",
    "tol": 1e-10,
    "seed": 42,
    "threads": 1,
    "format": None,
    "alpha": "1.0",
    "n": "4,8,16,32,64,128",
    "family": "gamma",
    "shape": 4.0,
    "scale": 1.0,
    "shift": 0.0,
    "mean": 0.0,
    "sigma": 1.0,
    "w": 0.5,
    "mu1": -1.0,
    "sigma1": 1.0,
    "mu2": 1.0,
    "sigma2": 1.0,
    "dimension": 8,
    "separation": 2.0,
    "within_sigma": 1.0,
    "distance": "euclidean",
    "n_triplets": 100_000,
    "skewness": None,
    "n_eff": None,
    "epsilon": None,
    "c_estimate": None,
}
_TYPES = {"skewness": float, "n_eff": int, "epsilon": float, "c_estimate": float}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text) -> List[float]:
    try:
        vals = [float(x) for x in str(text).replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"invalid number list: {text!r}")
    return vals


def _ints(text) -> List[int]:
    vals = _floats(text)
    if any(v != int(v) or v < 1 for v in vals):
        raise UsageError(f"batch sizes must be positive integers: {text!r}")
    return [int(v) for v in vals]


def read_config(path) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                key, sep, value = text.partition("=")
                if not sep:
                    raise UsageError(f"{path}:{lineno}: expected key = value")
                out[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    return out


def _resolve(args, config: Dict[str, str]):
    """Fill unset options from config, environment and defaults in that order."""
    for key, default in DEFAULTS.items():
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        if key in config:
            value = config[key]
        elif key == "seed" and os.environ.get("EDGEWORTH_SEED"):
            value = os.environ["EDGEWORTH_SEED"]
        else:
            value = default
        kind = _TYPES.get(key) or (None if default is None else type(default))
        if value is not None and kind is not None and kind is not str:
            try:
                value = kind(value)
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
        setattr(args, key, value)
    return args


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _reference(args):
    family = args.family.lower()
    if family == "normal":
        return Normal(args.mean, args.sigma)
    if family == "gamma":
        return ShiftedGamma(args.shape, args.scale, args.shift)
    if family == "mixture":
        return NormalMixture(args.w, args.mu1, args.sigma1, args.mu2, args.sigma2)
    raise UsageError(f"unknown family {args.family!r}")


def cmd_fit(args) -> int:
    summary = estimate_cumulants(read_sample(args.input))
    if args.format == "json":
        _emit(json.dumps(summary.as_dict(), indent=2) + "\n", args.output)
    else:
        _emit("".join(f"{k}={fmt(v) if isinstance(v, float) else v}\n"
                      for k, v in summary.as_dict().items()), args.output)
    return 0


def _model_args(args):
    if args.sigma <= 0 or not math.isfinite(args.sigma):
        raise UsageError("--sigma must be positive")
    if args.skewness is None:
        raise UsageError("--skewness is required")


def cmd_expand(args) -> int:
    _model_args(args)
    alphas = _floats(args.alpha)
    if any(a <= 0 for a in alphas):
        raise UsageError("all alpha values must be positive")
    ns = _ints(args.n)
    report = sweep(args.mean, args.sigma, args.skewness, alphas, ns,
                   Convention.parse(args.convention), with_oracle=args.with_oracle,
                   tol=args.tol, threads=args.threads)
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.output)
    return 0


def cmd_simulate(args) -> int:
    if args.n_triplets < 4:
        raise UsageError("--n-triplets must be at least 4")
    if args.dimension < 1:
        raise UsageError("--dimension must be at least 1")
    cfg = ClusterTripletConfig(args.dimension, args.separation, args.within_sigma,
                               args.distance, args.n_triplets, args.seed)
    sample = simulate_triplets(cfg, threads=args.threads)
    header = [f"tool=semihard-edgeworth {__version__}", f"source={sample.source_tag}",
              f"n_triplets={cfg.n_triplets}", f"seed={cfg.seed}"]
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_sample(sample, fh, header)
    else:
        write_sample(sample, sys.stdout, header)
    return 0


def _validate(args):
    alphas = _floats(args.alpha)
    if len(alphas) != 1 or alphas[0] <= 0:
        raise UsageError("validate takes a single positive --alpha")
    ns = _ints(args.n)
    return validate_batch_means(_reference(args), alphas[0], ns,
                                Convention.parse(args.convention), args.tol, args.threads)


def cmd_validate(args) -> int:
    report, fit = _validate(args)
    if args.format == "json":
        data = report.to_dict()
        data["fit"] = None if fit is None else {
            "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
            "c_estimate": fit.c_estimate}
        _emit(json.dumps(data, indent=2) + "\n", args.output)
    else:
        _emit(report.to_csv(), args.output)
    return 0


def cmd_recommend(args) -> int:
    _model_args(args)
    if args.epsilon is None or args.epsilon <= 0:
        raise UsageError("--epsilon must be positive")
    alphas = _floats(args.alpha)
    if len(alphas) != 1 or alphas[0] <= 0:
        raise UsageError("recommend takes a single positive --alpha")
    alpha = alphas[0]
    if args.n_eff is None or args.n_eff < 1:
        raise UsageError("--n-eff must be a positive integer")
    model = EdgeworthModel(args.mean, args.sigma, args.skewness, args.n_eff,
                           Convention.parse(args.convention))
    if args.c_estimate is not None:
        c, source = args.c_estimate, "given"
    else:
        _, fit = _validate(args)
        if fit is None:
            raise EdgeworthError("reference run gave no measurable remainder; pass --c-estimate")
        c, source = fit.c_estimate, f"validate:{args.family}"
    n = recommend_batch_size(model, alpha, args.epsilon, c)
    exp = loss_expansion(model, alpha)
    record = {"recommended_n": n, "c_estimate": c, "c_source": source,
              "epsilon": args.epsilon, "alpha": alpha, "loss_total": exp.total,
              "mean": args.mean, "sigma": args.sigma, "skewness": args.skewness,
              "n_eff": args.n_eff, "convention": model.convention.value}
    if args.skewness == 0.0:
        record["note"] = "first-order correction is zero; N is set by the measured remainder alone"
    if args.format == "json":
        _emit(json.dumps(record, indent=2) + "\n", args.output)
    else:
        _emit("".join(f"{k}={fmt(v) if isinstance(v, float) else v}\n"
                      for k, v in record.items()), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file with option defaults")
    common.add_argument("--format", choices=["csv", "json", "text"], default=None)
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    model = _Parser(add_help=False)
    model.add_argument("--mean", type=float, default=None)
    model.add_argument("--sigma", type=float, default=None)
    model.add_argument("--skewness", type=float, default=None)
    model.add_argument("--convention", choices=["cdf", "paper"], default=None)
    model.add_argument("--alpha", default=None, help="comma-separated margins")
    model.add_argument("--tol", type=float, default=None)

    ref = _Parser(add_help=False)
    ref.add_argument("--family", choices=["normal", "gamma", "mixture"], default=None)
    for name in ("shape", "scale", "shift", "w", "mu1", "sigma1", "mu2", "sigma2"):
        ref.add_argument(f"--{name}", type=float, default=None)
    ref.add_argument("--n", default=None, help="comma-separated batch sizes")

    p = _Parser(prog="semihard-edgeworth",
                description="Edgeworth analysis of the semi-hard triplet loss")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("fit", parents=[common], help="estimate cumulants of a sample file")
    s.add_argument("input")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("expand", parents=[common, model], help="tabulate the loss expansion")
    s.add_argument("--n", default=None, help="comma-separated n_eff values")
    s.add_argument("--with-oracle", action="store_true",
                   help="add quadrature of the expanded loss as oracle columns")
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("simulate", parents=[common], help="simulate triplet distance differences")
    s.add_argument("--dimension", type=int, default=None)
    s.add_argument("--separation", type=float, default=None)
    s.add_argument("--within-sigma", type=float, default=None)
    s.add_argument("--distance", choices=["euclidean", "sqeuclidean"], default=None)
    s.add_argument("--n-triplets", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("validate", parents=[common, ref, model],
                       help="error scaling against exact batch-mean laws")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("recommend", parents=[common, ref, model],
                       help="batch size for a relative-error target")
    s.add_argument("--n-eff", type=int, default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--c-estimate", type=float, default=None)
    s.set_defaults(func=cmd_recommend)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        config = read_config(args.config) if args.config else {}
        _resolve(args, config)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"semihard-edgeworth: usage error: {exc}", file=sys.stderr)
        return 1
    except (EdgeworthError, OSError) as exc:
        print(f"semihard-edgeworth: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
