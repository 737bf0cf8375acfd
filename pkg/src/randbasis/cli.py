"""Command-line front end.

Machine-readable output (CSV, JSON, fractions) goes to stdout, notes to
stderr. Exit codes: 0 success, 1 usage or input error, 2 computational
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import limitdist as ld
from .harness import (
    ConfigError,
    ExperimentConfig,
    load_summary,
    read_samples,
    run_experiment,
)
from .sampling import derive_stream, haar_orthogonal, uniform_permutation
from .weingarten import MAX_ORDER, MomentSpec, WeingartenError, haar_moment, moment_order

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty index list")
    return values


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def cmd_simulate(args) -> int:
    config = ExperimentConfig.load(args.config)
    overrides = {k: getattr(args, k) for k in ("n", "seed", "replicates") if getattr(args, k) is not None}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if overrides:
        config = ExperimentConfig.from_dict(dict(config.to_dict(), **overrides))
    summary = run_experiment(config, threads=args.threads)
    out = summary.to_dict()
    elapsed = out.pop("elapsed_seconds")
    print(json.dumps(out, indent=2))
    print(f"elapsed {elapsed:.3f} s", file=sys.stderr)
    if config.output_dir is not None:
        print(f"artifacts written to {config.output_dir}", file=sys.stderr)
    return EXIT_OK


def cmd_moment(args) -> int:
    try:
        spec = MomentSpec(tuple(args.rows), tuple(args.cols))
    except ValueError as exc:
        raise UsageError(str(exc))
    if spec.order > MAX_ORDER:
        raise UsageError(f"at most {2 * MAX_ORDER} entries supported, got {2 * spec.order}")
    if args.n is None:
        raise UsageError("--n is required")
    value = haar_moment(spec, args.n)
    order = moment_order(spec)
    print(str(value))
    print(f"decimal {float(value)!r}")
    print(f"order {order if order is not None else 'exact-zero'}")
    return EXIT_OK


def cmd_limit_cdf(args) -> int:
    if args.s is None:
        raise UsageError("--s is required")
    if not math.isfinite(args.s) or abs(args.s) > 1:
        raise UsageError(f"--s must satisfy |s| <= 1, got {args.s}")
    if args.x is not None:
        xs = np.array(args.x, dtype=np.float64)
    elif args.range is not None:
        if len(args.range) != 3 or args.range[2] < 1 or args.range[2] != int(args.range[2]):
            raise UsageError("--range expects LO,HI,COUNT with a positive integer COUNT")
        xs = np.linspace(args.range[0], args.range[1], int(args.range[2]))
    else:
        raise UsageError("give --x or --range")
    law = ld.LimitLaw.poisson_gaussian(args.s)
    cdf = np.atleast_1d(ld.limit_cdf(law, xs))
    print("x,cdf")
    for x, f in zip(xs.tolist(), cdf.tolist()):
        print(f"{_fmt(x)},{_fmt(f)}")
    return EXIT_OK


def _law_from_flags(args) -> ld.LimitLaw:
    if args.law == "gaussian":
        return ld.LimitLaw.gaussian(args.variance if args.variance is not None else 1.0)
    if args.law == "shifted_gaussian":
        if args.variance is None or args.shift is None:
            raise UsageError("shifted_gaussian needs --variance and --shift")
        return ld.LimitLaw.shifted_gaussian(args.variance, args.shift)
    if args.s is None:
        raise UsageError("poisson_gaussian needs --s")
    return ld.LimitLaw.poisson_gaussian(args.s)


def cmd_ks(args) -> int:
    values = read_samples(args.samples)
    if args.summary is not None:
        try:
            summary = load_summary(args.summary)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read summary {args.summary}: {exc}")
        try:
            law = ld.LimitLaw.from_dict(summary.limit)
        except (KeyError, ValueError):
            raise UsageError(f"summary {args.summary} declares no distributional limit")
        if summary.scenario == "goncharov":
            log_n = math.log(summary.n)
            values = (values - log_n) / math.sqrt(log_n)
    elif args.law is not None:
        try:
            law = _law_from_flags(args)
        except ValueError as exc:
            raise UsageError(str(exc))
    else:
        raise UsageError("give --summary or --law")
    ks = ld.ks_distance(values, law)
    print("ks,N")
    print(f"{_fmt(ks)},{values.shape[0]}")
    return EXIT_OK


def cmd_haar_sample(args) -> int:
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    m = haar_orthogonal(args.n, derive_stream(args.seed, args.index))
    text = "\n".join(",".join(_fmt(x) for x in row) for row in m.tolist()) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}")
    return EXIT_OK


def cmd_perm_sample(args) -> int:
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    if args.replicates < 1:
        raise UsageError("--replicates must be positive")
    for i in range(args.replicates):
        p = uniform_permutation(args.n, derive_stream(args.seed, args.index + i))
        print(",".join(str(k) for k in p.one_line()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="randbasis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", help="run an experiment from a JSON config")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", help="override output_dir")
    p.add_argument("--n", type=int, help="override dimension")
    p.add_argument("--seed", type=int, help="override seed")
    p.add_argument("--replicates", type=int, help="override replicate count")
    p.add_argument("--threads", type=int, help="worker threads (default: LAB_THREADS or CPU count)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moment", help="exact Haar orthogonal moment E[prod M_ij]")
    p.add_argument("--rows", type=_int_list, required=True, help="1-based row indices, e.g. 1,2,1,2")
    p.add_argument("--cols", type=_int_list, required=True, help="1-based column indices")
    p.add_argument("--n", type=int, required=True, help="matrix dimension")
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("limit-cdf", help="CDF of Z + sY as x,cdf CSV")
    p.add_argument("--s", type=float, required=True, help="Poisson weight s, |s| <= 1")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--x", type=_float_list, help="comma-separated evaluation points")
    g.add_argument("--range", type=_float_list, help="LO,HI,COUNT evenly spaced points (use --range=-1,1,5 for a negative LO)")
    p.set_defaults(func=cmd_limit_cdf)

    p = sub.add_parser("ks", help="KS distance of a samples.csv against a limit law")
    p.add_argument("--samples", required=True, help="samples.csv written by simulate")
    p.add_argument("--summary", help="summary.json whose declared limit is used")
    p.add_argument("--law", choices=("gaussian", "shifted_gaussian", "poisson_gaussian"))
    p.add_argument("--variance", type=float, help="gaussian variance")
    p.add_argument("--shift", type=float, help="shifted_gaussian mean")
    p.add_argument("--s", type=float, help="poisson_gaussian weight")
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("haar-sample", help="write one Haar orthogonal matrix as CSV")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed")
    p.add_argument("--index", type=int, default=0, help="stream index")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_haar_sample)

    p = sub.add_parser("perm-sample", help="uniform permutations in 1-based one-line notation")
    p.add_argument("--n", type=int, required=True, help="size")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed")
    p.add_argument("--index", type=int, default=0, help="first stream index")
    p.add_argument("--replicates", type=int, default=1, help="number of permutations")
    p.set_defaults(func=cmd_perm_sample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"randbasis {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WeingartenError, ArithmeticError, ValueError, OSError, RuntimeError) as exc:
        print(f"randbasis {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
