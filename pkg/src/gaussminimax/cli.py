"""Command-line entry point: ``gaussminimax <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence, TextIO

from .bounds import beta_bounds
from .hypotheses import read_pair
from .lrtest import DegenerateLr, InsufficientSamples, calibrate_threshold, estimate_beta
from .maximalset import f_report, membership
from .pdlinalg import NotPositiveDefinite
from .scenarios import ExperimentConfig, run_scenario


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _row(out: TextIO, header: Sequence[str], values: Sequence, with_header: bool) -> None:
    if with_header:
        out.write(",".join(header) + "\n")
    out.write(",".join(_fmt(v) for v in values) + "\n")


def _cmd_calibrate(args, out: TextIO) -> int:
    pair = read_pair(args.pair)
    th = calibrate_threshold(pair, args.alpha, args.samples, args.seed, workers=args.workers)
    a = th.achieved_alpha
    _row(out, ["gamma", "value", "log_value", "std_err", "n_samples", "seed"],
         [th.gamma, a.value, a.log_value, a.std_err, a.n_samples, args.seed], args.header)
    return 0


def _cmd_beta(args, out: TextIO) -> int:
    dec, truth = read_pair(args.decision), read_pair(args.truth)
    est = estimate_beta(dec, truth, args.gamma, args.samples, args.seed, method=args.method, workers=args.workers)
    _row(out, ["value", "log_value", "std_err", "n_samples", "seed"],
         [est.value, est.log_value, est.std_err, est.n_samples, est.seed], args.header)
    return 0


def _report_dict(rep) -> dict:
    return {
        "log_f": rep.log_f,
        "K": rep.K,
        "b_pd": rep.b_pd,
        "d": None if rep.d is None else [float(x) for x in rep.d],
        "B": rep.B.dense().tolist(),
    }


def _cmd_membership(args, out: TextIO) -> int:
    ref, cand = read_pair(args.ref), read_pair(args.cand)
    verdict = membership(ref, cand, args.slack)
    rep = f_report(ref, cand)
    out.write(f"{verdict.status.value} log_f={_fmt(verdict.log_f)} slack={_fmt(verdict.slack_used)}\n")
    if args.format == "json":
        out.write(json.dumps(_report_dict(rep)) + "\n")
    else:
        _row(out, ["log_f", "K", "b_pd"], [rep.log_f, rep.K, int(rep.b_pd)], True)
    return 0


def _cmd_fvalue(args, out: TextIO) -> int:
    out.write(_fmt(f_report(read_pair(args.ref), read_pair(args.cand)).log_f) + "\n")
    return 0


def _cmd_bounds(args, out: TextIO) -> int:
    pair = read_pair(args.pair)
    bb = beta_bounds(pair, args.alpha, args.mu0, p=args.p, C=args.C,
                     n_samples=args.samples, seed=args.seed, workers=args.workers)
    _row(out, ["kl", "lower_log_beta", "upper_log_beta", "mu0", "mu0_method", "alpha"],
         [bb.kl, bb.lower_log_beta, bb.upper_log_beta, bb.mu0, bb.mu0_method, bb.alpha], args.header)
    return 0


def _cmd_scenario(args, out: TextIO) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.workers is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "workers": args.workers})
    result = run_scenario(cfg, args.out)
    for v in result.violations:
        out.write(f"violation: {v}\n")
    return 2 if result.violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussminimax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def mc(p):
        p.add_argument("--samples", type=int, required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--header", action="store_true", help="print a CSV header line first")

    p = sub.add_parser("calibrate", help="LR threshold at a false-alarm level")
    p.add_argument("--pair", required=True)
    p.add_argument("--alpha", type=float, required=True)
    mc(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("beta", help="miss probability of a decision pair's detector")
    p.add_argument("--decision", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--method", choices=["tilted", "plain"], default="tilted")
    mc(p)
    p.set_defaults(func=_cmd_beta)

    p = sub.add_parser("membership", help="maximal-set membership of a candidate pair")
    p.add_argument("--ref", required=True)
    p.add_argument("--cand", required=True)
    p.add_argument("--slack", type=float, default=0.0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=_cmd_membership)

    p = sub.add_parser("fvalue", help="ln f for a reference/candidate pair")
    p.add_argument("--ref", required=True)
    p.add_argument("--cand", required=True)
    p.set_defaults(func=_cmd_fvalue)

    p = sub.add_parser("bounds", help="bounds on ln beta")
    p.add_argument("--pair", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mu0", choices=["lemma1", "empirical", "chebyshev"], required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("scenario", help="run a scenario config and write CSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_scenario)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except (DegenerateLr, InsufficientSamples, NotPositiveDefinite, ValueError, OSError) as exc:
        print(f"gaussminimax: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
