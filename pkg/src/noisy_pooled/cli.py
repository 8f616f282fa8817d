"""Command line entry point.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure, 3 every
trial of a required-queries run hit the non-termination cap.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import sys
from dataclasses import replace

from .errors import InvalidConfigError, WindowUndefinedError
from .harness.experiments import ExperimentSpec, all_capped, curves, run_experiment, transition_window
from .harness.presets import EXTENDED_NS, figure_spec
from .harness.results import rows_to_csv
from .model import Regime
from .noise import NoiseModel
from .theory import ThresholdQuery, noisy_query_feasibility, required_queries_bound

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CAPPED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_m_grid(text):
    try:
        start, step, stop = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("--m-grid expects start:step:stop") from None
    if step <= 0 or start < 0 or stop < start:
        raise argparse.ArgumentTypeError("--m-grid needs 0 <= start <= stop and step > 0")
    return tuple(range(start, stop + 1, step))


def _common(parser, experiment=True):
    parser.add_argument("--n", type=int, nargs="+", default=[1000])
    parser.add_argument("--theta", type=float, nargs="+")
    parser.add_argument("--zeta", type=float, nargs="+")
    parser.add_argument("--model", choices=("none", "z", "gnc", "gauss"), default="none")
    parser.add_argument("--p", type=float, nargs="+", default=[0.0])
    parser.add_argument("--q", type=float, nargs="+", default=[0.0])
    parser.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[0.0])
    parser.add_argument("--eps", type=float, default=0.05)
    parser.add_argument("--out", default=None)
    if not experiment:
        return
    parser.add_argument("--m", type=int, nargs="+")
    parser.add_argument("--m-grid", type=parse_m_grid)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--algo", choices=("greedy", "amp", "both"), default="greedy")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--oracle", action="store_true", help="check the second-neighbourhood decomposition per trial")
    parser.add_argument("--timing", action="store_true", help="fill elapsed_ms (output is then not reproducible)")
    parser.add_argument("--cap-factor", type=int, default=50)
    parser.add_argument("--stride", type=int, default=1)


def build_parser():
    parser = _Parser(prog="noisy-pooled", description="Noisy pooled data: thresholds and simulations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    th = sub.add_parser("threshold", help="print closed-form query bounds")
    _common(th, experiment=False)
    th.add_argument("--m", type=int, help="also classify Gaussian noise feasibility at this m")
    th.add_argument("--c-safe", type=float, default=1.0)
    th.add_argument("--c-fail", type=float, default=1.0)

    for name, help_ in (("required", "required number of queries"), ("success", "success rate over an m grid"),
                        ("overlap", "overlap over an m grid"), ("amp-compare", "greedy vs AMP with transition windows")):
        _common(sub.add_parser(name, help=help_))

    rp = sub.add_parser("repro", help="figure presets")
    rp.add_argument("--figure", type=int, required=True, choices=(2, 3, 4, 5, 6))
    rp.add_argument("--trials", type=int)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--n", type=int, nargs="+")
    rp.add_argument("--extended", action="store_true", help="figures 2-4 up to n = 10**5 (slow)")
    rp.add_argument("--eps", type=float)
    rp.add_argument("--algo", choices=("greedy", "amp", "both"))
    rp.add_argument("--workers", type=int, default=1)
    rp.add_argument("--timing", action="store_true")
    rp.add_argument("--out")
    return parser


def _regimes(args):
    if args.theta and args.zeta:
        raise InvalidConfigError("give --theta or --zeta, not both")
    if args.zeta:
        return tuple(Regime("linear", z) for z in args.zeta)
    return tuple(Regime("sublinear", t) for t in (args.theta or [0.25]))


def _models(args):
    """One model per parameter value; gnc pairs --p and --q positionally (a single value broadcasts)."""
    if args.model == "none":
        return (NoiseModel.exact(),)
    if args.model == "z":
        return tuple(NoiseModel.channel(p) for p in args.p)
    if args.model == "gauss":
        return tuple(NoiseModel.query(lam) for lam in args.lam)
    ps, qs = args.p, args.q
    if len(ps) != len(qs):
        if len(ps) == 1:
            ps = ps * len(qs)
        elif len(qs) == 1:
            qs = qs * len(ps)
        else:
            raise InvalidConfigError("--p and --q lists must have equal length for gnc")
    return tuple(NoiseModel.channel(p, q) for p, q in zip(ps, qs))


def _threshold(args):
    header = ("n", "k", "regime", "model", "p", "q", "lambda", "eps", "m_bound")
    records = []
    for n, regime, model in itertools.product(args.n, _regimes(args), _models(args)):
        tq = ThresholdQuery(n, regime, model.label, args.eps, model.p, model.q, model.lam)
        records.append((n, tq.k, regime.describe(), model.label, model.p, model.q, model.lam, args.eps,
                        required_queries_bound(tq)))
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(records)
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    print(" ".join(header))
    for rec in records:
        print(" ".join(str(x) for x in rec))
    if args.m is not None:
        for n, model in itertools.product(args.n, _models(args)):
            if model.variant == "query":
                verdict = noisy_query_feasibility(args.m, n, model.lam, args.c_safe, args.c_fail)
                print(f"n={n} m={args.m} lambda={model.lam:g}: {verdict.value}")
    return EXIT_OK


_KIND = {"required": "required-queries", "success": "success-rate", "overlap": "overlap", "amp-compare": "amp-compare"}


def _spec_from_args(args):
    ms = args.m_grid or (tuple(args.m) if args.m else None)
    algorithm = "both" if args.command == "amp-compare" else args.algo
    return ExperimentSpec(_KIND[args.command], tuple(args.n), _regimes(args), _models(args), ms, args.trials,
                          args.seed, algorithm, args.out, args.eps, args.cap_factor, args.stride, args.oracle,
                          args.timing)


def _report_windows(rows, stream):
    success = curves(rows, "success")
    pairs = {}
    for key, curve in success.items():
        pairs.setdefault(key[1:], {})[key[0]] = curve
    for rest, by_algo in pairs.items():
        for algo, curve in sorted(by_algo.items()):
            try:
                lo, hi = transition_window(curve)
                print(f"{algo} {' '.join(map(str, rest))}: window [{lo}, {hi}] width {hi - lo}", file=stream)
            except WindowUndefinedError as exc:
                print(f"{algo} {' '.join(map(str, rest))}: {exc}", file=stream)


def _run(spec, workers):
    if workers < 1:
        raise InvalidConfigError("--workers must be >= 1")
    rows = run_experiment(spec, workers)
    if not spec.out:
        sys.stdout.write(rows_to_csv(rows))
    if spec.kind == "amp-compare" or spec.algorithm == "both":
        _report_windows(rows, sys.stderr)
    return EXIT_CAPPED if all_capped(spec, rows) else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "threshold":
            return _threshold(args)
        if args.command == "repro":
            ns = args.n or (EXTENDED_NS if args.extended and args.figure in (2, 3, 4) else None)
            spec = figure_spec(args.figure, args.trials, args.seed, args.out, ns, args.eps, args.algo)
            if args.timing:
                spec = replace(spec, timing=True)
            return _run(spec, args.workers)
        return _run(_spec_from_args(args), args.workers)
    except InvalidConfigError as exc:
        print(f"noisy-pooled: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"noisy-pooled: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
