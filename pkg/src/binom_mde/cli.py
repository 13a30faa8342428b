"""Command-line front end.

    binom-mde estimate --data FILE --m M [--method md|ml|e] ...
    binom-mde simulate CONFIG [--out FILE] [--format csv|json|table] ...
    binom-mde variance-curve --m M [--grid START:STOP:STEP]
    binom-mde influence --m M --p P
    binom-mde selftest

Exit status: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .asymptotics import (confidence_interval, influence_md, influence_ml,
                          variance_curve)
from .binomial_model import MAX_TRIALS, BinomialModel
from .estimators import (DisparityParams, Sample, WeightVector, estimate_e,
                         estimate_md, estimate_ml)
from .montecarlo import (ConfigError, default_threads, format_csv,
                         format_report_table, load_config, row_values,
                         run_experiment)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit status 2."""


def _g(x) -> str:
    return format(float(x), ".17g")


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return _g(v)
    return str(v)


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        try:
            fh = open(path, "w", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}")
        with fh:
            yield fh


def _write_table(path, fmt, header: Sequence[str], rows: List[Sequence]):
    with _output(path) as fh:
        if fmt == "json":
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=1)
            fh.write("\n")
        else:
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(",".join(_cell(v) for v in r) + "\n")


# ---------------------------------------------------------------------------
# estimate


def read_counts(path, m: int) -> np.ndarray:
    """One non-negative integer per line; blank lines are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    values = []
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text:
            continue
        try:
            v = int(text)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: not an integer: {text!r}")
        if not 0 <= v <= m:
            raise UsageError(f"{path}:{lineno}: value {v} outside 0..{m}")
        values.append(v)
    if not values:
        raise UsageError(f"{path}: no observations")
    return np.asarray(values, dtype=np.int64)


def read_weights(path, n: int) -> WeightVector:
    try:
        d = np.loadtxt(path, dtype=float, ndmin=1)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read weights {path}: {exc}")
    if d.size != n:
        raise UsageError(f"{path}: {d.size} weights for {n} observations")
    try:
        return WeightVector(d)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}")


def cmd_estimate(args) -> int:
    if not 1 <= args.m <= MAX_TRIALS:
        raise UsageError(f"--m must lie in [1, {MAX_TRIALS}]")
    if not 0.0 < args.level < 1.0:
        raise UsageError("--level must lie in (0, 1)")
    sample = Sample(read_counts(args.data, args.m), BinomialModel(args.m))
    report = {"method": args.method.upper(), "n": sample.n, "m": sample.m}
    if args.method == "md":
        weights = None
        if args.weights not in (None, "uniform"):
            weights = read_weights(args.weights, sample.n)
        res = estimate_md(sample, weights, tol=args.tol)
    elif args.method == "ml":
        res = estimate_ml(sample)
    else:
        try:
            params = DisparityParams(args.c1, args.c2)
        except ValueError as exc:
            raise UsageError(str(exc))
        res = estimate_e(sample, params, tol=args.tol)
    report.update(p_hat=res.p_hat, objective=res.objective, converged=res.converged,
                  at_boundary=res.at_boundary)
    if args.method == "md":
        ci = confidence_interval(sample, args.level, tol=args.tol)
        report.update(level=args.level, ci_lo=ci.lo, ci_hi=ci.hi,
                      ci_degenerate=ci.degenerate)
    with _output(args.out) as fh:
        if args.format == "json":
            json.dump(report, fh, indent=1)
            fh.write("\n")
        else:
            fh.write(",".join(report) + "\n")
            fh.write(",".join(_cell(v) for v in report.values()) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    try:
        return default_threads()
    except ConfigError as exc:
        raise UsageError(str(exc))


def cmd_simulate(args) -> int:
    import dataclasses

    try:
        config = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.replications is not None:
            overrides["replications"] = args.replications
        if overrides:
            config = dataclasses.replace(config, **overrides)
    except ConfigError as exc:
        raise UsageError(f"invalid config: {exc}")
    threads = _threads(args)
    rows = run_experiment(config, threads=threads)
    with _output(args.out) as fh:
        if args.format == "json":
            json.dump([row_values(r) for r in rows], fh, indent=1)
            fh.write("\n")
        elif args.format == "table":
            fh.write(format_report_table(rows))
        else:
            fh.write(format_csv(rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# figure data


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:step`` inclusive of ``stop`` when it lies on the grid.

    A step larger than the range yields the single point ``start``.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"malformed grid {spec!r}; expected start:stop:step")
    try:
        start, stop, step = (float(t) for t in parts)
    except ValueError:
        raise UsageError(f"malformed grid {spec!r}; expected numbers")
    if not all(math.isfinite(v) for v in (start, stop, step)) or step <= 0 or stop < start:
        raise UsageError(f"malformed grid {spec!r}; need start <= stop and step > 0")
    if not (0.0 < start < 1.0 and 0.0 < stop < 1.0):
        raise UsageError(f"grid {spec!r} must lie inside (0, 1)")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def cmd_variance_curve(args) -> int:
    if not 1 <= args.m <= MAX_TRIALS:
        raise UsageError(f"--m must lie in [1, {MAX_TRIALS}]")
    curve = variance_curve(BinomialModel(args.m), parse_grid(args.grid))
    rows = [(float(p), float(a), float(b)) for p, a, b in zip(*curve)]
    _write_table(args.out, args.format, ("p", "avar_md", "avar_ml"), rows)
    return EXIT_OK


def cmd_influence(args) -> int:
    if not 1 <= args.m <= MAX_TRIALS:
        raise UsageError(f"--m must lie in [1, {MAX_TRIALS}]")
    if not 0.0 < args.p < 1.0:
        raise UsageError("--p must lie in (0, 1)")
    model = BinomialModel(args.m)
    rows = [(z, influence_md(model, args.p, z), influence_ml(model, args.p, z))
            for z in range(args.m + 1)]
    _write_table(args.out, args.format, ("z", "if_md", "if_ml"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest(out=sys.stdout)
    return EXIT_OK if failures == 0 else EXIT_FAILURE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binom-mde",
        description="Minimum-distance estimation of the binomial success probability.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def out_opts(p, formats=("csv", "json")):
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("estimate", help="estimate p from a file of counts")
    p.add_argument("--data", required=True, help="one count per line")
    p.add_argument("--m", type=int, required=True, help="trials per observation")
    p.add_argument("--method", choices=("md", "ml", "e"), default="md")
    p.add_argument("--weights", default=None,
                   help="'uniform' (default) or a file with one weight per line")
    p.add_argument("--c1", type=float, default=DisparityParams().c1)
    p.add_argument("--c2", type=float, default=DisparityParams().c2)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1e-9)
    out_opts(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run a Monte Carlo study from a config file")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: $BINOM_MDE_THREADS or CPU count)")
    out_opts(p, ("csv", "json", "table"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("variance-curve", help="asymptotic variances over a p-grid")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--grid", default="0.001:0.999:0.001")
    out_opts(p)
    p.set_defaults(func=cmd_variance_curve)

    p = sub.add_parser("influence", help="influence functions for z = 0..m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    out_opts(p)
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"binom-mde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"binom-mde {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
