"""Command-line front end.

Subcommands: freq, contrasts, track, test, simulate, quantiles, reproduce.
Input is a single-column numeric CSV (optional header, delimiter comma /
semicolon / whitespace).  Output is CSV or JSON with identical columns.
Every command is deterministic given (input, flags, seed).

Exit codes: 0 success, 2 input error, 3 precondition violation,
4 reproduction FAIL.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .contrasts import (
    contrast_fractions,
    contrast_vs_delay,
    pattern_frequencies,
    sliding_contrast,
)
from .errors import OrdpatError, ParseError, SeriesTooShort, UnknownTable
from .nulls import batch_test, simulate_quantiles, update_quantile_cache
from .patterns import ranks_from_lex
from .processes import ProcessSpec, generate
from .reproduce import DEFAULT_SEED, run_reproduction

CACHE_DIR_ENV = "ORDPAT_CACHE_DIR"
CACHE_FILE_NAME = "quantiles.txt"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_REPRODUCE_FAIL = 4


def read_series(path: str) -> np.ndarray:
    """Read one numeric column; raises ParseError with the offending line."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    values: list[float] = []
    first_data_line = True
    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line:
            continue
        for delim in (",", ";"):
            line = line.replace(delim, " ")
        fields = line.split()
        if len(fields) != 1:
            raise ParseError(f"expected one column, got {len(fields)} fields", lineno)
        try:
            value = float(fields[0])
        except ValueError:
            if first_data_line:  # tolerate a single header line
                first_data_line = False
                continue
            raise ParseError(f"not a number: {fields[0]!r}", lineno) from None
        if not math.isfinite(value):
            raise ParseError(f"non-finite value {fields[0]!r}", lineno)
        values.append(value)
        first_data_line = False
    if not values:
        raise ParseError("no numeric data found")
    return np.asarray(values, dtype=np.float64)


def _fmt(value) -> object:
    """Normalise one cell for output; floats get a fixed 12-digit form."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return float(f"{float(value):.12g}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def write_rows(rows: list[dict], columns: list[str], fmt: str, out: str | None) -> None:
    """Emit rows as CSV or as a JSON array with identical columns."""
    formatted = [{c: _fmt(r.get(c, "")) for c in columns} for r in rows]
    if fmt == "json":
        text = json.dumps(formatted, indent=2) + "\n"
    else:
        lines = [",".join(columns)]
        for r in formatted:
            lines.append(",".join("" if r[c] == "" else str(r[c]) for c in columns))
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pattern_name(m: int, index: int) -> str:
    return "".join(str(r) for r in ranks_from_lex(m, index))


def cmd_freq(args) -> int:
    x = read_series(args.input)
    delays = range(1, args.dmax + 1) if args.dmax else [args.d]
    rows = []
    for d in delays:
        dist = pattern_frequencies(x, args.m, d, args.ties, args.seed)
        for idx, p in enumerate(dist.probs):
            rows.append(
                {
                    "d": d,
                    "pattern": _pattern_name(args.m, idx),
                    "index": idx,
                    "count": int(dist.counts[idx]),
                    "n_effective": dist.n_effective,
                    "probability": float(p),
                }
            )
    write_rows(
        rows,
        ["d", "pattern", "index", "count", "n_effective", "probability"],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_contrasts(args) -> int:
    x = read_series(args.input)
    rows = []
    names = ("beta", "tau", "gamma", "delta", "alpha")
    if args.rational:
        for d in range(1, args.dmax + 1):
            dist = pattern_frequencies(x, 3, d, args.ties, args.seed)
            exact = contrast_fractions(dist)
            row = {"d": d, "delta2": float(dist.distance_to_uniform_sq())}
            row.update({name: str(exact[name]) for name in names})
            rows.append(row)
    else:
        for d, c in enumerate(contrast_vs_delay(x, args.dmax, 3, args.ties, args.seed), 1):
            row = {"d": d, "delta2": c.delta2}
            row.update({name: getattr(c, name) for name in names})
            rows.append(row)
    write_rows(rows, ["d", *names, "delta2"], args.format, args.out)
    return EXIT_OK


def cmd_track(args) -> int:
    x = read_series(args.input)
    track = sliding_contrast(
        x,
        epoch_len=args.epoch,
        hop=args.hop,
        smoothing_len=args.smooth,
        m=3,
        d=args.d,
        tie_policy=args.ties,
        jitter_seed=args.seed,
    )
    rows = []
    for i in range(track.n_epochs):
        rows.append(
            {
                "epoch": i,
                "start": int(track.starts[i]),
                "alpha": track.alpha[i],
                "tau": track.tau[i],
                "beta": track.beta[i],
                "gamma": track.gamma[i],
                "delta": track.delta[i],
                "alpha_smooth": track.alpha_smooth[i],
                "valid": bool(track.valid[i]),
            }
        )
    write_rows(
        rows,
        ["epoch", "start", "alpha", "tau", "beta", "gamma", "delta", "alpha_smooth", "valid"],
        args.format,
        args.out,
    )
    return EXIT_OK


def cmd_test(args) -> int:
    x = read_series(args.input)
    result = batch_test(x, d_max=args.dmax, m_list=tuple(args.m), level=args.level)
    columns = [
        "kind",
        "d",
        "statistic",
        "value",
        "p_value",
        "critical_value",
        "reject",
        "direction",
        "provenance",
        "accepted_pct",
        "larger_pct",
        "smaller_pct",
        "n",
        "n_missing",
    ]
    rows = []
    for cell in result.cells:
        if cell.missing:
            rows.append({"kind": "cell", "d": cell.d, "statistic": cell.statistic,
                         "direction": "missing"})
            continue
        rep = cell.report
        rows.append(
            {
                "kind": "cell",
                "d": cell.d,
                "statistic": cell.statistic,
                "value": rep.value,
                "p_value": rep.p_value,
                "critical_value": rep.critical_value,
                "reject": rep.reject,
                "direction": rep.direction,
                "provenance": rep.quantile_provenance or "normal",
            }
        )
    for name, s in result.summaries.items():
        rows.append(
            {
                "kind": "summary",
                "statistic": name,
                "accepted_pct": s.accepted_pct,
                "larger_pct": s.larger_pct,
                "smaller_pct": s.smaller_pct,
                "n": s.n,
                "n_missing": s.n_missing,
            }
        )
    write_rows(rows, columns, args.format, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = ProcessSpec(kind=args.kind, noise=args.noise, phi=args.phi, seed=args.seed)
    series = generate(spec, args.length)
    rows = [{"value": float(v)} for v in series]
    write_rows(rows, ["value"], args.format, args.out)
    return EXIT_OK


def _cache_path(args) -> str:
    if args.out:
        return args.out
    cache_dir = os.environ.get(CACHE_DIR_ENV, ".")
    os.makedirs(cache_dir, exist_ok=True)
    return os.path.join(cache_dir, CACHE_FILE_NAME)


def cmd_quantiles(args) -> int:
    table = simulate_quantiles(args.m, args.length, args.reps, args.seed)
    path = _cache_path(args)
    update_quantile_cache(path, table)
    for lv, val in zip(table.levels, table.values):
        sys.stdout.write(f"m={table.m} T={int(table.length)} {lv:g} {val:.6g}\n")
    sys.stdout.write(f"cache updated: {path}\n")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    kwargs = {}
    if args.table in ("brown3", "arpat") and args.length:
        kwargs["length"] = args.length
    if args.table in ("tailq", "tabi") and args.reps:
        kwargs["n_reps"] = args.reps
    if args.table != "coin":
        kwargs["seed"] = args.seed if args.seed is not None else DEFAULT_SEED
    report = run_reproduction(args.table, **kwargs)
    rows = [
        {
            "cell": c.name,
            "value": c.value,
            "expected": c.expected,
            "tol": c.tol,
            "status": "PASS" if c.passed else "FAIL",
        }
        for c in report.cells
    ]
    write_rows(rows, ["cell", "value", "expected", "tol", "status"], args.format, args.out)
    for c in report.cells:
        status = "PASS" if c.passed else "FAIL"
        sys.stderr.write(f"{status} {report.table}/{c.name}\n")
    return EXIT_OK if report.passed else EXIT_REPRODUCE_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordpat",
        description="Ordinal-pattern analysis of univariate time series.",
    )
    parser.add_argument("--version", action="version", version=f"ordpat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, input_required=True):
        if input_required:
            p.add_argument("--input", required=True, help="single-column numeric CSV")
        p.add_argument("--ties", choices=("skip", "jitter"), default="skip")
        p.add_argument("--seed", type=int, default=None,
                       help="seed (jitter tie policy and simulations)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("freq", help="pattern frequencies")
    add_common(p)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--dmax", type=int, default=None, help="sweep d = 1..dmax")
    p.set_defaults(fn=cmd_freq)

    p = sub.add_parser("contrasts", help="contrast-vs-delay table (m = 3)")
    add_common(p)
    p.add_argument("--dmax", type=int, default=1)
    p.add_argument("--rational", action="store_true",
                   help="report contrasts as exact rationals of counts")
    p.set_defaults(fn=cmd_contrasts)

    p = sub.add_parser("track", help="sliding-epoch contrast tracks (m = 3)")
    add_common(p)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--epoch", type=int, required=True, help="epoch length, samples")
    p.add_argument("--hop", type=int, default=None, help="epoch hop (default epoch)")
    p.add_argument("--smooth", type=int, default=1, help="moving-average length, epochs")
    p.set_defaults(fn=cmd_track)

    p = sub.add_parser("test", help="serial-dependence tests per delay")
    add_common(p)
    p.add_argument("--m", type=int, nargs="+", default=[3, 4], choices=(3, 4))
    p.add_argument("--dmax", type=int, default=1)
    p.add_argument("--level", type=float, default=0.95, choices=(0.95, 0.99, 0.999))
    p.set_defaults(fn=cmd_test)

    p = sub.add_parser("simulate", help="generate a series")
    add_common(p, input_required=False)
    p.add_argument("--kind", required=True,
                   choices=("white_noise", "symmetric_random_walk", "geometric_bm", "ar1"))
    p.add_argument("--noise", default="normal",
                   choices=("normal", "uniform", "bernoulli", "triangular", "exponential"))
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--length", type=int, required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("quantiles", help="simulate Z quantiles and update the cache")
    add_common(p, input_required=False)
    p.add_argument("--m", type=int, required=True, choices=(3, 4))
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--reps", type=int, default=100_000)
    p.set_defaults(fn=cmd_quantiles)

    p = sub.add_parser("reproduce", help="recompute a reference table and report PASS/FAIL")
    add_common(p, input_required=False)
    p.add_argument("--table", required=True)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.set_defaults(fn=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "hop", None) is None and args.command == "track":
        args.hop = args.epoch
    try:
        return args.fn(args)
    except (ParseError, UnknownTable, FileNotFoundError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (OrdpatError, ValueError) as exc:
        sys.stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
