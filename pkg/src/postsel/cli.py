"""Command-line front end.

    postsel stepwise  --data FILE --response NAME [...]
    postsel lasso     --data FILE --response NAME [...]
    postsel bootstrap --data FILE --response NAME [...]
    postsel nullsim   --mode spacing|lemma2|selection [...]

Tables go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 data or numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from ._parallel import THREADS_ENV, default_threads
from .bootstrap import run_bootstrap
from .data_io import load_csv
from .dists import RngStream
from .lasso_test import lasso_pvalue_sequence
from .linmodel import sigma_full
from .nullsim import simulate_lemma2_null, simulate_selection_null, simulate_spacing_null
from .stepwise import METHODS, run_stepwise


@dataclass
class OutputTable:
    """Ordered columns and rows; ``None`` marks an absent value.

    ``digits`` maps column name to decimal places for float cells; floats
    in columns not listed are written with ``repr``. Integers and strings
    are written as is.
    """

    columns: list[str]
    rows: list[list]
    digits: dict[str, int] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def _cell(self, col, v):
        if v is None:
            return None
        if isinstance(v, bool) or isinstance(v, (int, str)):
            return v
        v = float(v)
        d = self.digits.get(col)
        return v if d is None else round(v, d)

    def _text(self, col, v):
        if v is None:
            return ""
        if isinstance(v, float) and col in self.digits:
            return f"{v:.{self.digits[col]}f}"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            rows = [{c: self._cell(c, v) for c, v in zip(self.columns, r)} for r in self.rows]
            return json.dumps({"columns": self.columns, "rows": rows, "meta": self.meta},
                              indent=2) + "\n"
        cells = [[self._text(c, v) for c, v in zip(self.columns, r)] for r in self.rows]
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            w.writerows(cells)
            return buf.getvalue()
        if fmt == "text":
            widths = [max(len(c), *(len(r[i]) for r in cells)) if cells else len(c)
                      for i, c in enumerate(self.columns)]
            lines = ["  ".join(c.rjust(w) for c, w in zip(self.columns, widths))]
            lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
            return "\n".join(lines) + "\n"
        raise ValueError(f"unknown format {fmt!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _parse_methods(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {','.join(METHODS)}")
    return methods


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_data_args(sp):
    sp.add_argument("--data", required=True, help="delimited data file with a header row")
    sp.add_argument("--response", required=True, help="response column name")
    sp.add_argument("--delimiter", default=";", help="field separator (default ';')")


def _add_output_args(sp, digits):
    sp.add_argument("--format", choices=["text", "csv", "json"], default="text")
    sp.add_argument("--digits", type=int, default=digits)
    sp.add_argument("--threads", type=_positive_int, default=None,
                    help=f"worker threads (default from ${THREADS_ENV}, else 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="postsel", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("stepwise", help="forward stepwise table with six p-value methods")
    _add_data_args(sp)
    sp.add_argument("--methods", type=_parse_methods, default=list(METHODS))
    sp.add_argument("--reps", type=_positive_int, default=99_999)
    sp.add_argument("--seed", type=int, default=1)
    _add_output_args(sp, 4)

    sp = sub.add_parser("lasso", help="lasso path with knot-spacing p-values")
    _add_data_args(sp)
    sp.add_argument("--reference", choices=["f2", "exp1"], default="f2")
    _add_output_args(sp, 4)

    sp = sub.add_parser("bootstrap", help="pairs bootstrap of lasso p-value sequences")
    _add_data_args(sp)
    sp.add_argument("--B", type=_positive_int, default=1000)
    sp.add_argument("--threshold", type=float, default=0.05)
    sp.add_argument("--steps", type=_positive_int, default=8)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--reference", choices=["f2", "exp1"], default="f2")
    _add_output_args(sp, 3)

    sp = sub.add_parser("nullsim", help="null-distribution simulations")
    sp.add_argument("--mode", choices=["spacing", "lemma2", "selection"], required=True)
    sp.add_argument("--n", type=_positive_int, default=None)
    sp.add_argument("--p", type=_positive_int, default=10)
    sp.add_argument("--j", type=_positive_int, default=1)
    sp.add_argument("--reps", type=_positive_int, default=5000)
    sp.add_argument("--rho", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=1)
    _add_output_args(sp, 4)
    return parser


_REFERENCE = {"f2": "f2_dferr", "exp1": "exp_mean_one"}


def cmd_stepwise(args) -> OutputTable:
    ds = load_csv(args.data, args.response, args.delimiter)
    table = run_stepwise(ds, args.methods, args.reps, args.seed, n_threads=args.threads)
    methods = list(table.methods)
    columns = ["step", "predictor", "t_stat"] + methods
    if "exact" in methods:
        columns.append("exact_se")
    rows = []
    for r in table.records:
        row = [r.step, r.name, r.t_selected] + [getattr(r, f"p_{m}") for m in methods]
        if "exact" in methods:
            row.append(r.exact_se)
        rows.append(row)
    digits = {c: args.digits for c in columns if c not in ("step", "predictor")}
    meta = {"command": "stepwise", "n": ds.n, "p": ds.p, "df_err": table.sigma.df_err,
            "sigma_hat": table.sigma.sigma_hat, "replicates": table.mc_replicates,
            "seed": args.seed}
    return OutputTable(columns, rows, digits, meta)


def cmd_lasso(args) -> OutputTable:
    ds = load_csv(args.data, args.response, args.delimiter)
    sigma = sigma_full(ds)
    seq = lasso_pvalue_sequence(ds, sigma, _REFERENCE[args.reference])
    columns = ["step", "variable", "knot", "statistic", "p_value"]
    rows = [[s.step, s.name, s.knot, s.statistic, s.p_value] for s in seq]
    digits = {c: args.digits for c in ("knot", "statistic", "p_value")}
    meta = {"command": "lasso", "n": ds.n, "p": ds.p, "df_err": sigma.df_err,
            "sigma_hat": sigma.sigma_hat, "reference": _REFERENCE[args.reference]}
    return OutputTable(columns, rows, digits, meta)


def cmd_bootstrap(args) -> OutputTable:
    ds = load_csv(args.data, args.response, args.delimiter)
    s = run_bootstrap(ds, args.B, args.threshold, _REFERENCE[args.reference], args.seed,
                      args.steps, n_threads=args.threads)
    columns = ["summary"] + [str(k) for k in range(1, s.steps + 1)]
    rows = [
        [f"cumul_p_below_{args.threshold:g}"] + [int(c) for c in s.cumulative_counts],
        ["median_p_value"] + [float(m) for m in s.median_pvalues],
    ]
    digits = {c: args.digits for c in columns[1:]}
    meta = {"command": "bootstrap", "B": s.B, "threshold": s.threshold, "seed": s.seed,
            "reference": s.reference, "redraws": s.retries}
    return OutputTable(columns, rows, digits, meta)


def cmd_nullsim(args) -> OutputTable:
    rng = RngStream(args.seed)
    if args.mode == "spacing":
        rep = simulate_spacing_null(args.n, args.p, args.j, args.reps, args.rho, rng, args.threads)
    elif args.mode == "lemma2":
        if args.n is None:
            raise ValueError("--n is required for --mode lemma2")
        rep = simulate_lemma2_null(args.n, args.p, args.reps, rng, args.threads)
    else:
        rep = simulate_selection_null(args.p, args.reps, rng, args.threads)
    columns = ["mode", "n", "p", "rho", "step", "replicates", "ks_distance", "empirical_mean",
               "reference", "dominates_chisq1"]
    row = [rep.mode, rep.n, rep.p, float(rep.rho), rep.step, rep.replicates, rep.ks_distance,
           rep.empirical_mean, rep.reference, rep.dominates_chisq1]
    digits = {"ks_distance": args.digits, "empirical_mean": args.digits, "rho": args.digits}
    return OutputTable(columns, [row], digits, {"command": "nullsim", "seed": args.seed})


COMMANDS = {"stepwise": cmd_stepwise, "lasso": cmd_lasso, "bootstrap": cmd_bootstrap,
            "nullsim": cmd_nullsim}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    if getattr(args, "threads", None) is None:
        args.threads = default_threads()
    try:
        table = COMMANDS[args.command](args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"postsel {args.command}: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(table.render(args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
