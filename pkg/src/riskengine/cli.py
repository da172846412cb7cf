"""Command-line front end: reproducible analyses with file outputs.

Every run writes its primary outputs plus one manifest (JSON next to the
main output) recording the resolved configuration, the SHA-256 of the input
file, the seed and the tool version. Stochastic commands require an explicit
seed; identical invocations produce byte-identical files.

Exit codes: 0 ok, 2 data error, 3 fit/estimation failure, 4 bad
configuration, 5 statistically infeasible request.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import breaches, evaluate, write_breach_csv
from .connectedness import connectedness_table, fit_var, write_edges_json, write_table_csv
from .data import CsvSchema, load_csv, load_multi_csv, to_log_returns
from .errors import ConfigError, DataError, EstimationError, TailTooSmallError
from .garch import GarchFit, fit as fit_garch
from .mathstat import qq_points, write_qq_csv
from .montecarlo import McConfig, run_mc, write_term_csv
from .var_engine import METHODS, VarConfig, rolling_var, write_var_csv

EXIT_OK = 0
EXIT_DATA = 2
EXIT_FIT = 3
EXIT_CONFIG = 4
EXIT_INFEASIBLE = 5


class FitDidNotConverge(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems are configuration errors, not the default argparse code 2
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path, command: str, config: dict, input_path,
                    seed, outputs) -> None:
    manifest = {
        "command": command,
        "config": config,
        "input_sha256": _sha256(input_path),
        "seed": seed,
        "version": __version__,
        "outputs": [str(p) for p in outputs],
    }
    path = Path(str(out_path) + ".manifest.json")
    with path.open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_returns(args):
    kind = "price" if args.prices else "return"
    schema = CsvSchema(date_column=args.date_column,
                       value_column=args.value_column,
                       value_kind=kind)
    series = load_csv(args.input, schema)
    if args.prices:
        series = to_log_returns(series)
    return series


def _fitted(series) -> GarchFit:
    fitted = fit_garch(series)
    if not fitted.converged:
        raise FitDidNotConverge("GARCH estimation did not converge")
    return fitted


def _cmd_qq(args) -> int:
    series = _load_returns(args)
    if args.garch:
        fitted = _fitted(series)
        points = qq_points(fitted.z, mean=0.0, sd=1.0)
        mode = "garch"
    else:
        r = series.returns
        points = qq_points(r, mean=float(np.mean(r)),
                           sd=float(np.std(r, ddof=1)))
        mode = "mean-match"
    write_qq_csv(points, args.out)
    _write_manifest(args.out, "qq",
                    {"mode": mode, "date_column": args.date_column,
                     "value_column": args.value_column, "prices": args.prices},
                    args.input, None, [args.out])
    return EXIT_OK


def _cmd_var(args) -> int:
    series = _load_returns(args)
    methods = list(METHODS) if args.method == "all" else [args.method]
    fitted = _fitted(series) if any(m != "hs" for m in methods) else None
    columns = [
        rolling_var(series, fitted,
                    VarConfig(level=args.level, window=args.window, method=m))
        for m in methods
    ]
    write_var_csv(columns, args.out)
    _write_manifest(args.out, "var",
                    {"method": args.method, "level": args.level,
                     "window": args.window, "date_column": args.date_column,
                     "value_column": args.value_column, "prices": args.prices},
                    args.input, None, [args.out])
    return EXIT_OK


def _breach_csv_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".breaches.csv")


def _cmd_backtest(args) -> int:
    series = _load_returns(args)
    fitted = _fitted(series) if args.method != "hs" else None
    var_series = rolling_var(
        series, fitted,
        VarConfig(level=args.level, window=args.window, method=args.method))
    b = breaches(var_series)
    report = evaluate(b, args.level)
    payload = report.to_dict()
    payload["method"] = args.method
    payload["level"] = args.level
    with Path(args.out).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    breach_path = _breach_csv_path(args.out)
    write_breach_csv(b, breach_path)
    _write_manifest(args.out, "backtest",
                    {"method": args.method, "level": args.level,
                     "window": args.window, "date_column": args.date_column,
                     "value_column": args.value_column, "prices": args.prices},
                    args.input, None, [args.out, breach_path])
    return EXIT_OK


def _cmd_mc(args) -> int:
    series = _load_returns(args)
    fitted = _fitted(series)
    cfg = McConfig(seed=args.seed, n_paths=args.paths, horizon=args.horizon,
                   level=args.level, innovation=args.innovation)
    ts = run_mc(fitted, cfg)
    write_term_csv(ts, args.out)
    _write_manifest(args.out, "mc",
                    {"innovation": args.innovation, "paths": args.paths,
                     "horizon": args.horizon, "level": args.level,
                     "date_column": args.date_column,
                     "value_column": args.value_column, "prices": args.prices},
                    args.input, args.seed, [args.out])
    return EXIT_OK


def _cmd_connectedness(args) -> int:
    series = load_multi_csv(args.input, date_column=args.date_column)
    model = fit_var(series, order=args.order)
    table = connectedness_table(model, horizon=args.horizon)
    write_table_csv(table, series.names, args.out)
    edges_path = Path(args.out).with_suffix(".edges.json")
    write_edges_json(table, series.names, edges_path)
    _write_manifest(args.out, "connectedness",
                    {"order": args.order, "horizon": args.horizon,
                     "date_column": args.date_column},
                    args.input, None, [args.out, edges_path])
    return EXIT_OK


def _add_input_options(sub, value_default: str) -> None:
    sub.add_argument("input", help="input CSV file")
    sub.add_argument("--date-column", default="date")
    sub.add_argument("--value-column", default=value_default)
    sub.add_argument("--prices", action="store_true",
                     help="treat values as prices and convert to log returns")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riskengine",
                     description="VaR estimation, backtesting, Monte Carlo "
                                 "term structures and connectedness tables.")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    qq = commands.add_parser("qq", help="QQ points of returns or residuals")
    _add_input_options(qq, "return")
    mode = qq.add_mutually_exclusive_group(required=True)
    mode.add_argument("--mean-match", action="store_true",
                      help="raw returns vs a normal with matched mean/sd")
    mode.add_argument("--garch", action="store_true",
                      help="GARCH standardized residuals vs N(0,1)")
    qq.add_argument("--out", required=True)

    var = commands.add_parser("var", help="rolling one-day VaR series")
    _add_input_options(var, "return")
    var.add_argument("--method", default="all",
                     choices=["hs", "garch-n", "fhs", "all"])
    var.add_argument("--level", type=float, default=0.05)
    var.add_argument("--window", type=int, default=200)
    var.add_argument("--out", required=True)

    backtest = commands.add_parser("backtest",
                                   help="breach counts and coverage tests")
    _add_input_options(backtest, "return")
    backtest.add_argument("--method", default="fhs",
                          choices=["hs", "garch-n", "fhs"])
    backtest.add_argument("--level", type=float, default=0.05)
    backtest.add_argument("--window", type=int, default=200)
    backtest.add_argument("--out", required=True)

    mc = commands.add_parser("mc", help="multi-day Monte Carlo VaR/ES")
    _add_input_options(mc, "return")
    mc.add_argument("--innovation", default="normal", choices=["normal", "fhs"])
    mc.add_argument("--paths", type=int, default=1000)
    mc.add_argument("--horizon", type=int, default=5)
    mc.add_argument("--level", type=float, default=0.01)
    mc.add_argument("--seed", type=int, required=True,
                    help="mandatory: runs must be reproducible")
    mc.add_argument("--out", required=True)

    conn = commands.add_parser("connectedness",
                               help="spillover table for a multivariate CSV")
    conn.add_argument("input", help="CSV with a date column and N >= 2 series")
    conn.add_argument("--date-column", default="date")
    conn.add_argument("--order", type=int, default=1, help="VAR lag order")
    conn.add_argument("--horizon", type=int, default=10)
    conn.add_argument("--out", required=True)
    return parser


_DISPATCH = {
    "qq": _cmd_qq,
    "var": _cmd_var,
    "backtest": _cmd_backtest,
    "mc": _cmd_mc,
    "connectedness": _cmd_connectedness,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "method", None):
        args.method = args.method.replace("-", "_")
    try:
        return _DISPATCH[args.command](args)
    except DataError as exc:
        print(f"riskengine: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FitDidNotConverge, EstimationError) as exc:
        print(f"riskengine: estimation error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except TailTooSmallError as exc:
        print(f"riskengine: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError) as exc:
        print(f"riskengine: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
