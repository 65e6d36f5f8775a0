"""Command-line interface.

Exit codes: 0 success, 1 malformed input, 2 usage error, 3 fit did not
converge (the report is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence

import numpy as np

from .distributions import family_from_name
from .gof import ks_pvalue, qq_points
from .mle import FitOptions, GroupedCounts, confint, fit
from .pot import exceedances, select_threshold, tail_probability
from .replication import (
    births_analysis,
    poisson_intro_experiment,
    table1_experiment,
    theorem1_ratio_check,
)
from .rng import RngStream

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3
SCHEMA_VERSION = "1"


class InputError(Exception):
    """Malformed data file; the message carries the line number."""


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# ingestion


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _parse_int(tok: str, where: str) -> int:
    tok = tok.strip()
    try:
        v = int(tok)
    except ValueError:
        raise InputError(f"{where}: expected a non-negative integer, got {tok!r}") from None
    if v < 0:
        raise InputError(f"{where}: expected a non-negative integer, got {tok!r}")
    return v


def parse_raw(text: str, name: str = "<input>") -> np.ndarray:
    """One non-negative integer per line; blank lines are ignored."""
    vals = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        vals.append(_parse_int(line, f"{name}:{i}"))
    if not vals:
        raise InputError(f"{name}: no observations")
    return np.asarray(vals, dtype=np.int64)


def parse_freq(text: str, name: str = "<input>", censored: bool = False) -> GroupedCounts:
    """CSV ``value,count`` with an optional header; with ``censored`` the last
    row must read ``>=c,count``."""
    rows = []
    for i, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if [c.strip().lower() for c in row] == ["value", "count"] and not rows:
            continue
        if len(row) != 2:
            raise InputError(f"{name}:{i}: expected 2 fields 'value,count', got {len(row)}")
        rows.append((i, row[0].strip(), row[1].strip()))
    if not rows:
        raise InputError(f"{name}: no rows")
    censor = None
    if censored:
        i, v, c = rows[-1]
        if not v.startswith(">="):
            raise InputError(f"{name}:{i}: final row must be '>=c,count' in freq_censored format")
        censor = (_parse_int(v[2:], f"{name}:{i}"), _parse_int(c, f"{name}:{i}"))
        rows = rows[:-1]
    cells: dict[int, int] = {}
    for i, v, c in rows:
        if v.startswith(">="):
            raise InputError(f"{name}:{i}: censored row only allowed last in freq_censored format")
        val = _parse_int(v, f"{name}:{i}")
        cnt = _parse_int(c, f"{name}:{i}")
        if cnt < 1:
            raise InputError(f"{name}:{i}: counts must be positive")
        if val in cells:
            raise InputError(f"{name}:{i}: duplicate value {val}")
        cells[val] = cnt
    if censor is not None and cells and censor[0] <= max(cells):
        raise InputError(f"{name}: censoring value {censor[0]} must exceed every explicit value")
    return GroupedCounts.from_mapping(cells, censor=censor)


def parse_reals(text: str, name: str = "<input>") -> np.ndarray:
    vals = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            v = float(line)
        except ValueError:
            raise InputError(f"{name}:{i}: expected a real number, got {line.strip()!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{name}:{i}: non-finite value")
        vals.append(v)
    return np.asarray(vals, dtype=float)


def load_dataset(path: str, fmt: str):
    text = _read_text(path)
    name = "<stdin>" if path == "-" else path
    if fmt == "raw":
        return parse_raw(text, name)
    return parse_freq(text, name, censored=(fmt == "freq_censored"))


def format_freq(g: GroupedCounts) -> str:
    lines = ["value,count"]
    lines += [f"{v},{c}" for v, c in zip(g.values.tolist(), g.counts.tolist())]
    if g.censor is not None:
        lines.append(f">={g.censor[0]},{g.censor[1]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON helpers


def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, int, np.floating, np.integer, np.bool_, bool)) or obj is None:
        return _num(obj)
    return obj


def dump_json(obj) -> str:
    # float repr is the shortest round-tripping form (up to 17 significant digits)
    return json.dumps(_clean(obj), indent=2, allow_nan=False)


# ---------------------------------------------------------------------------
# commands


def _add_model_args(p: argparse.ArgumentParser):
    p.add_argument("--family", required=True,
                   choices=["gpd", "dgpd", "gzd", "geometric", "poisson", "negbinomial"])
    p.add_argument("--delta", type=float, default=None,
                   help="continuity shift for --family gpd, in [0, 1)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--threshold", type=int)
    g.add_argument("--threshold-quantile", type=float)
    p.add_argument("--input", required=True, help="data file or - for standard input")
    p.add_argument("--format", default="raw", choices=["raw", "freq", "freq_censored"])
    p.add_argument("--covariate", help="file with one real per raw observation (scale trend)")
    p.add_argument("--max-iterations", type=int, default=2000)
    p.add_argument("--tolerance", type=float, default=1e-10)


def _prepare(args):
    if args.delta is not None and args.family != "gpd":
        raise UsageError("--delta applies to --family gpd only")
    delta = 0.0 if args.delta is None else args.delta
    if not 0.0 <= delta < 1.0:
        raise UsageError("--delta must lie in [0, 1)")
    if args.threshold_quantile is not None and not 0 < args.threshold_quantile < 1:
        raise UsageError("--threshold-quantile must lie in (0, 1)")
    if args.covariate and args.format != "raw":
        raise UsageError("--covariate requires --format raw")
    family = family_from_name(args.family, delta)

    data = load_dataset(args.input, args.format)
    grouped = data if isinstance(data, GroupedCounts) else GroupedCounts.from_values(data)
    if args.threshold is not None:
        u = args.threshold
    else:
        if grouped.n_censored:
            raise UsageError("--threshold-quantile needs uncensored data; pass --threshold")
        u = select_threshold(grouped, args.threshold_quantile)
    try:
        sample = exceedances(grouped, u)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    opts = FitOptions(max_iterations=args.max_iterations, tolerance=args.tolerance)
    fit_data = sample.exceedances
    if args.covariate:
        cov = parse_reals(_read_text(args.covariate), args.covariate)
        if cov.size != data.size:
            raise InputError(
                f"{args.covariate}: {cov.size} covariate values for {data.size} observations")
        keep = data >= u
        fit_data = (data[keep] - u).astype(float)
        opts.covariate = cov[keep]
    return family, sample, fit_data, opts


def _fit_report(family, sample, result, level=0.9) -> dict:
    names = result.param_names
    se = result.se
    ci = {}
    if result.covariance is not None:
        for j, name in enumerate(names):
            ci[name] = list(confint(result, level, j))
    return {
        "schema": SCHEMA_VERSION,
        "family": family.name,
        "delta": getattr(family, "delta", None),
        "threshold": sample.threshold,
        "n_total": sample.n_total,
        "n_exceed": sample.n_exceed,
        "estimates": result.params,
        "se": dict(zip(names, se.tolist())) if se is not None else {n: None for n in names},
        "ci90": ci if ci else {n: None for n in names},
        "nll": result.nll,
        "aic": result.aic,
        "bic": result.bic,
        "converged": result.converged,
        "covariance_ok": result.covariance_ok,
        "boundary": result.boundary,
        "message": result.message,
    }


def cmd_fit(args, out) -> int:
    family, sample, fit_data, opts = _prepare(args)
    result = fit(family, fit_data, opts)
    report = _fit_report(family, sample, result)
    if result.has_covariate:
        report["covariate_range"] = list(result.covariate_range)
    if args.tail_at is not None:
        if args.tail_at < sample.threshold:
            raise UsageError("--tail-at must be at least the threshold")
        est = tail_probability(result, sample, args.tail_at, level=args.level,
                               binomial=args.binomial)
        report["tail"] = {"m": est.m, "p_e": est.p_e_hat, "se": est.se,
                          "ci": list(est.ci), "level": est.level}
    if args.gof is not None:
        if args.gof < 1:
            raise UsageError("--gof needs at least one replicate")
        if result.has_covariate:
            raise UsageError("--gof is not available with --covariate")
        ks = ks_pvalue(sample.exceedances, family, result, B=args.gof, refit=args.refit,
                       rng=RngStream(args.seed))
        report["gof"] = {"ks_stat": ks.statistic, "p_value": ks.p_value, "B": ks.mc_replicates,
                         "refit": ks.refit, "n_failed": ks.n_failed}
    out.write(dump_json(report) + "\n")
    return EXIT_OK if result.converged else EXIT_NOCONV


def cmd_qq(args, out) -> int:
    family, sample, fit_data, opts = _prepare(args)
    if args.covariate:
        raise UsageError("qq is not available with --covariate")
    if args.sims < 0:
        raise UsageError("--sims must be non-negative")
    if not 0 < args.level < 1:
        raise UsageError("--level must lie in (0, 1)")
    result = fit(family, fit_data, opts, with_covariance=False)
    if sample.exceedances.n_censored:
        raise UsageError("qq needs uncensored data")
    qq = qq_points(sample.exceedances, result, n_sims=args.sims, level=args.level,
                   rng=RngStream(args.seed))
    w = csv.writer(out, lineterminator="\n")
    if args.sims > 0:
        w.writerow(["position", "empirical_q", "model_q", "lo", "hi"])
        for row in zip(qq.positions, qq.empirical, qq.model, qq.lower, qq.upper):
            w.writerow([repr(float(v)) for v in row])
    else:
        w.writerow(["position", "empirical_q", "model_q"])
        for row in zip(qq.positions, qq.empirical, qq.model):
            w.writerow([repr(float(v)) for v in row])
    return EXIT_OK if result.converged else EXIT_NOCONV


def cmd_tabulate(args, out) -> int:
    data = load_dataset(args.input, args.format)
    g = data if isinstance(data, GroupedCounts) else GroupedCounts.from_values(data)
    out.write(format_freq(g))
    return EXIT_OK


def cmd_replicate(args, out) -> int:
    which = args.experiment
    if which == "table1":
        s = table1_experiment(reps=args.reps, n=args.n, rng=RngStream(args.seed),
                              workers=args.workers)
        out.write(s.to_csv() if args.output_format == "csv" else s.to_json() + "\n")
        return EXIT_OK
    if which == "poisson-intro":
        r = poisson_intro_experiment(n=args.n, rate=args.rate, u=args.threshold,
                                     seeds=args.seeds, rng=RngStream(args.seed),
                                     workers=args.workers)
        rep = {"schema": SCHEMA_VERSION, "experiment": "poisson-intro", "n": r.n, "rate": r.rate,
               "threshold": r.threshold, "seeds": r.seeds, "mean_sigma": r.mean_sigma,
               "mean_xi": r.mean_xi, "n_failed": r.n_failed}
        out.write(dump_json(rep) + "\n")
        return EXIT_OK
    if which == "births":
        t = births_analysis()
        if args.output_format == "csv":
            w = csv.writer(out, lineterminator="\n")
            w.writerow(["family", "nll", "bic", "aic", "params"])
            for name, r in t.fits.items():
                w.writerow([name, repr(r.nll), repr(r.bic), repr(r.aic),
                            ";".join(f"{k}={v!r}" for k, v in r.params.items())])
        else:
            out.write(dump_json(t.to_dict()) + "\n")
        return EXIT_OK
    if which == "theorem1":
        dev = theorem1_ratio_check(args.s, args.u, args.k_max)
        out.write(dump_json({"schema": SCHEMA_VERSION, "experiment": "theorem1", "s": args.s,
                             "u": args.u, "k_max": args.k_max, "deviation": dev}) + "\n")
        return EXIT_OK
    raise UsageError(f"unknown experiment {which!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-extremes",
                                     description="Peaks-over-threshold models for discrete data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a tail model and print a JSON report")
    _add_model_args(p)
    p.add_argument("--tail-at", type=int, help="estimate P(X >= m) for this m")
    p.add_argument("--level", type=float, default=0.9, help="confidence level for --tail-at")
    p.add_argument("--binomial", action="store_true",
                   help="include threshold exceedance uncertainty in the tail interval")
    p.add_argument("--gof", type=int, metavar="B", help="bootstrap KS test with B replicates")
    p.add_argument("--refit", action=argparse.BooleanOptionalAction, default=True,
                   help="refit parameters inside the bootstrap (default on)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("qq", help="QQ points and simulated envelope as CSV")
    _add_model_args(p)
    p.add_argument("--sims", type=int, default=2000)
    p.add_argument("--level", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_qq)

    p = sub.add_parser("tabulate", help="convert a data file to value,count CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="raw", choices=["raw", "freq", "freq_censored"])
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("replicate", help="rerun a published experiment")
    p.add_argument("experiment", choices=["table1", "poisson-intro", "births", "theorem1"])
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=None,
                   help="processes (default from DISCRETE_EXTREMES_THREADS, else 1)")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--threshold", type=int, default=3)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--s", type=float, default=3.0)
    p.add_argument("--u", type=int, default=10_000)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--format", dest="output_format", choices=["json", "csv"], default=None)
    p.set_defaults(func=cmd_replicate)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command == "replicate":
        if args.n is None:
            args.n = 8000 if args.experiment == "table1" else 5000
        if args.output_format is None:
            args.output_format = "csv" if args.experiment == "table1" else "json"
    # build the whole output before writing so errors never leave a partial report
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(buf.getvalue())
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
