"""Command-line interface: ``mgfnorm <command> [flags]``.

Every run first prints a ``# config:`` line holding the fully resolved
command; re-running that command reproduces the CSV output byte for byte.
Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path

from . import tables as tbl
from .alternatives import NORMAL, AlternativeSpec, sample_alternative
from .errors import DataError, MgfNormError
from .garch import (DEFAULT_BURNIN, STRUCTURES, GarchSpec, WarpDesign, benchmark_design,
                    bootstrap_test, qmle_fit, simulate_ccc_garch, warp_speed_study)
from .io import format_params_csv, format_sample_csv, parse_params, read_sample_csv
from .linalg import scale_residuals
from .simulation import (KEY_CLI, KEY_NULL, KEY_POWER, McConfig, estimate_critical_values,
                         iid_test, rejection_rate, replicate_rng, simulate_statistics,
                         upper_quantile)

log = logging.getLogger("mgfnorm")

IID_BETA = 3.0
GARCH_BETA = 2.1
DEFAULT_SEED = 20_180_101


def _floats(text: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return vals


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _alt(text: str) -> AlternativeSpec:
    try:
        return AlternativeSpec.parse(text)
    except MgfNormError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mgfnorm", description="MGF-based tests of multivariate normality.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    p.subcommands = sub.choices

    def common(sp, beta_default, reps_default=None):
        sp.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        sp.add_argument("--workers", type=_positive_int, default=1)
        sp.add_argument("--out", type=Path, help="write CSV output here (default: stdout)")
        if beta_default is not None:
            sp.add_argument("--beta", type=_floats, default=(beta_default,),
                            help=f"weight parameter(s), comma separated (default {beta_default})")
        if reps_default is not None:
            sp.add_argument("--reps", type=_positive_int, default=reps_default)

    sp = sub.add_parser("test", help="test i.i.d. data in a CSV file")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--alpha", type=float, default=0.05)
    common(sp, IID_BETA, 1000)

    sp = sub.add_parser("critvals", help="Monte Carlo critical values")
    sp.add_argument("--d", type=_positive_int, required=True)
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--alpha", type=_floats, default=(0.05, 0.10))
    common(sp, IID_BETA, 10_000)

    sp = sub.add_parser("power", help="i.i.d. power against an alternative")
    sp.add_argument("--alt", type=_alt, required=True)
    sp.add_argument("--d", type=_positive_int, required=True)
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--alpha", type=float, default=0.05)
    common(sp, IID_BETA, 10_000)

    sp = sub.add_parser("garch-sim", help="simulate a CCC-GARCH series")
    sp.add_argument("--params", type=Path, help="parameter record (JSON or CSV); default: benchmark design")
    sp.add_argument("--d", type=_positive_int, default=2)
    sp.add_argument("--gamma", type=float, default=0.4)
    sp.add_argument("--r", type=float, default=0.0)
    sp.add_argument("--n", type=_positive_int, default=300)
    sp.add_argument("--alt", type=_alt, default=NORMAL, help="innovation law (standardised)")
    sp.add_argument("--burnin", type=int, default=DEFAULT_BURNIN)
    common(sp, None)

    sp = sub.add_parser("garch-fit", help="QMLE fit of a CCC-GARCH(p,q) model")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--p", type=_positive_int, default=1)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--structure", choices=STRUCTURES, default="full")
    sp.add_argument("--json", action="store_true", help="write parameters as JSON instead of CSV")
    common(sp, None)

    sp = sub.add_parser("garch-test", help="parametric bootstrap test for GARCH innovations")
    sp.add_argument("--input", type=Path, required=True)
    sp.add_argument("--bootstrap", type=_positive_int, default=999)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--p", type=_positive_int, default=1)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--structure", choices=STRUCTURES, default="full")
    common(sp, GARCH_BETA)

    sp = sub.add_parser("garch-power", help="warp-speed level/power study")
    sp.add_argument("--alt", type=_alt, default=NORMAL)
    sp.add_argument("--d", type=_positive_int, default=2)
    sp.add_argument("--gamma", type=float, default=0.4)
    sp.add_argument("--r", type=float, default=0.0)
    sp.add_argument("--n", type=_positive_int, default=300)
    sp.add_argument("--mc", type=_positive_int, default=2000)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--structure", choices=STRUCTURES, default="full")
    common(sp, GARCH_BETA)

    sp = sub.add_parser("tables", help="regenerate a reference table with a diff report")
    sp.add_argument("which", choices=sorted(tbl.TABLES))
    sp.add_argument("--scale", choices=tbl.SCALES, default="desk")
    sp.add_argument("--reps", type=_positive_int, help="override the replicate count of the scale")
    sp.add_argument("--report", type=Path, help="write the diff report here (default: stderr)")
    sp.add_argument("--emit-gnuplot", type=Path, metavar="PATH",
                    help="write a gnuplot script plotting estimate against reference")
    common(sp, None)
    return p


def _config_line(argv) -> str:
    return "# config: mgfnorm " + " ".join(shlex.quote(a) for a in argv)


def _resolved_argv(args, parser) -> list:
    """Rebuild a command line with every option spelled out."""
    out = [args.command]
    for action in parser.subcommands[args.command]._actions:
        if action.dest == "help" or (not action.option_strings and action.dest != "which"):
            continue
        val = getattr(args, action.dest, None)
        if val is None or val is False:
            continue
        if not action.option_strings:
            out.insert(1, str(val))
            continue
        flag = action.option_strings[-1]
        if val is True:
            out.append(flag)
        elif isinstance(val, tuple):
            out += [flag, ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)]
        else:
            out += [flag, str(val)]
    return out


def _emit(args, text: str):
    if args.out:
        args.out.write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _warn_beta(betas, garch: bool):
    for b in betas:
        if b <= 2.0:
            log.warning("beta=%g <= 2: the statistic is finite but the limiting null "
                        "distribution needs beta > 2%s", b, "" if garch else "; prefer beta > 2")


def cmd_test(args):
    _warn_beta(args.beta, False)
    x = read_sample_csv(args.input)
    y = scale_residuals(x)
    lines = ["beta,t_raw,t_scaled,p_value,reject"]
    print(f"n={y.n} d={y.d} alpha={args.alpha} reps={args.reps}")
    for b in args.beta:
        res = iid_test(x, b, args.reps, args.seed, args.alpha, args.workers)
        s = res.statistic
        verdict = "reject" if res.reject else "do not reject"
        print(f"beta={b:g}  T={s.t_raw:.10g}  T/pi^(d/2)={s.t_scaled:.10g}  p={res.p_value:.4f}  -> {verdict}")
        lines.append(f"{b!r},{s.t_raw!r},{s.t_scaled!r},{res.p_value!r},{int(res.reject)}")
    if args.out:
        _emit(args, "\n".join(lines) + "\n")


def cmd_critvals(args):
    _warn_beta(args.beta, False)
    cfg = McConfig(args.reps, args.seed, args.alpha, args.workers)
    tab = estimate_critical_values(args.d, args.n, args.beta, cfg)
    for w in tab.monotonicity_warnings():
        log.warning("%s", w)
    _emit(args, tab.to_csv())


def cmd_power(args):
    _warn_beta(args.beta, False)
    null = simulate_statistics(NORMAL, args.d, args.n, args.beta, (), args.reps, args.seed,
                               (KEY_NULL, args.d, args.n), args.workers)
    alt = simulate_statistics(args.alt, args.d, args.n, args.beta, (), args.reps, args.seed,
                              (KEY_POWER, args.d, args.n), args.workers)
    lines = ["alt,d,n,beta,alpha,critical_value,rejection_rate,reps,seed"]
    for j, b in enumerate(args.beta):
        crit = upper_quantile(null.values[:, j], args.alpha)
        rate = rejection_rate(alt.values[:, j], crit)
        lines.append(f"{args.alt},{args.d},{args.n},{b!r},{args.alpha!r},{crit:.17e},{rate!r},"
                     f"{args.reps},{args.seed}")
    _emit(args, "\n".join(lines) + "\n")


def cmd_garch_sim(args):
    if args.params:
        params = parse_params(args.params.read_text())
    else:
        params = benchmark_design(args.d, args.gamma, args.r)
    params.validate()
    d = params.b.size
    rng = replicate_rng(args.seed, KEY_CLI)
    eps = sample_alternative(args.alt, args.n + args.burnin, d, rng, standardize=True)
    x = simulate_ccc_garch(params, args.n, eps, args.burnin)
    _emit(args, format_sample_csv(x, [f"x{i + 1}" for i in range(d)]))


def cmd_garch_fit(args):
    x = read_sample_csv(args.input)
    fit = qmle_fit(x, GarchSpec(x.shape[1], args.p, args.q, args.structure))
    print(f"loglik={fit.loglik:.10g} iterations={fit.iterations} converged={fit.converged}")
    text = fit.params.to_json() + "\n" if args.json else format_params_csv(fit.params)
    _emit(args, text)


def cmd_garch_test(args):
    _warn_beta(args.beta, True)
    x = read_sample_csv(args.input)
    spec = GarchSpec(x.shape[1], args.p, args.q, args.structure)
    lines = ["beta,t_raw,t_scaled,p_value,reject,bootstrap,failures"]
    for b in args.beta:
        res = bootstrap_test(x, spec, b, args.bootstrap, args.seed, args.alpha, args.workers)
        s = res.statistic
        verdict = "reject" if res.reject else "do not reject"
        print(f"n={s.n} d={s.d} beta={b:g}  T={s.t_raw:.10g}  T/pi^(d/2)={s.t_scaled:.10g}  "
              f"p={res.p_value:.4f} (bootstrap={args.bootstrap}, failed={res.failures})  -> {verdict}")
        lines.append(f"{b!r},{s.t_raw!r},{s.t_scaled!r},{res.p_value!r},{int(res.reject)},"
                     f"{args.bootstrap},{res.failures}")
    if args.out:
        _emit(args, "\n".join(lines) + "\n")


def cmd_garch_power(args):
    _warn_beta(args.beta, True)
    design = WarpDesign(benchmark_design(args.d, args.gamma, args.r), args.alt, args.n,
                        tuple(args.beta), (), structure=args.structure)
    res = warp_speed_study(design, args.mc, args.seed, args.workers)
    rates = res.rejection_rates(args.alpha)
    lines = ["alt,d,r,gamma,n,beta,alpha,rejection_rate,mc,failures,seed"]
    for (_, b), rate in rates.items():
        lines.append(f"{args.alt},{args.d},{args.r!r},{args.gamma!r},{args.n},{b!r},{args.alpha!r},"
                     f"{rate!r},{args.mc},{res.failures},{args.seed}")
    _emit(args, "\n".join(lines) + "\n")


def cmd_tables(args):
    func = tbl.TABLES[args.which]
    kw = {}
    if args.reps:
        kw[{"table1": "reps", "table2": "trials", "table3": "mc_samples"}[args.which]] = args.reps
    cells = func(args.scale, args.seed, args.workers, **kw)
    _emit(args, tbl.to_csv(cells))
    report = tbl.diff_report(cells)
    if args.report:
        args.report.write_text(report + "\n")
    else:
        sys.stderr.write(report + "\n")
    if args.emit_gnuplot:
        data = str(args.out) if args.out else f"{args.which}.csv"
        args.emit_gnuplot.write_text(tbl.gnuplot_script(cells, data))


COMMANDS = {
    "test": cmd_test, "critvals": cmd_critvals, "power": cmd_power, "garch-sim": cmd_garch_sim,
    "garch-fit": cmd_garch_fit, "garch-test": cmd_garch_test, "garch-power": cmd_garch_power,
    "tables": cmd_tables,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if getattr(args, "alpha", None) is not None:
        alphas = args.alpha if isinstance(args.alpha, tuple) else (args.alpha,)
        if not all(0.0 < a < 1.0 for a in alphas):
            parser.subcommands[args.command].print_usage(sys.stderr)
            print("mgfnorm: error: --alpha must lie in (0, 1)", file=sys.stderr)
            return 2
    print(_config_line(_resolved_argv(args, parser)))
    try:
        COMMANDS[args.command](args)
    except MgfNormError as exc:
        kind = "data error" if isinstance(exc, DataError) else "numerical failure"
        print(f"mgfnorm: {kind}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
