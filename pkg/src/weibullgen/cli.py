"""Command-line front end: ttt, fit, select and predict.

Exit codes: 0 success, 2 input error, 3 convergence failure, 4 no admissible
model, 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import secrets
import sys
from pathlib import Path

from . import __version__
from .data_io import (
    DATASET_IDS,
    Report,
    in_test_mode,
    load_dataset,
    write_plot,
    write_report,
    write_ttt_csv,
)
from .distributions import Family
from .errors import (
    ConvergenceError,
    DegenerateSampleError,
    InputError,
    NoAdmissibleModelError,
)
from .estimation import FitResult, OptimizerConfig, Sample, fit_mle
from .prediction import DEFAULT_U, predict_maintenance
from .resampling import BootstrapConfig, bootstrap_fit
from .selection import (
    HAZARD_READING,
    diagnose_ttt_shape,
    goodness_of_fit,
    select_best,
    ttt_transform,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_NO_MODEL = 4
EXIT_USAGE = 64

log = logging.getLogger("weibullgen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _families(text: str) -> list[Family]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items or any(s.lower() == "none" for s in items):
        raise argparse.ArgumentTypeError("at least one family is required")
    if len(items) == 1 and items[0].lower() == "all":
        return list(Family)
    try:
        fams = [Family.parse(s) for s in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return list(dict.fromkeys(fams))


def _open_unit(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return x


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            x = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if x < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return x
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weibullgen", description="Fit Weibull generalizations to failure-interval data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = _Parser(add_help=False)
    common.add_argument("--dataset", required=True,
                        help=f"embedded dataset ({', '.join(DATASET_IDS)}) or path to a CSV file")
    common.add_argument("--header", action="store_true", help="skip the first row of a CSV file")
    common.add_argument("--output", type=Path, help="write the machine-readable report here")
    common.add_argument("--format", choices=("json", "csv-bundle"), default="json")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-q", "--quiet", action="store_true", help="print nothing on success")
    verbosity.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")

    fitting = _Parser(add_help=False)
    fitting.add_argument("--families", type=_families, default=list(Family),
                         help="comma-separated list of GG,GW,EW,MOW,EPW or 'all' (default)")
    fitting.add_argument("--max-iter", type=_int_at_least(1), default=OptimizerConfig.max_iter)
    fitting.add_argument("--n-starts", type=_int_at_least(1), default=OptimizerConfig.n_starts)
    fitting.add_argument("--opt-seed", type=_int_at_least(0), default=OptimizerConfig.seed,
                         help="seed for the jittered optimizer starts")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ttt", parents=[common], help="TTT curve and hazard-shape diagnosis")
    p.add_argument("--csv", type=Path, help="TTT points (default <dataset>_ttt.csv)")
    p.add_argument("--plot", type=Path, help="TTT plot (default <dataset>_ttt.svg)")

    p = sub.add_parser("fit", parents=[common, fitting], help="maximum-likelihood fits")

    p = sub.add_parser("select", parents=[common, fitting], help="fit and rank families by AICc")
    p.add_argument("--plot", type=Path, help="survival overlay of the admissible fits (SVG)")

    p = sub.add_parser("predict", parents=[common, fitting], help="maintenance interval from the selected fit")
    p.add_argument("--u", type=_open_unit, default=DEFAULT_U, help="failure quantile level (default 0.25)")
    p.add_argument("--replicates", "-B", type=_int_at_least(100), default=BootstrapConfig.replicates)
    p.add_argument("--seed", type=_int_at_least(0), help="bootstrap seed (required in test mode)")
    p.add_argument("--level", type=_open_unit, default=BootstrapConfig.level)
    p.add_argument("--workers", type=_int_at_least(1), default=1)
    return parser


def _stem(dataset: str) -> str:
    return dataset if dataset in DATASET_IDS else Path(dataset).stem


def _config_echo(args) -> dict:
    skip = {"output", "format", "quiet", "verbose", "csv", "plot"}
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if key == "families":
            value = [f.value for f in value]
        echo[key] = value
    return echo


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(max_iter=args.max_iter, n_starts=args.n_starts, seed=args.opt_seed)


def _fmt(x, digits: int = 4) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "nan"
    return f"{x:.{digits}f}"


def _out(args, text: str = "") -> None:
    if not args.quiet:
        print(text)


def _fit_all(args, sample: Sample) -> tuple[dict[Family, FitResult], list[str]]:
    fits, failures = {}, []
    opt = _optimizer(args)
    for fam in args.families:
        log.info("fitting %s", fam.value)
        try:
            fit = fit_mle(fam, sample, opt)
        except ConvergenceError as exc:
            failures.append(f"{fam.value}: {exc}")
            continue
        fits[fam] = fit
        if not fit.converged:
            failures.append(f"{fam.value}: {fit.message}")
    return fits, failures


def _print_fits(args, fits: dict[Family, FitResult]) -> None:
    for fam, fit in fits.items():
        status = "" if fit.converged else "  (NOT CONVERGED)"
        _out(args, f"{fam.value}  loglik {_fmt(fit.loglik)}{status}")
        _out(args, f"  {'parameter':<10}{'estimate':>12}{'SE':>12}{'95% lower':>12}{'95% upper':>12}")
        for name, est, se, (lo, hi) in zip(fit.params.names(), fit.params.as_array(), fit.std_errors,
                                           fit.wald_ci_95):
            _out(args, f"  {name:<10}{_fmt(float(est)):>12}{_fmt(float(se)):>12}{_fmt(lo):>12}{_fmt(hi):>12}")
        _out(args)


def _print_selection(args, gof, report) -> None:
    header = f"{'family':<7}{'aic':>11}{'aicc':>11}{'ks_d':>9}{'ks_p':>9}  admissible"
    _out(args, header)
    for fam in report.ranking:
        g = gof[fam]
        mark = "*" if fam is report.best else " "
        notes = [] if g.converged else ["not converged"]
        if not g.admissible:
            notes.append("rejected by KS (p < 0.05)")
        row = (f"{fam.value:<7}{_fmt(g.aic, 3):>11}{_fmt(g.aicc, 3):>11}{_fmt(g.ks_stat):>9}"
               f"{_fmt(g.ks_pvalue):>9}  {('yes' if g.admissible else 'no'):<11}{mark}")
        if notes:
            row += "  " + "; ".join(notes)
        _out(args, row.rstrip())
    _out(args, f"selected: {report.best.value}")


def _finish(args, report: Report) -> None:
    if args.output is not None:
        write_report(report, args.output, args.format)
        log.info("report written to %s", args.output)


def cmd_ttt(args, sample: Sample) -> int:
    curve = ttt_transform(sample)
    shape = diagnose_ttt_shape(curve)
    stem = _stem(args.dataset)
    csv_path = args.csv or Path(f"{stem}_ttt.csv")
    plot_path = args.plot or Path(f"{stem}_ttt.svg")
    write_ttt_csv(curve, csv_path)
    write_plot(curve, plot_path)
    _out(args, f"TTT shape: {shape} ({HAZARD_READING[shape]})")
    _out(args, f"wrote {csv_path} and {plot_path}")
    _finish(args, Report(dataset=args.dataset, sample=sample, config=_config_echo(args), ttt=curve,
                         ttt_shape=shape))
    return EXIT_OK


def cmd_fit(args, sample: Sample) -> int:
    fits, failures = _fit_all(args, sample)
    _print_fits(args, fits)
    _finish(args, Report(dataset=args.dataset, sample=sample, config=_config_echo(args), fits=fits))
    for f in failures:
        print(f"weibullgen: fit did not converge: {f}", file=sys.stderr)
    return EXIT_CONVERGENCE if failures else EXIT_OK


def _select(args, sample: Sample):
    fits, failures = _fit_all(args, sample)
    for f in failures:
        print(f"weibullgen: warning: {f}", file=sys.stderr)
    gof = {fam: goodness_of_fit(fit, sample) for fam, fit in fits.items()}
    return fits, gof


def cmd_select(args, sample: Sample) -> int:
    fits, gof = _select(args, sample)
    report = Report(dataset=args.dataset, sample=sample, config=_config_echo(args), fits=fits, gof=gof)
    try:
        report.selection = select_best(gof)
    except NoAdmissibleModelError:
        _finish(args, report)
        raise
    _print_selection(args, gof, report.selection)
    if args.plot is not None:
        overlay = {f: fits[f] for f in report.selection.ranking if gof[f].admissible and gof[f].converged}
        write_plot(overlay, args.plot, sample=sample)
    _finish(args, report)
    return EXIT_OK


def cmd_predict(args, sample: Sample) -> int:
    if args.seed is None:
        if in_test_mode():
            raise UsageError("--seed is required in test mode")
        args.seed = secrets.randbits(32)
        log.info("bootstrap seed %d", args.seed)
    fits, gof = _select(args, sample)
    selection = select_best(gof)
    _print_selection(args, gof, selection)
    best = fits[selection.best]
    log.info("bootstrapping %s with B=%d", best.family.value, args.replicates)
    boot = bootstrap_fit(best.family, sample,
                         BootstrapConfig(replicates=args.replicates, seed=args.seed, level=args.level,
                                         workers=args.workers),
                         base_fit=best, u=args.u)
    plan = predict_maintenance(best, args.u, boot)
    lo, hi = plan.ci
    _out(args)
    _out(args, f"y* = {_fmt(plan.y_star)} days (u = {args.u}, {plan.family.value}), "
               f"{plan.level:.0%} bootstrap CI [{_fmt(lo)}, {_fmt(hi)}], "
               f"{boot.n_effective}/{boot.n_requested} replicates used")
    _out(args, f"preventive maintenance in ~{plan.y_star_days} days after the last failure, "
               f"{plan.level:.0%} CI [{_fmt(lo, 2)}, {_fmt(hi, 2)}]")
    _finish(args, Report(dataset=args.dataset, sample=sample, config=_config_echo(args), seed=args.seed,
                         fits=fits, gof=gof, selection=selection, plan=plan, bootstrap=boot))
    return EXIT_OK


COMMANDS = {"ttt": cmd_ttt, "fit": cmd_fit, "select": cmd_select, "predict": cmd_predict}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        sample = load_dataset(args.dataset, header=args.header)
        return COMMANDS[args.command](args, sample)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"weibullgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, DegenerateSampleError) as exc:
        print(f"weibullgen: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"weibullgen: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except NoAdmissibleModelError as exc:
        print(f"weibullgen: {exc}", file=sys.stderr)
        return EXIT_NO_MODEL
    except OSError as exc:
        print(f"weibullgen: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
