#!/usr/bin/env python3
"""
FracSeries CLI Interface
Command-line front end: fractional derivatives, truncation sweeps, FDE
solves and special functions, all written as CSV figure data.
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd

from frac_config import (
    FracConfig, FracLogger, ConfigurationError, DomainError, NumericalError
)
from error_metrics import TruncationAnalyzer
from fde_solver import FdeKind, FdeProblem, FdeSolver
from frac_selftest import SelfTestRunner
from jet_engine import CatalogFn
from series_expansion import Definition, ExpansionConfig, Order, frac_derivative
from special_functions import fox_wright, gamma, hermite, mittag_leffler, recip_gamma


class UsageError(ConfigurationError):
    """Malformed command line."""


class FracArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting so main() owns the exit code."""

    def error(self, message: str):
        raise UsageError(message)


def parse_grid(text: str, flag: str, log: bool = False) -> np.ndarray:
    """'start:end:count' to a linear (or geometric) grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{flag} expects start:end:count, got '{text}'")
    try:
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"{flag} expects start:end:count, got '{text}'")
    if count < 1:
        raise UsageError(f"{flag} needs a positive count, got {count}")
    if log:
        if not (start > 0 and end > 0):
            raise UsageError(f"{flag} with --log-grid needs positive endpoints")
        return np.geomspace(start, end, count)
    return np.linspace(start, end, count)


def parse_list(text: str, flag: str, cast=float) -> list:
    try:
        return [cast(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects a comma-separated list, got '{text}'")


def parse_pairs(text: Optional[str], flag: str) -> List[Tuple[float, float]]:
    """'a:A,b:B' to [(a, A), (b, B)]."""
    if not text:
        return []
    pairs = []
    for item in text.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise UsageError(f"{flag} expects value:scale pairs, got '{item}'")
        try:
            pairs.append((float(a), float(b)))
        except ValueError:
            raise UsageError(f"{flag} expects numeric pairs, got '{item}'")
    return pairs


def format_header(command: str, config: Dict[str, Any], extra: Optional[List[str]] = None) -> str:
    """'#' lines echoing the resolved configuration and its fingerprint."""
    lines = [
        f"# fracseries {FracConfig.FRACSERIES_VERSION} csv-schema {FracConfig.CSV_SCHEMA_VERSION}",
        f"# command: {command}",
    ]
    for key in sorted(config):
        lines.append(f"# {key} = {json.dumps(config[key], sort_keys=True)}")
    lines.append(f"# fingerprint: {FracConfig.get_run_fingerprint({'command': command, **config})}")
    lines.extend(f"# {line}" for line in (extra or []))
    return FracConfig.CSV_LINE_TERMINATOR.join(lines) + FracConfig.CSV_LINE_TERMINATOR


def write_csv(frame: pd.DataFrame, header: str, out: Optional[str],
              stream: Optional[TextIO] = None) -> None:
    body = frame.to_csv(index=False, float_format=FracConfig.CSV_FLOAT_FORMAT,
                        lineterminator=FracConfig.CSV_LINE_TERMINATOR)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(header + body)
    else:
        (stream or sys.stdout).write(header + body)


def fmt(value: float) -> str:
    return FracConfig.CSV_FLOAT_FORMAT % value


class FracCLI:
    """Command-line interface for FracSeries operations."""

    def __init__(self, stream: Optional[TextIO] = None):
        self.logger = FracLogger("CLI")
        self.stream = stream or sys.stdout

    def derivative(self, args) -> int:
        """One fractional derivative with its per-term trace."""
        f = CatalogFn.parse(args.fn)
        definition = Definition.parse(args.definition)
        cfg = ExpansionConfig(definition, Order(args.q), args.terms, args.base)
        result = frac_derivative(f, args.x, cfg)

        row: Dict[str, Any] = {
            "fn": f.label, "definition": definition.value, "q": args.q, "x": args.x,
            "base": args.base, "terms": args.terms, "value": result.value,
        }
        for t in result.terms:
            row[f"weight_{t.k}"] = t.weight
            row[f"derivative_{t.k}"] = t.derivative_value
            row[f"contribution_{t.k}"] = t.contribution

        config = {"fn": f.label, "definition": definition.value, "q": args.q,
                  "x": args.x, "terms": args.terms, "base": args.base}
        write_csv(pd.DataFrame([row]), format_header("deriv", config), args.out, self.stream)
        return 0

    def sweep(self, args) -> int:
        """Truncation-error sweep, or the Maclaurin comparison with --taylor."""
        f = CatalogFn.parse(args.fn)
        definition = Definition.parse(args.definition)
        q_values = parse_list(args.q, "--q")
        n_values = parse_list(args.terms, "--terms", int)
        xs = parse_grid(args.xgrid, "--xgrid", args.log_grid)
        analyzer = TruncationAnalyzer()

        config = {"fn": f.label, "definition": definition.value, "q": q_values,
                  "terms": n_values, "xgrid": args.xgrid, "log_grid": args.log_grid,
                  "reference": args.reference, "gl_grid": args.gl_grid, "taylor": args.taylor}

        if args.taylor:
            if len(q_values) != 1 or len(n_values) != 1:
                raise UsageError("--taylor takes a single --q and a single --terms value")
            frame = analyzer.taylor_comparison(f, definition, q_values[0], n_values[0],
                                               xs, args.reference)
            write_csv(frame, format_header("sweep", config), args.out, self.stream)
            return 0

        result = analyzer.truncation_sweep(f, definition, q_values, n_values, xs,
                                           args.reference, args.gl_grid)
        summary = [f"reference: {result.reference_label}"]
        for _, s in result.summary.iterrows():
            summary.append(
                f"summary q={fmt(s['q'])} N={int(s['N'])} "
                f"mean_abs_error={fmt(s['mean_abs_error'])} max_abs_error={fmt(s['max_abs_error'])}"
            )
        write_csv(result.to_frame(), format_header("sweep", config, summary), args.out, self.stream)
        return 0

    def fde(self, args) -> int:
        """Solve one of the two FDEs and compare to the exact solution."""
        grid = parse_grid(args.grid, "--grid", args.log_grid)
        try:
            kind = FdeKind(args.kind)
        except ValueError:
            raise UsageError(f"--kind must be constant or variable, got '{args.kind}'")
        problem = FdeProblem(kind, args.lam, args.q, args.terms)
        solver = FdeSolver(args.eps, args.xmax, args.steps)
        report = solver.solve_and_compare(problem, grid)

        config = {"kind": kind.value, "lambda": args.lam, "q": args.q, "terms": args.terms,
                  "grid": args.grid, "log_grid": args.log_grid, "eps": args.eps,
                  "xmax": args.xmax, "steps": args.steps}
        extra = [f"{key}: {fmt(value)}" for key, value in sorted(report.settings.items())]
        extra.append(f"max_abs_rel_error: {fmt(report.max_abs_error)}")
        frame = pd.DataFrame({
            "x": report.grid, "numeric": report.numeric,
            "exact": report.exact, "rel_error": report.rel_error,
        })
        write_csv(frame, format_header("fde", config, extra), args.out, self.stream)
        return 0

    def special(self, args) -> int:
        """Tabulate a special function over --x or --grid."""
        xs = parse_grid(args.grid, "--grid", args.log_grid) if args.grid else np.array([args.x])
        upper = parse_pairs(args.upper, "--upper")
        lower = parse_pairs(args.lower, "--lower")
        functions = {
            "gamma": gamma,
            "rgamma": recip_gamma,
            "ml": lambda z: mittag_leffler(args.alpha, args.beta, z),
            "foxwright": lambda z: fox_wright(upper, lower, z),
            "hermite": lambda z: hermite(args.k, z),
        }
        fn = functions[args.name]
        frame = pd.DataFrame({"x": xs, "value": [fn(float(z)) for z in xs]})

        config: Dict[str, Any] = {"name": args.name, "x": args.x, "grid": args.grid,
                                  "log_grid": args.log_grid}
        if args.name == "ml":
            config.update({"alpha": args.alpha, "beta": args.beta})
        elif args.name == "foxwright":
            config.update({"upper": upper, "lower": lower})
        elif args.name == "hermite":
            config["k"] = args.k
        write_csv(frame, format_header("special", config), args.out, self.stream)
        return 0

    def selftest(self, args) -> int:
        """Run the invariant suite; exit 2 if any check fails."""
        table = SelfTestRunner(args.seed).run()
        print(f"🧪 FracSeries self-test (seed {args.seed})", file=self.stream)
        print("=" * 40, file=self.stream)
        for _, row in table.iterrows():
            mark = "✅" if row["passed"] else "❌"
            print(f"{mark} {row['check']}: {row['detail']} ({row['seconds']:.3f}s)", file=self.stream)
        if args.out:
            # wall-clock seconds differ between runs
            header = format_header("selftest", {"seed": args.seed})
            write_csv(table.drop(columns=["seconds"]), header, args.out)
        failed = int((table["passed"] == 0).sum())
        print(f"{len(table) - failed}/{len(table)} checks passed", file=self.stream)
        return 0 if failed == 0 else 2


def build_parser() -> FracArgumentParser:
    parser = FracArgumentParser(
        prog="frac_cli.py",
        description="FracSeries: integer-derivative series for fractional derivatives",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Caputo half-derivative of sech with three terms
  frac_cli.py deriv --fn sech --def caputo --q 0.5 --x 1.0 --terms 3

  # Divergence of the Gaussian series
  frac_cli.py sweep --fn gaussian --q 1.5 --terms 3,20,40 --xgrid 0.05:4:512

  # Constant-coefficient FDE against its Mittag-Leffler solution
  frac_cli.py fde --kind constant --lambda 1 --grid 0.1:10:200 --out fig5.csv

  # Mittag-Leffler function on a grid
  frac_cli.py special --name ml --alpha 0.5 --beta 1 --grid -3:0:31

  # Invariant suite
  frac_cli.py selftest --seed 7
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Derivative command
    deriv_parser = subparsers.add_parser('deriv', help='Fractional derivative at one point')
    deriv_parser.add_argument('--fn', required=True, help='Catalog function, e.g. sech or power:2.5')
    deriv_parser.add_argument('--def', dest='definition', default='caputo',
                              choices=['gl', 'rl', 'caputo'], help='Definition')
    deriv_parser.add_argument('--q', type=float, default=FracConfig.FDE_ORDER, help='Order q > 0')
    deriv_parser.add_argument('--x', type=float, required=True, help='Evaluation point')
    deriv_parser.add_argument('--terms', type=int, default=3, help='Number of series terms')
    deriv_parser.add_argument('--base', type=float, default=0.0, help='Base point a (RL/Caputo)')
    deriv_parser.add_argument('--out', help='CSV output path (default: stdout)')

    # Sweep command
    default_xgrid = "{}:{}:{}".format(*FracConfig.SWEEP_DOMAIN, FracConfig.SWEEP_POINTS)
    sweep_parser = subparsers.add_parser('sweep', help='Truncation-error sweep')
    sweep_parser.add_argument('--fn', required=True, help='Catalog function')
    sweep_parser.add_argument('--def', dest='definition', default='caputo',
                              choices=['gl', 'rl', 'caputo'], help='Definition')
    sweep_parser.add_argument('--q', default=str(FracConfig.FDE_ORDER),
                              help='Comma-separated orders')
    sweep_parser.add_argument('--terms', default='2,3,5,10',
                              help='Comma-separated truncations')
    sweep_parser.add_argument('--xgrid', default=default_xgrid, help='start:end:count')
    sweep_parser.add_argument('--log-grid', action='store_true', help='Geometric spacing')
    sweep_parser.add_argument('--reference', type=int, default=FracConfig.REFERENCE_TERMS,
                              help='Terms in the reference partial sum')
    sweep_parser.add_argument('--gl-grid', type=int, default=FracConfig.GL_REFERENCE_GRID,
                              help='GL gridpoints for the Gaussian reference')
    sweep_parser.add_argument('--taylor', action='store_true',
                              help='Compare with the Maclaurin power-rule series instead')
    sweep_parser.add_argument('--out', help='CSV output path (default: stdout)')

    # FDE command
    default_grid = "{}:{}:{}".format(*FracConfig.FDE_GRID)
    fde_parser = subparsers.add_parser('fde', help='Solve a linear FDE via the truncated ODE')
    fde_parser.add_argument('--kind', default='constant', choices=['constant', 'variable'],
                            help='Coefficient kind')
    fde_parser.add_argument('--lambda', dest='lam', type=float, default=FracConfig.FDE_LAMBDA,
                            help='Coefficient lambda >= 0')
    fde_parser.add_argument('--q', type=float, default=FracConfig.FDE_ORDER, help='Order q')
    fde_parser.add_argument('--terms', type=int, default=FracConfig.FDE_TERMS,
                            help='Series terms kept in the ODE')
    fde_parser.add_argument('--grid', default=default_grid, help='Report grid start:end:count')
    fde_parser.add_argument('--log-grid', action='store_true', help='Geometric spacing')
    fde_parser.add_argument('--eps', type=float, default=FracConfig.FDE_EPS,
                            help='Inner integration endpoint')
    fde_parser.add_argument('--xmax', type=float, default=FracConfig.FDE_XMAX,
                            help='Outer integration endpoint')
    fde_parser.add_argument('--steps', type=int, default=FracConfig.FDE_STEPS, help='RK4 steps')
    fde_parser.add_argument('--out', help='CSV output path (default: stdout)')

    # Special function command
    special_parser = subparsers.add_parser('special', help='Tabulate a special function')
    special_parser.add_argument('--name', required=True,
                                choices=['gamma', 'rgamma', 'ml', 'foxwright', 'hermite'],
                                help='Function')
    special_parser.add_argument('--x', type=float, default=1.0, help='Single argument')
    special_parser.add_argument('--grid', help='Argument grid start:end:count')
    special_parser.add_argument('--log-grid', action='store_true', help='Geometric spacing')
    special_parser.add_argument('--alpha', type=float, default=1.0, help='Mittag-Leffler alpha')
    special_parser.add_argument('--beta', type=float, default=1.0, help='Mittag-Leffler beta')
    special_parser.add_argument('--k', type=int, default=0, help='Hermite degree')
    special_parser.add_argument('--upper', help='Fox-Wright upper pairs a:A,b:B')
    special_parser.add_argument('--lower', help='Fox-Wright lower pairs a:A,b:B')
    special_parser.add_argument('--out', help='CSV output path (default: stdout)')

    # Self-test command
    selftest_parser = subparsers.add_parser('selftest', help='Run the invariant suite')
    selftest_parser.add_argument('--seed', type=int, default=0, help='Random seed')
    selftest_parser.add_argument('--out', help='Optional CSV of the results')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    logger = FracLogger("CLI")

    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help()
            return 1

        cli = FracCLI()
        if args.command == 'deriv':
            return cli.derivative(args)
        elif args.command == 'sweep':
            return cli.sweep(args)
        elif args.command == 'fde':
            return cli.fde(args)
        elif args.command == 'special':
            return cli.special(args)
        elif args.command == 'selftest':
            return cli.selftest(args)
        else:
            parser.print_help()
            return 1

    except UsageError as e:
        print(f"Usage error: {str(e)}", file=sys.stderr)
        return 1
    except (DomainError, ConfigurationError) as e:
        logger.error(f"Command rejected: {str(e)}")
        print(f"Error: {str(e)}", file=sys.stderr)
        return 1
    except (NumericalError, OverflowError) as e:
        logger.error(f"Numerical failure: {str(e)}")
        print(f"Numerical error: {str(e)}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
