"""``gaussqfim`` command-line entry point.

Exit codes: 0 success, 1 validation or computation failure, 2 usage or
parse error.
"""

import argparse
import itertools
import json
import sys

import numpy as np

from . import specio
from .channels import model_derivatives
from .estimation import full_report
from .exceptions import GaussQfimError, InvalidArgumentError, SpecError, UnsupportedDerivativeError
from .verify import derivative_check, residuals

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _derivatives(spec):
    try:
        return model_derivatives(spec, mode="analytic")
    except UnsupportedDerivativeError:
        return model_derivatives(spec, mode="finite_difference")


def _checks(spec):
    md = _derivatives(spec)
    reports = residuals(md)
    if not spec.probe.names():
        reports.append(derivative_check(spec))
    return md, reports


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_example(args):
    try:
        spec = specio.builtin_model(
            args.name,
            nbar=args.nbar,
            r=args.r,
            phi=args.phi,
            alpha_re=args.alpha_re,
            alpha_im=args.alpha_im,
        )
    except InvalidArgumentError as exc:
        print(f"gaussqfim example: {exc}", file=sys.stderr)
        return EXIT_USAGE
    md, checks = _checks(spec)
    report = full_report(md, args.measurements)
    if args.format == "json":
        doc = {
            "example": args.name,
            "model": specio.model_spec_to_obj(spec),
            "report": specio.report_obj(report),
            "residuals": [specio.residual_obj(r) for r in checks],
            "residuals_passed": all(r.passed for r in checks),
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        rows = specio.report_rows(report)
        rows.append(("residuals_passed", int(all(r.passed for r in checks))))
        sys.stdout.write(specio.csv_text(["quantity", "value"], rows))
    return EXIT_OK


def run_sweep(sweep, warn=None):
    """Evaluate every grid point; returns ``(header, rows, failures)``."""
    warn = warn or (lambda msg: print(msg, file=sys.stderr))
    names = [a.name for a in sweep.axes]
    header = names + specio.output_columns(sweep.outputs, sweep.model.parameters)
    n_out = len(header) - len(names)
    rows, failures = [], 0
    for point in itertools.product(*(a.points() for a in sweep.axes)):
        assignment = list(zip(names, point))
        try:
            model = specio.model_at(sweep.model, assignment)
            report = full_report(_derivatives(model), sweep.num_measurements)
            values = specio.report_outputs(report, sweep.outputs)
        except (GaussQfimError, np.linalg.LinAlgError, ZeroDivisionError) as exc:
            failures += 1
            where = ", ".join(f"{k}={specio.format_number(v)}" for k, v in assignment)
            warn(f"gaussqfim sweep: warning: point ({where}) failed: {exc}")
            values = [float("nan")] * n_out
        rows.append(list(point) + values)
    return header, rows, failures


def cmd_sweep(args):
    try:
        sweep = specio.parse_sweep_spec(_read(args.spec))
    except OSError as exc:
        print(f"gaussqfim sweep: cannot read {args.spec}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        print(f"gaussqfim sweep: {args.spec}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    header, rows, failures = run_sweep(sweep)
    if args.format == "csv":
        text = specio.csv_text(header, rows)
    else:
        doc = {
            "columns": header,
            "rows": [[specio.json_number(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, indent=2) + "\n"
    try:
        _write(args.out, text)
    except OSError as exc:
        print(f"gaussqfim sweep: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    if rows and failures == len(rows):
        print("gaussqfim sweep: every grid point failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_check(args):
    if (args.spec is None) == (args.example is None):
        print("gaussqfim check: give exactly one of --spec or --example", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.spec is not None:
            spec = specio.parse_model_spec(_read(args.spec))
        else:
            spec = specio.builtin_model(args.example)
    except OSError as exc:
        print(f"gaussqfim check: cannot read {args.spec}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecError, InvalidArgumentError) as exc:
        print(f"gaussqfim check: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _, reports = _checks(spec)
    except GaussQfimError as exc:
        print(f"FAIL evaluation ({exc})")
        return EXIT_FAIL
    for r in reports:
        print(r.describe())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gaussqfim",
        description="Quantum Fisher information matrices and Cramer-Rao bounds for Gaussian models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("example", help="evaluate a built-in example model")
    ex.add_argument("name", choices=sorted(specio.EXAMPLE_DEFAULTS))
    ex.add_argument("--nbar", type=float)
    ex.add_argument("--r", type=float)
    ex.add_argument("--phi", type=float)
    ex.add_argument("--alpha-re", type=float, dest="alpha_re")
    ex.add_argument("--alpha-im", type=float, dest="alpha_im")
    ex.add_argument("--measurements", type=_positive_int, default=1)
    ex.add_argument("--format", choices=("json", "csv"), default="json")
    ex.set_defaults(func=cmd_example)

    sw = sub.add_parser("sweep", help="evaluate a model over a parameter grid")
    sw.add_argument("--spec", required=True, help="sweep spec JSON file ('-' for stdin)")
    sw.add_argument("--out", required=True, help="output file ('-' for stdout)")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.set_defaults(func=cmd_sweep)

    ck = sub.add_parser("check", help="print residual reports for a model")
    ck.add_argument("--spec", help="model spec JSON file ('-' for stdin)")
    ck.add_argument("--example", choices=sorted(specio.EXAMPLE_DEFAULTS))
    ck.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GaussQfimError as exc:
        print(f"gaussqfim {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
