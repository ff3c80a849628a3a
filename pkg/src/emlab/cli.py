"""Command-line interface: solve, analyze, verify, check, report.

Exit codes: 0 success, 1 solver nonconvergence, 2 hypothesis violation in
strict mode, 3 invariant violation, 4 configuration error.  The only
environment variable honored is EMLAB_THREADS (BLAS/OpenMP thread count);
it must be set before heavy numerics are imported, hence the early handling
below.
"""

import os

if "EMLAB_THREADS" in os.environ:  # noqa: E402 - must precede numpy import
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["EMLAB_THREADS"])

import argparse
import json
import sys

from .errors import ConfigError
from .lagrangian import check_hypotheses
from .pipeline import (EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_INVARIANT, EXIT_OK,
                       RunReport, analyze_into, export_fields, load_config,
                       load_run, run_pipeline)


def _cmd_solve(args):
    config = load_config(args.config)
    report = run_pipeline(config, strict=args.strict)
    export_fields(report, args.out)
    print(f"exit {report.exit_code}; report written to {args.out}")
    for check in report.checks:
        mark = "PASS" if check["passed"] else "FAIL"
        print(f"  [{mark}] {check['name']}: value={check['value']} tol={check['tolerance']}")
    return report.exit_code


def _cmd_analyze(args):
    config, domain, result, report_doc = load_run(args.indir)
    report = RunReport(config=config.raw)
    report.solver = report_doc.get("solver")
    analyze_into(report, config, domain, result, strict=False)
    if report.violations:
        report.exit_code = EXIT_INVARIANT
    export_fields(report, args.indir)
    print(f"re-analysis complete; exit {report.exit_code}")
    return report.exit_code


def _cmd_verify(args):
    config, domain, result, report_doc = load_run(args.indir)
    report = RunReport(config=config.raw)
    report.solver = report_doc.get("solver")
    analyze_into(report, config, domain, result, strict=False)
    if report.violations:
        report.exit_code = EXIT_INVARIANT
    failures = 0
    for check in report.checks:
        mark = "PASS" if check["passed"] else "FAIL"
        if not check["passed"]:
            failures += 1
        print(f"[{mark}] {check['name']}: value={check['value']} "
              f"tolerance={check['tolerance']} gate={check['gate']}")
    print(f"{len(report.checks) - failures}/{len(report.checks)} checks passed")
    return report.exit_code


def _cmd_check(args):
    config = load_config(args.config)
    rep = check_hypotheses(config.model)
    print(json.dumps(rep.as_dict(), indent=2, sort_keys=True))
    if args.strict and not rep.convexity_ok:
        return EXIT_HYPOTHESIS
    return EXIT_OK


def _cmd_report(args):
    path = os.path.join(args.indir, "report.json")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    print(json.dumps(doc, indent=2, sort_keys=True))
    status = doc.get("status", {})
    hyp = doc.get("hypotheses") or {}
    if args.strict and hyp and not hyp.get("convexity_ok", True):
        return EXIT_HYPOTHESIS
    return int(status.get("exit_code", EXIT_OK))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emlab",
        description="Solve radially structured variational problems and "
                    "verify the associated tensor, maximum-principle and "
                    "integral-identity claims.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true",
                   help="escalate hypothesis violations to exit 2")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("analyze", help="re-run analyses on persisted fields")
    p.add_argument("--in", dest="indir", required=True)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("verify", help="re-check every invariant, print pass/fail")
    p.add_argument("--in", dest="indir", required=True)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("check", help="validate a config and its model hypotheses")
    p.add_argument("--config", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("report", help="print the persisted report")
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
