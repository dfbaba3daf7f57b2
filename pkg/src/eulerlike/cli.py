"""Command line: ``eulerlike run <scenario.json|builtin>`` and ``eulerlike list``.

Exit codes: 0 all checks pass, 1 a check (or a hypothesis of the
construction) fails, 2 the scenario is malformed, 3 numerical failure.
"""

import argparse
import csv
import datetime
import json
import logging
import os
import sys

import numpy as np

from .errors import (ConvergenceError, DomainGuardError, FlowError, ParseError, PreconditionError)
from .scenarios import BUILTINS, Scenario, ScenarioError, builtin, catalog, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_NUMERIC = 0, 1, 2, 3


def report_json(report, timestamp=True):
    out = report.as_dict()
    data = report.extras.get("data")
    if data:
        out["data"] = data
    if timestamp:
        out["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return out


def write_csv(report, path):
    """One row per (check, sample point) with its residual and coordinates."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "sample", "residual", "tol", "point"])
        for c in report.checks:
            pts = c.points if c.points is not None else [None] * len(c.residuals)
            for i, (r, p) in enumerate(zip(c.residuals, pts)):
                coords = "" if p is None else " ".join(f"{v:.12g}" for v in np.ravel(p))
                w.writerow([c.name, i, f"{float(r):.6e}", f"{c.tol:.1e}", coords])


def _load(source):
    if os.path.exists(source):
        try:
            with open(source) as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    if source in BUILTINS:
        return builtin(source)
    raise ScenarioError(f"no such file or builtin scenario: {source!r}")


def cmd_run(args):
    try:
        scn = Scenario(_load(args.scenario))
    except (ScenarioError, ParseError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        report = run_scenario(scn, tol=args.tol, samples=args.samples, radius=args.radius,
                              seed=args.seed, quad_nodes=args.quad_nodes)
    except (ScenarioError, ParseError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (FlowError, ConvergenceError, DomainGuardError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"scenario {report.scenario} (seed {report.seed})")
    print(report.summary())
    print(f"verdict: {'pass' if report.passed else 'fail'}")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report_json(report), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.csv:
        write_csv(report, args.csv)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_list(args):
    entries = catalog()
    if args.json:
        print(json.dumps(entries, indent=2))
    else:
        width = max(len(e["name"]) for e in entries)
        for e in entries:
            print(f"{e['name']:<{width}}  [{e['kind']}] {e['description']} ({e['anchor']})")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="eulerlike", description="Verify splitting theorems numerically.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file or builtin name")
    run.add_argument("scenario")
    run.add_argument("--tol", type=float, help="tolerance for the main residual checks")
    run.add_argument("--samples", type=int, help="number of sample points")
    run.add_argument("--radius", type=float, help="radius of the sampled ball around N")
    run.add_argument("--seed", type=int)
    run.add_argument("--quad-nodes", type=int, help="initial Gauss-Legendre node count")
    run.add_argument("--report", help="write the report JSON here")
    run.add_argument("--csv", help="write per-sample residuals here")
    run.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list builtin scenarios")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for key in ("samples", "quad_nodes"):
        v = getattr(args, key, None)
        if v is not None and v < 1:
            print(f"scenario error: --{key.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_SCHEMA
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
