"""``fwp`` command line: compute, check, nullspace and export.

Exit codes: 0 success, 2 invalid input (schema, dimensions, format),
3 numerical failure or empty result. Summaries and data go to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .fwp import (
    FwpResult,
    check_wrench,
    fwp_full,
    non_actuated_directions,
    wrench_slice,
)
from .polytope import to_off
from .scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

logger = logging.getLogger("fwpkit")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _fmt(x) -> str:
    return f"{x:.6g}"


def _write_atomic(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _read_result(path) -> FwpResult:
    try:
        data = json.loads(Path(path).read_text())
        return FwpResult.from_dict(data)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"{path}: no such file") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: not a valid result file ({exc})") from None


def _parse_subsets(values, names):
    if not values or values == ["all"]:
        return None
    subsets = []
    for v in values:
        subset = tuple(s for s in v.split(",") if s)
        for n in subset:
            if n not in names:
                raise CliError(EXIT_INPUT, f"--subsets: unknown contact {n!r}")
        subsets.append(subset)
    return tuple(subsets)


# ---------------------------------------------------------------------------
# compute


def summary_table(result: FwpResult) -> str:
    rows = [("configuration", "feasible", "vertices", "bounded", "affine_dim")]
    for mask in sorted(result.diagnostics):
        d = result.diagnostics[mask]
        label = "stick" if mask == 0 else result.subset_label(mask)
        if d.error:
            rows.append((label, "error", "-", "-", "-"))
            continue
        rows.append((label, "yes" if d.feasible else "no", str(d.n_vertices),
                     "yes" if d.bounded else "no", str(d.affine_dim) if d.feasible else "-"))
    if result.naive_opening is not None:
        for mask in sorted(result.naive_opening):
            vp = result.naive_opening[mask]
            rows.append(("naive " + result.subset_label(mask), "yes", str(vp.m),
                         "yes" if vp.is_bounded else "no", "-"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def cmd_compute(args) -> int:
    try:
        sc = load_scenario(args.scenario)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"{args.scenario}: no such file") from None
    except ScenarioError as exc:
        raise CliError(EXIT_INPUT, f"{args.scenario}: {exc}") from None

    model = sc.model
    if args.passive:
        unknown = [j for j in args.passive if j not in model.actuated]
        if unknown:
            raise CliError(EXIT_INPUT, f"--passive: not an actuated joint: {', '.join(unknown)}")
        model = model.with_passive(*args.passive)

    opts = sc.options
    names = [c.name for c in sc.contacts]
    changes = {}
    if args.naive:
        changes["naive"] = True
    if args.fmax is not None:
        changes["f_max"] = args.fmax
    if args.subsets:
        changes["subsets"] = _parse_subsets(args.subsets, names)
    if args.tol_est is not None:
        changes["tau_est"] = args.tol_est
    if args.tol_hull is not None:
        changes["tau_hull"] = args.tol_hull
    opts = replace(opts, **changes)

    try:
        result = fwp_full(model, sc.state, sc.contacts, options=opts, gravity=sc.gravity)
    except np.linalg.LinAlgError as exc:
        raise CliError(EXIT_NUMERIC, f"numerical failure: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None

    doc = result.to_dict()
    if sc.name:
        doc["scenario"] = sc.name
    _write_atomic(Path(args.output), json.dumps(doc, indent=1) + "\n")
    print(summary_table(result))

    failed = [m for m, d in result.diagnostics.items() if d.error]
    for m in failed:
        print(f"{result.subset_label(m)}: {result.diagnostics[m].error}", file=sys.stderr)
    if result.stick.is_empty and not result.opening:
        print("every contact configuration is infeasible", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_NUMERIC if failed else EXIT_OK


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    result = _read_result(args.result)
    w = np.asarray(args.wrench, dtype=float)
    if w.shape[0] != result.wrench_dim:
        raise CliError(EXIT_INPUT, f"wrench has {w.shape[0]} components, expected "
                                   f"{result.wrench_dim} ({', '.join(result.axes)})")
    report = check_wrench(result, w, args.tol)
    for label, (inside, dist) in report.items():
        state = "inside" if inside else "outside"
        print(f"{label}: {state} distance={_fmt(dist)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# nullspace


def cmd_nullspace(args) -> int:
    result = _read_result(args.result)
    configs = [(label, vp) for label, vp in result.configurations() if not vp.is_empty]
    if not configs:
        print("result contains no feasible configuration", file=sys.stderr)
        return EXIT_NUMERIC
    print("axes: " + " ".join(result.axes))
    for label, vp in configs:
        N = non_actuated_directions(vp, args.tol)
        print(f"{label}: {N.shape[1]} non-actuated direction(s)")
        for d in _canonical_columns(N).T:
            print("  " + " ".join(f"{c: .6f}" for c in d))
    return EXIT_OK


def _canonical_columns(N):
    """Columns with the largest-magnitude entry made positive, for stable output."""
    N = N.copy()
    for k in range(N.shape[1]):
        i = np.argmax(np.abs(N[:, k]))
        if N[i, k] < 0:
            N[:, k] = -N[:, k]
    N[np.abs(N) < 1e-12] = 0.0
    return N


# ---------------------------------------------------------------------------
# export


def _select(result: FwpResult, config: str, naive: bool):
    source = result.naive_opening if naive else None
    if naive and source is None:
        raise CliError(EXIT_INPUT, "result has no naive opening sets (compute with --naive)")
    if config == "stick":
        if naive:
            raise CliError(EXIT_INPUT, "the naive sets exist only for opening subsets")
        return result.stick
    table = source if naive else result.opening
    for mask, vp in table.items():
        if config in (str(mask), result.subset_label(mask), result.subset_label(mask)[5:]):
            return vp
    if config.isdigit() and int(config) in result.diagnostics:
        return None  # infeasible subset
    raise CliError(EXIT_INPUT, f"no configuration {config!r} in result")


def _parse_slice(specs, axes):
    fixed = {}
    for spec in specs or []:
        for item in spec.split(","):
            if not item:
                continue
            name, sep, val = item.partition("=")
            if not sep or name not in axes:
                raise CliError(EXIT_INPUT, f"--slice: expected AXIS=VALUE with AXIS in {', '.join(axes)}")
            try:
                fixed[axes.index(name)] = float(val)
            except ValueError:
                raise CliError(EXIT_INPUT, f"--slice: bad value {val!r}") from None
    return fixed


def cmd_export(args) -> int:
    result = _read_result(args.result)
    vp = _select(result, args.config, args.naive)
    if vp is None or vp.is_empty:
        print(f"configuration {args.config!r} is empty", file=sys.stderr)
        return EXIT_NUMERIC
    axes = list(result.axes)
    fixed = _parse_slice(args.slice, axes)

    if args.format == "off":
        if len(axes) - len(fixed) != 3:
            raise CliError(EXIT_INPUT, f"OFF export needs 3 free coordinates; fix "
                                       f"{len(axes) - 3} of {', '.join(axes)} with --slice")
        if not vp.is_bounded:
            raise CliError(EXIT_NUMERIC, "cannot export an unbounded polytope as OFF")
        if fixed:
            vp = wrench_slice(vp, fixed)
            if vp.is_empty:
                print("slice does not meet the polytope", file=sys.stderr)
                return EXIT_NUMERIC
        text = to_off(vp)
    else:
        if fixed:
            if not vp.is_bounded:
                raise CliError(EXIT_NUMERIC, "cannot slice an unbounded polytope")
            vp = wrench_slice(vp, fixed)
            if vp.is_empty:
                print("slice does not meet the polytope", file=sys.stderr)
                return EXIT_NUMERIC
            axes = [a for k, a in enumerate(axes) if k not in fixed]
        if args.format == "json":
            text = json.dumps(vp.to_dict(), indent=1) + "\n"
        else:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(axes)
            for row in vp.vertices:
                writer.writerow([repr(float(c)) for c in row])
            text = buf.getvalue()
            if not vp.is_bounded:
                print(f"{len(vp.rays)} recession ray(s) not written to CSV", file=sys.stderr)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        _write_atomic(Path(args.output), text)
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_INPUT, message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fwp", description="Feasible wrench polytopes of legged robots.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="compute FWP_s and all FWP_o for a scenario")
    c.add_argument("scenario", help="scenario JSON file")
    c.add_argument("-o", "--output", required=True, help="result JSON file")
    c.add_argument("--naive", action="store_true", help="also compute the naive opening sets")
    c.add_argument("--subsets", action="append", metavar="NAMES",
                   help="comma-separated contacts to open (repeatable; default: all subsets)")
    c.add_argument("--fmax", type=float, help="per-component contact force cap [N]")
    c.add_argument("--tol-est", type=float, help="established-contact velocity tolerance [m/s]")
    c.add_argument("--tol-hull", type=float, help="relative affine-hull tolerance")
    c.add_argument("--passive", nargs="+", metavar="JOINT", help="treat these joints as passive")
    c.set_defaults(func=cmd_compute)

    k = sub.add_parser("check", help="which configurations can realize a wrench")
    k.add_argument("result", help="result JSON from 'fwp compute'")
    k.add_argument("wrench", nargs="+", type=float, help="wrench components, torque first")
    k.add_argument("--tol", type=float, help="relative membership tolerance")
    k.set_defaults(func=cmd_check)

    n = sub.add_parser("nullspace", help="list non-actuated wrench directions")
    n.add_argument("result")
    n.add_argument("--tol", type=float, default=1e-7, help="relative singular-value tolerance")
    n.set_defaults(func=cmd_nullspace)

    e = sub.add_parser("export", help="export one configuration as json, off or csv")
    e.add_argument("result")
    e.add_argument("-f", "--format", required=True, choices=("json", "off", "csv"))
    e.add_argument("-o", "--output", default="-", help="output file ('-' for stdout)")
    e.add_argument("--config", default="stick",
                   help="'stick', a subset mask, or 'open:a+b' label (default: stick)")
    e.add_argument("--naive", action="store_true", help="export the naive opening set")
    e.add_argument("--slice", action="append", metavar="AXIS=VALUE",
                   help="fix wrench coordinates, e.g. tx=0,ty=0,tz=0")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except CliError as exc:
        print(f"fwp: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
