"""Command-line interface: ``revend {classify,table,mesh,simulate}``.

Exit codes: 0 success, 1 usage, 2 input or domain error, 3 numeric failure,
4 expectation mismatch (``table``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from . import __version__
from .catalog import CATALOG_NAMES, catalog
from .criteria import classify_end, parabolicity_test
from .curvefile import load_curve
from .divergence import ClassifierConfig
from .errors import QuadratureError, RevendError
from .expr import compile_expr
from .geometry import mesh, write_obj
from .report import ReportDocument, clean_json, verdict_to_dict
from .stochastic import DiffusionCfg, escape_probe, exact_hitting, simulate_hitting
from .warp import gauss_curvature, synthetic, warp_from_curve

log = logging.getLogger("revend")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected K=V, got {text!r}")
    k, v = (p.strip() for p in text.split("=", 1))
    for conv in (int, float):
        try:
            return k, conv(v)
        except ValueError:
            pass
    return k, v


def _source_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--catalog", choices=CATALOG_NAMES, help="builtin end")
    g.add_argument("--curve", metavar="FILE", help="curve specification file")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="K=V",
                   help="catalog parameter (repeatable)")
    p.add_argument("--kappa", type=int, choices=(-1, 0, 1), help="ambient curvature for --curve")
    p.add_argument("--s-max", type=float, help="arc length to reparametrize (classify) or mesh (mesh)")


def _classifier_args(p: argparse.ArgumentParser) -> None:
    d = ClassifierConfig()
    p.add_argument("--horizon-t0", type=float, default=d.t0)
    p.add_argument("--max-doublings", type=int, default=d.max_doublings)
    p.add_argument("--delta", type=float, default=d.delta)
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--rho", type=float, default=1.0, help="cap radius for the stochastic integral")


def _output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", metavar="FILE", help="write the report document here ('-' for stdout)")
    p.add_argument("--csv", metavar="FILE", help="write a one-row-per-end summary")
    p.add_argument("--no-timings", action="store_true", help="omit wall-clock timings from reports")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="revend", description="Conformal type of ends of revolution in space forms.")
    parser.add_argument("--version", action="version", version=f"revend {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="classify one end")
    _source_args(p)
    _classifier_args(p)
    _output_args(p)

    p = sub.add_parser("table", help="classify the whole catalog against its declared verdicts")
    _classifier_args(p)
    _output_args(p)

    p = sub.add_parser("mesh", help="write a triangle mesh of an end")
    _source_args(p)
    p.add_argument("--ns", type=int, default=50)
    p.add_argument("--ntheta", type=int, default=32)
    p.add_argument("--out", required=True, metavar="FILE")

    p = sub.add_parser("simulate", help="Monte Carlo hitting probabilities of the radial diffusion")
    _source_args(p, required=False)
    p.add_argument("--warp", metavar="EXPR", help="warp function w(t) given as an expression")
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--R", type=float, default=2.0)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    _output_args(p)
    return parser


def _threads() -> int:
    env = os.environ.get("REVEND_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"REVEND_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _cfg(args) -> ClassifierConfig:
    return ClassifierConfig().with_(t0=args.horizon_t0, max_doublings=args.max_doublings,
                                    delta=args.delta, tol=args.tol)


def _end(args):
    if args.catalog:
        if args.kappa is not None:
            raise UsageError("--kappa applies to --curve only")
        return catalog(args.catalog, dict(args.param), s_max=args.s_max if args.command == "classify" else None)
    if args.param:
        raise UsageError("--param applies to --catalog only")
    return load_curve(args.curve, kappa=args.kappa, s_max=args.s_max if args.command == "classify" else None)


def _write(target: str, text: str) -> None:
    if target == "-":
        sys.stdout.write(text)
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_rows(reports, expected=None):
    rows = []
    for i, r in enumerate(reports):
        par = r.integrals.get("parabolicity")
        sto = r.integrals.get("stochastic")
        row = {
            "end": r.end_name,
            "kappa": r.kappa,
            "verdict": r.verdict,
            "parabolicity": par.kind.value if par else "",
            "value": "" if par is None or par.value is None else repr(float(par.value)),
            "stochastic": sto.kind.value if sto else "",
            "fired": ";".join(cid for cid, _ in r.fired),
            "flags": ";".join(r.flags),
        }
        if expected is not None:
            row["expected"] = "|".join(expected[i])
            row["match"] = "yes" if r.verdict in expected[i] else "no"
        rows.append(row)
    return rows


def _write_csv(target: str, rows) -> None:
    if not rows:
        return
    fh = sys.stdout if target == "-" else open(target, "w", encoding="utf-8", newline="")
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _summary(r) -> str:
    par = r.integrals.get("parabolicity")
    extra = ""
    if par is not None and par.value is not None:
        extra = f"  integral = {float(par.value):.10g} +/- {float(par.error or 0):.2g}"
    fired = ", ".join(cid for cid, _ in r.fired) or "-"
    flags = f"  flags: {', '.join(r.flags)}" if r.flags else ""
    return f"{r.end_name:<40s} kappa={r.kappa:+d}  {r.verdict:<13s}{extra}  fired: {fired}{flags}"


def cmd_classify(args) -> int:
    cfg = _cfg(args)
    t = time.perf_counter()
    end = _end(args)
    t_build = time.perf_counter() - t
    report = classify_end(end, cfg, rho=args.rho)
    t_total = time.perf_counter() - t
    timings = None if args.no_timings else {"build": t_build, "total": t_total}
    doc = ReportDocument([report], cfg, __version__, timings, {"rho": args.rho})
    print(_summary(report))
    if args.json:
        _write(args.json, doc.dumps())
    if args.csv:
        _write_csv(args.csv, _csv_rows([report]))
    if any(f.startswith("numeric_failure") for f in report.flags):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_table(args) -> int:
    cfg = _cfg(args)
    t = time.perf_counter()

    def run(name):
        t0 = time.perf_counter()
        end = catalog(name)
        return end, classify_end(end, cfg, rho=args.rho), time.perf_counter() - t0

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, CATALOG_NAMES))
    reports = [r for _, r, _ in results]
    expected = [list(end.expected["parabolic"]) for end, _, _ in results]
    mismatches = [r.end_name for r, exp in zip(reports, expected) if r.verdict not in exp]
    for r, exp in zip(reports, expected):
        mark = "ok " if r.verdict in exp else "MISMATCH"
        print(f"{mark:<9s}{_summary(r)}  expected: {'|'.join(exp)}")
    print(f"{len(reports)} ends, {len(mismatches)} mismatches")
    timings = None
    if not args.no_timings:
        timings = {end.name: dt for end, _, dt in results}
        timings["total"] = time.perf_counter() - t
    doc = ReportDocument(reports, cfg, __version__, timings,
                         {"rho": args.rho, "expected": expected, "mismatches": mismatches})
    if args.json:
        _write(args.json, doc.dumps())
    if args.csv:
        _write_csv(args.csv, _csv_rows(reports, expected))
    return EXIT_MISMATCH if mismatches else EXIT_OK


def cmd_mesh(args) -> int:
    end = _end(args)
    s_hi = args.s_max if args.s_max is not None else min(10.0, end.curve.s_max)
    if args.ns < 2 or args.ntheta < 3:
        raise UsageError("mesh needs --ns >= 2 and --ntheta >= 3")
    if not 0 < s_hi <= end.curve.s_max:
        raise UsageError(f"--s-max must lie in (0, {end.curve.s_max:g}]")
    w = warp_from_curve(end.curve)
    # keep the curvature stencil inside the reparametrized range
    s_cap = end.curve.s_max - 2e-4 * max(1.0, end.curve.s_max)
    attrs = {"warp": lambda s: w(s),
             "gauss_curvature": lambda s: gauss_curvature(w, np.minimum(s, s_cap))}
    m = mesh(end, s_hi, args.ns, args.ntheta, attributes=attrs)
    write_obj(m, args.out)
    print(f"wrote {len(m.vertices)} vertices, {len(m.faces)} triangles to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.warp and (args.catalog or args.curve):
        raise UsageError("--warp excludes --catalog/--curve")
    if args.warp:
        fn = compile_expr(args.warp)
        w = synthetic(fn, label=args.warp)
        name = args.warp
    elif args.catalog or args.curve:
        end = _end(args)
        w = warp_from_curve(end.curve)
        name = end.name
    else:
        raise UsageError("one of --warp, --catalog, --curve is required")
    cfg = DiffusionCfg(step=args.step, n_paths=args.paths, seed=args.seed, t_max=args.t_max,
                       workers=args.workers)
    t = time.perf_counter()
    exact_in, exact_out = exact_hitting(w, args.rho, args.R, args.x0)
    stats = simulate_hitting(w, args.rho, args.R, args.x0, cfg)
    z = (stats.p_hit_inner - exact_in) / stats.se_inner if stats.se_inner > 0 else math.nan
    out = {
        "warp": name,
        "rho": args.rho, "R": args.R, "x0": args.x0,
        "config": {"step": cfg.step, "n_paths": cfg.n_paths, "seed": cfg.seed, "t_max": cfg.t_max},
        "exact": {"p_hit_inner": exact_in, "p_hit_outer": exact_out},
        "empirical": stats.as_dict(),
        "z_score": z,
    }
    try:
        par = parabolicity_test(w)
        probe = escape_probe(w, args.rho, args.x0, par, max_levels=20)
        out["parabolicity"] = verdict_to_dict(par)
        out["escape"] = {"radii": probe.radii, "p_outer": probe.p_outer, "trend": probe.trend,
                         "limit": probe.limit, "consistent": probe.consistent}
    except (RevendError, ArithmeticError) as exc:
        out["escape"] = {"error": str(exc)}
    if not args.no_timings:
        out["timings"] = {"total": time.perf_counter() - t}
    print(f"{name}: p_hit_inner exact {exact_in:.6f}, empirical {stats.p_hit_inner:.6f} "
          f"+/- {stats.se_inner:.2g} (z = {z:+.2f}), undecided {stats.n_undecided}")
    if args.json:
        _write(args.json, json.dumps(clean_json(out), indent=2, allow_nan=False) + "\n")
    if args.csv:
        _write_csv(args.csv, [{"warp": name, "exact": repr(exact_in), **{k: repr(v) for k, v in stats.as_dict().items()}}])
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "table": cmd_table, "mesh": cmd_mesh, "simulate": cmd_simulate}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"revend: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ArithmeticError) as exc:
        print(f"revend: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RevendError, ValueError, OSError) as exc:
        print(f"revend: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
