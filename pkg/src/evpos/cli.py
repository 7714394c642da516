"""``evpos`` command line tool.

Subcommands:

``analyze``   spectral summary, projections, scans and certificates as JSON
``timeline``  margin trace of a time or resolvent scan as CSV
``zoo``       write a generated operator as a Matrix Market fixture

Exit status is 0 on success, 1 on input errors and 2 when a certificate
reports ``CONCLUSION-VIOLATED``.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, config, mmio, zoo
from .certify import VIOLATED, krein_rutman, pf_resolvent, pf_semigroup, pf_semigroup_corollary
from .errors import EvposError, LatticeError
from .lattice import OrderUnit
from .report import SCHEMA_VERSION, AnalysisReport, jsonable, operator_loads
from .resolvent import ScanSchedule, scan_individual_positive, scan_uniform_positive
from .semigroup import TimeGrid, default_t_max, find_t0, find_t0_uniform
from .spectral import Operator, analyze, spectral_gap, spectral_projection

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED = 0, 1, 2


class InputError(EvposError, ValueError):
    """Bad command line input."""


# ----------------------------------------------------------------------------
# input parsing


def load_operator(path: str) -> Operator:
    """Read a Matrix Market file or a JSON operator document (by ``.json`` suffix)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    if p.suffix.lower() == ".json":
        op = operator_loads(text, name=p.stem)
    else:
        op = Operator(mmio.loads(text), name=p.stem, source={"path": str(path)})
    return op


def _parse_vector(text: str, what: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{what}: cannot parse {text!r} as a list of numbers") from None
    if not vals:
        raise InputError(f"{what}: empty vector")
    return np.array(vals)


def parse_order_unit(spec: str, n: int) -> OrderUnit:
    """``ones``, an inline vector ``1,2,3``, or a path to a file of numbers."""
    if spec == "ones":
        return OrderUnit.ones(n)
    p = Path(spec)
    text = p.read_text(encoding="utf-8") if p.is_file() else spec
    u = _parse_vector(text, "--u")
    if u.size != n:
        raise InputError(f"--u has {u.size} entries but the operator has dimension {n}")
    try:
        return OrderUnit(u)
    except LatticeError as exc:
        raise InputError(f"--u: {exc}") from None


def parse_f(spec: str, n: int):
    """``all-columns``, a 1-based basis index (``3`` or ``e3``), or an inline vector."""
    if spec == "all-columns":
        return None
    s = spec[1:] if spec.startswith("e") and spec[1:].isdigit() else spec
    if s.isdigit():
        k = int(s)
        if not 1 <= k <= n:
            raise InputError(f"--f basis index {k} outside 1..{n}")
        f = np.zeros(n)
        f[k - 1] = 1.0
        return f
    f = _parse_vector(spec, "--f")
    if f.size != n:
        raise InputError(f"--f has {f.size} entries but the operator has dimension {n}")
    return f


def effective_config(args) -> config.Config:
    """Flags override ``EVPOS_*`` variables, which override defaults."""
    try:
        cfg = config.from_environment()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    changes = {}
    for flag, field in (("tol_pos", "tol_pos"), ("tol_zero", "tol_zero"), ("t_max", "t_max"), ("scan_steps", "scan_steps")):
        val = getattr(args, flag, None)
        if val is not None:
            changes[field] = val
    return dataclasses.replace(cfg, **changes)


# ----------------------------------------------------------------------------
# analysis


def build_report(op: Operator, u: OrderUnit, path: Optional[str] = None) -> AnalysisReport:
    """Run the full pipeline under the active config and assemble the report."""
    summary = analyze(op)
    spec = summary.as_dict()
    spec["gap"] = spectral_gap(op, summary)
    lambdas = [float(c.center.real) for c in summary.peripheral if c.is_real]
    projections, scans, certs = [], [], []
    for lam in lambdas:
        try:
            projections.append(spectral_projection(op, lam, summary).summary())
        except EvposError as exc:
            projections.append({"lambda0": lam, "error": str(exc)})
        scans.append(scan_uniform_positive(op, lam, u).as_dict())
        certs.append(krein_rutman(op, lam, summary=summary))
        certs.append(pf_resolvent(op, lam, u, summary=summary))
    tv = find_t0_uniform(op, u)
    certs.append(pf_semigroup(op, u, summary=summary, time_verdict=tv))
    certs.append(pf_semigroup_corollary(op, u, summary=summary, time_verdict=tv))
    violations = sum(c.overall == VIOLATED for c in certs)
    operator = {
        "name": op.name,
        "n": op.n,
        "sha256": hashlib.sha256(mmio.dumps(op.matrix).encode("ascii")).hexdigest(),
        "source": jsonable(op.source),
    }
    if path is not None:
        operator["path"] = str(path)
    data = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "evpos", "version": __version__},
        "config": config.get().as_dict(),
        "operator": operator,
        "order_unit": u.entries.tolist(),
        "spectral": spec,
        "projections": projections,
        "scans": scans,
        "time_scans": [tv.as_dict()],
        "certificates": [c.as_dict() for c in certs],
        "status": {"exit_code": EXIT_VIOLATED if violations else EXIT_OK, "violations": violations},
    }
    return AnalysisReport(jsonable(data))


def _write(text: str, out: Optional[str], stdout) -> None:
    if out in (None, "-"):
        stdout.write(text)
    else:
        mmio.atomic_write_text(out, text)


def cmd_analyze(args, stdout) -> int:
    op = load_operator(args.input)
    u = parse_order_unit(args.u, op.n)
    rep = build_report(op, u, args.input)
    rep.validate()
    _write(rep.to_json(), args.out, stdout)
    return rep.data["status"]["exit_code"]


def timeline_rows(op: Operator, u: OrderUnit, f, resolvent: Optional[float], grid: Optional[TimeGrid]) -> tuple:
    """Header and ``(x, margin)`` rows for a time scan or, with ``resolvent``, a resolvent scan."""
    if resolvent is not None:
        sched = ScanSchedule.default("above")
        v = scan_uniform_positive(op, resolvent, u, sched) if f is None else scan_individual_positive(op, resolvent, f, u, sched)
        rows = sorted(v.margins)
        return "lambda,margin", rows
    if f is None:
        v = find_t0_uniform(op, u, grid)
    else:
        if np.any(f < 0) or not np.any(f > 0):
            raise InputError("--f must be nonnegative and nonzero")
        v = find_t0(op, f, u, grid)
    return "t,margin", list(v.margins)


def cmd_timeline(args, stdout) -> int:
    op = load_operator(args.input)
    u = parse_order_unit(args.u, op.n)
    f = parse_f(args.f, op.n)
    grid = None
    if args.resolvent is None:
        t_max = config.get().t_max or default_t_max(op)
        grid = TimeGrid(t_max, 0.0, args.points or config.get().grid_points)
    header, rows = timeline_rows(op, u, f, args.resolvent, grid)
    buf = io.StringIO()
    buf.write(header + "\n")
    for x, m in rows:
        buf.write("%.17g,%.17g\n" % (x + 0.0, m + 0.0))
    _write(buf.getvalue(), args.out, stdout)
    return EXIT_OK


def _zoo_spec(args) -> zoo.ZooSpec:
    kind = args.kind.replace("-", "_")
    params: dict = {}
    if kind == "jordan":
        n = args.m
        params["lambda0"] = args.lambda0 if args.lambda0 is not None else 0.0
    elif kind == "biharmonic_1d":
        n = args.mesh_n if args.mesh_n is not None else args.n
    else:
        n = args.n
    if kind == "rank_one_dominant":
        for key in ("lambda0", "decay", "freq"):
            val = getattr(args, key)
            if val is not None:
                params[key] = val
    if kind == "rotation_dominant" and args.omega is not None:
        params["omega"] = args.omega
    if n is None:
        raise InputError(f"zoo {args.kind}: dimension missing (use --n, --m or --mesh-n)")
    try:
        return zoo.ZooSpec(kind, int(n), int(args.seed), params)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_zoo(args, stdout) -> int:
    spec = _zoo_spec(args)
    try:
        entry = zoo.write_fixture(spec, args.out, args.name)
        problems = zoo.verify_fixture(entry, args.out)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    entry = dict(entry, verified=not problems, problems=problems)
    stdout.write(json.dumps({"file": entry["file"], "sha256": entry["sha256"], "verified": entry["verified"], "problems": problems}, sort_keys=True) + "\n")
    return EXIT_OK if not problems else EXIT_INPUT


# ----------------------------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tolerances (override EVPOS_* environment variables)")
    g.add_argument("--tol-pos", type=float, help="relative strict-positivity threshold")
    g.add_argument("--tol-zero", type=float, help="relative rounding floor for sign tests")
    g.add_argument("--t-max", type=float, help="time horizon of semigroup scans")
    g.add_argument("--scan-steps", type=int, help="number of resolvent schedule points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evpos", description="Eventual positivity checks for matrix generators.")
    parser.add_argument("--version", action="version", version=f"evpos {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="certify an operator and write a JSON report")
    a.add_argument("input", help="Matrix Market file or JSON operator document")
    a.add_argument("--u", default="ones", help="order unit: 'ones', inline '1,2,3', or a file")
    a.add_argument("--out", help="report path (default: stdout)")
    _add_config_flags(a)
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("timeline", help="write a margin trace as CSV")
    t.add_argument("input")
    t.add_argument("--u", default="ones")
    t.add_argument("--f", default="all-columns", help="basis index (1-based, e.g. e1), inline vector, or 'all-columns'")
    t.add_argument("--resolvent", type=float, metavar="LAMBDA0", help="scan the resolvent above LAMBDA0 instead of the semigroup")
    t.add_argument("--points", type=int, help="number of geometric grid points")
    t.add_argument("--out", help="CSV path (default: stdout)")
    _add_config_flags(t)
    t.set_defaults(func=cmd_timeline)

    z = sub.add_parser("zoo", help="write a generated operator as a Matrix Market fixture")
    z.add_argument("kind", choices=sorted(set(zoo.KINDS) | {k.replace("_", "-") for k in zoo.KINDS}))
    z.add_argument("--n", type=int)
    z.add_argument("--m", type=int, help="Jordan block size")
    z.add_argument("--mesh-n", type=int, help="biharmonic mesh size")
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--lambda0", type=float)
    z.add_argument("--decay", type=float)
    z.add_argument("--freq", type=float)
    z.add_argument("--omega", type=float)
    z.add_argument("--name", help="fixture file name (default derived from the zoo parameters)")
    z.add_argument("--out", default="fixtures", help="fixture directory")
    z.set_defaults(func=cmd_zoo)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = effective_config(args)
        with config.use(cfg):
            return args.func(args, stdout)
    except (EvposError, ValueError) as exc:
        stderr.write(f"evpos {args.command}: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
