"""Command-line front end.

Exit codes: 0 success, 1 failed verification or validation, 2 bad arguments or
inputs, 3 degenerate plane or singular closed form, 4 solver divergence.

Relative ``--out`` paths resolve against ``$SDIFFGEO_OUTPUT_DIR`` when it is set.
Every file written gets a sibling ``<name>.manifest.json`` recording the command
line, configuration, package version, timestamp and SHA-256 of each output.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from . import curvature as cv
from . import euler, sphere
from .errors import (
    DegeneratePlaneError,
    DivergenceError,
    FormulaTranscriptionError,
    IncompleteBasisError,
    NotEigenfunctionError,
    SingularDenominatorError,
)
from .spectral import GridSpec
from .trig import TrigPolynomial

OUTPUT_DIR_ENV = "SDIFFGEO_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE, EXIT_DIVERGED = 0, 1, 2, 3, 4

DEFAULT_INIT = (TrigPolynomial.cos((1,), (0,)) + TrigPolynomial.cos((0,), (1,))
                + TrigPolynomial.sin((2,), (1,), 0.1))


class UsageError(Exception):
    pass


# -- output plumbing -------------------------------------------------------------

def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out: Path, files: Sequence[Path], config: dict, status: str = "ok") -> Path:
    data = {
        "command": sys.argv[:] if sys.argv else [],
        "config": config,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "status": status,
        "outputs": {Path(f).name: sha256_file(f) for f in files},
    }
    path = manifest_path(out)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def check_manifest(path) -> list[str]:
    """Return a list of problems (empty when every checksum matches)."""
    path = Path(path)
    data = json.loads(path.read_text())
    problems = []
    for name, digest in sorted(data.get("outputs", {}).items()):
        target = path.parent / name
        if not target.exists():
            problems.append(f"{name}: missing")
        elif sha256_file(target) != digest:
            problems.append(f"{name}: checksum mismatch")
    return problems


def _emit(text: str, out: str | None, config: dict) -> None:
    path = _resolve(out)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    write_manifest(path, [path], config)


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- curvature ---------------------------------------------------------------------

def _parse_pairs(texts, q, phases) -> list[cv.ModePair]:
    try:
        return [cv.ModePair.parse(t, q=q, phases=phases) for t in texts]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_phases(text: str):
    parts = text.split(",")
    if len(parts) != 2 or any(p not in ("cos", "sin") for p in parts):
        raise UsageError(f"--phases expects two of cos/sin, e.g. cos,sin; got {text!r}")
    return tuple(parts)


def _pair_cells(pair: cv.ModePair) -> list[str]:
    return [";".join(str(a) for a in v) for v in (pair.n, pair.m, pair.k, pair.l)]


TORUS_TERMS = ["bracket_factor", "alpha", "beta", "diff_sq", "sum_sq"]


def _torus_row(pair: cv.ModePair, metric: str) -> list:
    if metric == "bi":
        K, formula = cv.k_torus_bi(pair), cv.Formula.TORUS_BI_23
    else:
        K, formula = cv.k_torus_right(pair), cv.Formula.TORUS_RIGHT_24
    terms = cv.torus_terms(pair)
    return [formula.value, pair.q, *_pair_cells(pair), K, *(terms[t] for t in TORUS_TERMS)]


def cmd_curvature(args) -> int:
    header = ["formula", "q", "n", "m", "k", "l", "K", *TORUS_TERMS]
    if args.kind in ("torus-bi", "torus-right"):
        if not args.pair:
            raise UsageError("at least one --pair n,m,k,l is required")
        metric = "bi" if args.kind == "torus-bi" else "right"
        pairs = _parse_pairs(args.pair, args.q, _parse_phases(args.phases))
        rows = []
        for pair in pairs:
            try:
                rows.append(_torus_row(pair, metric))
            except (DegeneratePlaneError, SingularDenominatorError) as exc:
                print(f"error: pair {pair.label()}: {exc}", file=sys.stderr)
                return EXIT_DEGENERATE
        _emit(_csv_text(header, rows), args.out, _config(args))
        return EXIT_OK
    if args.kind == "sweep":
        if args.max_wavenumber is None or args.max_wavenumber < 1:
            raise UsageError("sweep needs --max-wavenumber W >= 1")
        pairs = cv.enumerate_mode_pairs(args.max_wavenumber, args.q, include_resonant=args.metric == "bi")
        rows = sorted((_torus_row(p, args.metric) for p in pairs), key=lambda r: [str(c) for c in r[2:6]])
        _emit(_csv_text(header, rows), args.out, _config(args))
        return EXIT_OK
    # general
    if not args.hamiltonians or len(args.hamiltonians) != 2:
        raise UsageError("general needs --hamiltonians F.json H.json")
    polys = []
    for name in args.hamiltonians:
        try:
            polys.append(TrigPolynomial.load(name))
        except FileNotFoundError as exc:
            raise UsageError(f"cannot read Hamiltonian file {name!r}") from exc
        except (ValueError, KeyError) as exc:
            raise UsageError(f"malformed Hamiltonian file {name!r}: {exc}") from exc
    f, h = polys
    label = f"{args.hamiltonians[0]} {args.hamiltonians[1]}"
    try:
        report = cv.k_bi(f, h) if args.metric == "bi" else cv.k_right_general(f, h)
    except (DegeneratePlaneError, SingularDenominatorError) as exc:
        print(f"error: pair {label}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    names = list(report.terms)
    header = ["formula", "q", "f", "h", "K", *names, "norm_f", "norm_h"]
    row = [report.formula.value, f.q, *args.hamiltonians, report.K,
           *(report.terms[t] for t in names), *report.norms]
    _emit(_csv_text(header, [row]), args.out, _config(args))
    return EXIT_OK


# -- simulate -----------------------------------------------------------------------

def _parse_casimirs(text: str) -> tuple[int, ...]:
    try:
        orders = tuple(int(a) for a in text.split(",") if a.strip())
    except ValueError as exc:
        raise UsageError(f"--casimirs expects comma-separated integers, got {text!r}") from exc
    if not orders or any(k < 2 for k in orders):
        raise UsageError("Casimir orders must be integers >= 2")
    return orders


def cmd_simulate(args) -> int:
    if args.init:
        try:
            f0 = TrigPolynomial.load(args.init)
        except FileNotFoundError as exc:
            raise UsageError(f"initial-condition file not found: {args.init}") from exc
        except (ValueError, KeyError) as exc:
            raise UsageError(f"malformed initial-condition file {args.init!r}: {exc}") from exc
    else:
        f0 = DEFAULT_INIT
    try:
        cfg = euler.SolverConfig(
            dt=args.dt, steps=args.steps, grid=GridSpec(args.grid, args.dealias),
            invariant_stride=args.stride, casimir_orders=_parse_casimirs(args.casimirs),
            snapshot_stride=args.snapshot_stride)
        euler.initial_vorticity(f0, cfg.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    out = _resolve(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    files = [out]
    config = _config(args)
    config["init_terms"] = f0.to_records()

    def on_snapshot(i, t, w):
        path = out.with_name(f"{out.stem}_snap_{i:06d}.json")
        euler.write_snapshot(path, i, t, w)
        files.append(path)

    status = "ok"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(euler.trajectory_header(cfg.casimir_orders))

        def sink(rec):
            writer.writerow([repr(float(v)) for v in rec.row(cfg.casimir_orders)])
            fh.flush()

        try:
            euler.simulate(f0, cfg, sink=sink, on_snapshot=on_snapshot if cfg.snapshot_stride else None)
        except DivergenceError as exc:
            status = f"diverged at step {exc.step}"
            print(f"error: {exc}; partial trajectory kept in {out}", file=sys.stderr)
    write_manifest(out, files, config, status)
    return EXIT_OK if status == "ok" else EXIT_DIVERGED


# -- sphere ---------------------------------------------------------------------------

def _parse_sphere_pair(text: str) -> tuple[sphere.SphericalIndex, sphere.SphericalIndex]:
    try:
        l1, m1, l2, m2 = (int(a) for a in text.split(","))
        return sphere.SphericalIndex(l1, m1), sphere.SphericalIndex(l2, m2)
    except ValueError as exc:
        raise UsageError(f"--pair expects l1,m1,l2,m2 with |m| <= l; got {text!r}") from exc


def cmd_sphere(args) -> int:
    if args.kind == "wigner3j":
        if args.table is not None:
            rows = sphere.wigner3j_table(args.table)
            _emit(_csv_text(["j1", "j2", "j3", "m1", "m2", "m3", "value"], rows), args.out, _config(args))
            return EXIT_OK
        if len(args.args) != 6:
            raise UsageError("wigner3j expects six integers j1 j2 j3 m1 m2 m3 (or --table JMAX)")
        print(f"{sphere.wigner3j(*args.args):.10f}")
        return EXIT_OK
    if args.kind == "constants":
        if args.lmax is None or args.lmax < 1:
            raise UsageError("constants needs --lmax >= 1")
        try:
            table = sphere.structure_constants(args.lmax, validate=not args.no_validate)
        except FormulaTranscriptionError as exc:
            print(f"error: structure-constant validation failed: {exc}", file=sys.stderr)
            return EXIT_FAIL
        _emit(_csv_text(["n", "m", "k", "l", "i", "j", "re", "im"], table.rows()), args.out, _config(args))
        return EXIT_OK
    # curvature
    if not args.pair or args.lmax is None:
        raise UsageError("sphere curvature needs --pair l1,m1,l2,m2 and --lmax")
    a, b = _parse_sphere_pair(args.pair)
    try:
        report = sphere.k_sphere(a, b, args.lmax)
    except DegeneratePlaneError as exc:
        print(f"error: pair {args.pair}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except IncompleteBasisError as exc:
        raise UsageError(f"--lmax {args.lmax} too small for pair {args.pair}: {exc}") from exc
    conv = {int(k[2:]): v for k, v in report.terms.items() if k.startswith("K@")}
    converged = min(c for c, v in conv.items() if abs(v - report.K) <= 1e-12 * max(1.0, abs(report.K)))
    header = ["formula", "l1", "m1", "l2", "m2", "lmax", "K", "K_quadrature", "converged_at_lmax"]
    row = [report.formula.value, a.l, a.m, b.l, b.m, args.lmax, report.K,
           sphere.k_sphere_quadrature(a, b), converged]
    _emit(_csv_text(header, [row]), args.out, _config(args))
    return EXIT_OK


# -- verify -----------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .acceptance import run_all

    status = EXIT_OK
    for path in args.check_manifest or []:
        problems = check_manifest(_resolve(path))
        for p in problems:
            print(f"[FAIL] manifest {path}: {p}")
        if problems:
            status = EXIT_FAIL
        else:
            print(f"[PASS] manifest {path}: checksums match")
    only = None
    if args.only:
        try:
            only = {int(a) for a in args.only.split(",")}
        except ValueError as exc:
            raise UsageError(f"--only expects criterion numbers, got {args.only!r}") from exc
    results = run_all(seed=args.seed, quick=not args.full, only=only)
    for res in results:
        print(res.line() + (f"  [{res.note}]" if res.note else ""))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed (seed={args.seed}, mode={'full' if args.full else 'quick'})")
    if args.out:
        rows = [[r.number, r.title, "PASS" if r.passed else "FAIL", r.seconds,
                 json.dumps(r.metrics, sort_keys=True)] for r in results]
        _emit(_csv_text(["criterion", "title", "status", "seconds", "metrics"], rows), args.out, _config(args))
    if n_pass != len(results):
        status = EXIT_FAIL
    return status


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdiffgeo", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curvature", help="sectional curvature of torus Hamiltonian pairs")
    c.add_argument("kind", choices=["torus-bi", "torus-right", "general", "sweep"])
    c.add_argument("--pair", action="append", help="n,m,k,l (repeatable); for q>1 use ';' inside entries")
    c.add_argument("--q", type=int, default=1, help="torus T^{2q} (default 1)")
    c.add_argument("--phases", default="cos,cos", help="phases of F and H for --pair (default cos,cos)")
    c.add_argument("--hamiltonians", nargs=2, metavar=("F", "H"), help="two TrigPolynomial JSON files")
    c.add_argument("--metric", choices=["right", "bi"], default="right", help="for general and sweep")
    c.add_argument("--max-wavenumber", type=int, help="sweep bound W on every wavevector entry")
    c.add_argument("--out", help="CSV path (default stdout)")
    c.set_defaults(func=cmd_curvature)

    s = sub.add_parser("simulate", help="integrate the Euler equation on T^2")
    s.add_argument("--init", help="TrigPolynomial JSON for F0 (default cos x + cos y + 0.1 sin(2x+y))")
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--dealias", choices=["two_thirds", "none"], default="two_thirds")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--stride", type=int, default=10, help="record invariants every STRIDE steps")
    s.add_argument("--casimirs", default="2,3,4")
    s.add_argument("--snapshot-stride", type=int, default=None, help="write coefficient snapshots")
    s.add_argument("--out", default="trajectory.csv")
    s.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sphere", help="3j symbols, structure constants and curvature on S^2")
    sp.add_argument("kind", choices=["wigner3j", "constants", "curvature"])
    sp.add_argument("args", nargs="*", type=int, help="j1 j2 j3 m1 m2 m3 for wigner3j")
    sp.add_argument("--table", type=int, help="wigner3j: emit every nonzero symbol with j <= TABLE")
    sp.add_argument("--lmax", type=int)
    sp.add_argument("--no-validate", action="store_true", help="skip the quadrature check of constants")
    sp.add_argument("--pair", help="l1,m1,l2,m2 (real harmonics)")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_sphere)

    v = sub.add_parser("verify", help="run the acceptance suite")
    mode = v.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", help="shortened conservation run (default)")
    mode.add_argument("--full", action="store_true", help="every criterion at full size")
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--check-manifest", nargs="*", metavar="MANIFEST", help="re-check output checksums")
    v.add_argument("--out", help="CSV report path")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotEigenfunctionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
