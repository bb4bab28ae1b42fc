"""Batch command-line front end: verification suites and orbital tables.

Subcommands:
  verify-fl        the Hecke fundamental lemma at the configured prime
  verify-matching  the matching isomorphism on seeded random elements
  tables           closed-form Kuznetsov orbital table vs the direct engine

Reports serialize to JSON (schemaVersion 1) or CSV; a fixed seed gives
byte-identical report files (wall-clock timings go to the console only).
Flags override a key=value config file; exit codes: 0 pass, 1 fail,
2 usage error, 3 computation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import get_context

from .errors import PadicOrbError
from .groups import HeckeElt
from .localfield import LocalFieldCtx, is_prime
from .orbital import (
    basic_fW0,
    fW_series_value,
    o_kuz_closed,
    o_kuz_direct,
    verify_fl,
    verify_matching,
)
from .groups import KSection

USAGE_ERROR = 2
COMPUTE_ERROR = 3

DEFAULTS = {
    "p": 3,
    "ext": "split",
    "hecke": "0:1",
    "val_window": "-4:4",
    "precision": 40,
    "tolerance": 1e-8,
    "seed": 7,
    "jobs": 1,
    "format": "json",
    "out": "",
    "samples": 20,
}


@dataclass
class RunConfig:
    p: int = 3
    ext: str = "split"
    hecke: str = "0:1"
    val_window: tuple[int, int] = (-4, 4)
    precision: int = 40
    tolerance: float = 1e-8
    seed: int = 7
    jobs: int = 1
    format: str = "json"
    out: str = ""
    samples: int = 20

    def header(self) -> dict:
        return {
            "p": self.p, "ext": self.ext, "hecke": self.hecke,
            "valWindow": list(self.val_window), "precision": self.precision,
            "tolerance": self.tolerance, "seed": self.seed, "jobs": self.jobs,
            "format": self.format, "samples": self.samples,
        }


class UsageError(Exception):
    pass


def parse_hecke_list(spec: str) -> list[HeckeElt]:
    """';'-separated Hecke elements, each a comma list of n:coefficient.

    An empty spec defaults to h_0.
    """
    spec = (spec or "").strip()
    if not spec:
        return [HeckeElt.basis(0)]
    out = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        data: dict[int, complex] = {}
        for term in chunk.split(","):
            term = term.strip()
            if not term:
                continue
            if ":" not in term:
                raise UsageError(f"bad hecke term {term!r}; expected n:coefficient")
            n_str, c_str = term.split(":", 1)
            try:
                n = int(n_str)
                c = complex(c_str)
            except ValueError as exc:
                raise UsageError(f"bad hecke term {term!r}: {exc}") from exc
            if n < 0:
                raise UsageError("hecke indices must be >= 0")
            data[n] = data.get(n, 0j) + c
        out.append(HeckeElt.of(data))
    return out or [HeckeElt.basis(0)]


def parse_window(spec: str) -> tuple[int, int]:
    try:
        a, b = spec.split(":")
        lo, hi = int(a), int(b)
    except ValueError as exc:
        raise UsageError(f"bad window {spec!r}; expected a:b") from exc
    if lo > hi:
        raise UsageError("window must satisfy a <= b")
    return lo, hi


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"bad config line {line!r}; expected key=value")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in DEFAULTS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
    try:
        p = int(merged["p"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad prime {merged['p']!r}") from exc
    if not is_prime(p) or p == 2:
        raise UsageError(f"--p must be an odd prime, got {p}")
    ext = str(merged["ext"])
    if ext not in ("split", "inert"):
        raise UsageError("--ext must be split or inert")
    fmt = str(merged["format"])
    if fmt not in ("json", "csv"):
        raise UsageError("--format must be json or csv")
    try:
        cfg = RunConfig(
            p=p, ext=ext, hecke=str(merged["hecke"]),
            val_window=parse_window(str(merged["val_window"])),
            precision=int(merged["precision"]),
            tolerance=float(merged["tolerance"]),
            seed=int(merged["seed"]), jobs=int(merged["jobs"]),
            format=fmt, out=str(merged["out"]),
            samples=int(merged["samples"]),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad configuration value: {exc}") from exc
    if cfg.precision < 8:
        raise UsageError("--precision must be at least 8")
    if cfg.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if cfg.samples < 1:
        raise UsageError("--samples must be >= 1")
    return cfg


def _write_report(cfg: RunConfig, doc: dict, csv_rows: list[dict], name: str) -> str:
    if cfg.format == "json":
        text = json.dumps(doc, sort_keys=True, indent=1)
    else:
        buf = io.StringIO()
        if csv_rows:
            writer = csv.DictWriter(buf, fieldnames=list(csv_rows[0].keys()))
            writer.writeheader()
            writer.writerows(csv_rows)
        text = buf.getvalue()
    path = cfg.out or f"{name}.{cfg.format}"
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _fl_single(task):
    p, kind, hdict, window, tol, prec = task
    ctx = LocalFieldCtx(p, prec)
    rep = verify_fl(ctx, kind, HeckeElt.of(hdict), window=window, tolerance=tol)
    return rep


def cmd_verify_fl(cfg: RunConfig) -> int:
    hs = parse_hecke_list(cfg.hecke)
    tasks = [(cfg.p, cfg.ext, h.as_dict(), cfg.val_window, cfg.tolerance,
              cfg.precision) for h in hs]
    start = time.time()
    if cfg.jobs > 1 and len(tasks) > 1:
        with get_context("fork").Pool(min(cfg.jobs, len(tasks))) as pool:
            reports = pool.map(_fl_single, tasks)
    else:
        reports = [_fl_single(t) for t in tasks]
    all_pass = all(r.passed for r in reports)
    doc = {
        "schemaVersion": 1,
        "command": "verify-fl",
        "config": cfg.header(),
        "results": [r.to_json_dict() for r in reports],
        "maxError": max((r.max_error for r in reports), default=0.0),
        "pass": all_pass,
    }
    rows = []
    for r in reports:
        hstr = ",".join(f"{n}:{c.real:g}" for n, c in sorted(r.hecke.items()))
        for pt in r.points:
            rows.append({
                "hecke": hstr, "kind": r.kind, "xiVal": pt.xi_val,
                "xiNum": pt.xi_num, "lhsRe": pt.lhs.real, "lhsIm": pt.lhs.imag,
                "rhsRe": pt.rhs.real, "rhsIm": pt.rhs.imag,
                "absError": pt.abs_error,
            })
    path = _write_report(cfg, doc, rows, "fl_report")
    for r in reports:
        hstr = ",".join(f"{n}:{c.real:g}" for n, c in sorted(r.hecke.items()))
        print(f"[{'PASS' if r.passed else 'FAIL'}] fl p={r.p} {r.kind} h={{{hstr}}} "
              f"maxErr={r.max_error:.3e} const={r.fitted_constant:.10f} "
              f"({r.elapsed:.1f}s)")
    print(f"report: {path}  (total {time.time() - start:.1f}s)")
    return 0 if all_pass else 1


def cmd_verify_matching(cfg: RunConfig) -> int:
    start = time.time()
    ctx = LocalFieldCtx(cfg.p, cfg.precision)
    rep = verify_matching(ctx, cfg.ext, samples=cfg.samples, seed=cfg.seed,
                          tolerance=cfg.tolerance)
    doc = {
        "schemaVersion": 1,
        "command": "verify-matching",
        "config": cfg.header(),
        "result": rep.to_json_dict(),
        "pass": rep.passed,
    }
    rows = [{
        "index": c.index, "shapeResidual": c.shape_residual,
        "ipLhsRe": c.ip_lhs.real, "ipLhsIm": c.ip_lhs.imag,
        "ipRhsRe": c.ip_rhs.real, "ipRhsIm": c.ip_rhs.imag,
        "ipError": c.ip_error,
    } for c in rep.cases]
    path = _write_report(cfg, doc, rows, "matching_report")
    print(f"[{'PASS' if rep.passed else 'FAIL'}] matching p={cfg.p} {cfg.ext} "
          f"samples={cfg.samples} shape={rep.max_shape_residual:.3e} "
          f"ip={rep.max_ip_error:.3e} ({time.time() - start:.1f}s)")
    print(f"report: {path}")
    return 0 if rep.passed else 1


def cmd_tables(cfg: RunConfig) -> int:
    start = time.time()
    ctx = LocalFieldCtx(cfg.p, cfg.precision)
    lo, hi = cfg.val_window
    rows = []
    max_delta = 0.0
    for m in range(0, 5):
        for v in range(lo, hi + 1):
            xi = Fraction(ctx.p) ** v
            closed = o_kuz_closed(ctx, m, xi)
            direct = o_kuz_direct(ctx, KSection.of({m: 1.0}), KSection.basic(), xi)
            delta = abs(closed - direct)
            max_delta = max(max_delta, delta)
            rows.append({
                "table": "kuznetsov", "m": m, "xiVal": v,
                "closedRe": closed.real, "closedIm": closed.imag,
                "directRe": direct.real, "directIm": direct.imag,
                "delta": delta,
            })
    fw = basic_fW0(ctx, cfg.ext, 1.0)
    for v in range(lo, hi + 1):
        xi = Fraction(ctx.p) ** v
        closed = fw(xi)
        series = fW_series_value(ctx, cfg.ext, 1.0, xi)
        delta = abs(closed - series)
        max_delta = max(max_delta, delta)
        rows.append({
            "table": "basic-fs0(s=1)", "m": -1, "xiVal": v,
            "closedRe": closed.real, "closedIm": closed.imag,
            "directRe": series.real, "directIm": series.imag,
            "delta": delta,
        })
    doc = {
        "schemaVersion": 1,
        "command": "tables",
        "config": cfg.header(),
        "rows": rows,
        "maxDelta": max_delta,
        "pass": max_delta <= cfg.tolerance,
    }
    path = _write_report(cfg, doc, rows, "tables")
    print(f"[{'PASS' if doc['pass'] else 'FAIL'}] tables p={cfg.p} "
          f"maxDelta={max_delta:.3e} ({time.time() - start:.1f}s)")
    print(f"report: {path}")
    return 0 if doc["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padicorb",
        description="Exact nonarchimedean orbital-integral verification suites",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify-fl", "verify the Hecke fundamental lemma"),
        ("verify-matching", "verify the matching isomorphism on random input"),
        ("tables", "emit closed-form vs direct orbital tables"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--p", type=int, default=None, help="odd prime (default 3)")
        sp.add_argument("--ext", choices=["split", "inert"], default=None)
        sp.add_argument("--hecke", type=str, default=None,
                        help="Hecke elements: 'n:c,n:c;n:c' (';' separates elements; "
                             "empty means h0)")
        sp.add_argument("--val-window", dest="val_window", type=str, default=None,
                        help="valuation window a:b (default -4:4)")
        sp.add_argument("--precision", type=int, default=None)
        sp.add_argument("--tolerance", type=float, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None,
                        help="random samples for verify-matching")
        sp.add_argument("--format", choices=["json", "csv"], default=None)
        sp.add_argument("--out", type=str, default=None, help="report file path")
        sp.add_argument("--config", type=str, default=None,
                        help="key=value config file (flags take precedence)")
    return ap


def _fold_value_flags(argv: list[str]) -> list[str]:
    """Glue values that begin with '-' onto their flag (e.g. --val-window -4:4)."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--val-window", "--hecke", "--out") and i + 1 < len(argv) \
                and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    argv = _fold_value_flags(list(argv))
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        cfg = resolve_config(args)
        if args.command == "verify-fl":
            parse_hecke_list(cfg.hecke)  # usage validation before any work
            return cmd_verify_fl(cfg)
        if args.command == "verify-matching":
            return cmd_verify_matching(cfg)
        if args.command == "tables":
            return cmd_tables(cfg)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except PadicOrbError as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())
