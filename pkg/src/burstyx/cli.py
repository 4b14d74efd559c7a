"""Command-line front end: bounds, curve sweeps, verification, scheme dumps and plots.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bounds, verifier
from .bounds import DomainError
from .matrix_core import sample_channel
from .model import ParameterError, canonicalize, classify, make_params
from .schemes import FAMILIES, build, check_conditions

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 2, 3, 4

CSV_HEADER = ("x", "eta_ub", "eta_lb", "eta_ia", "eta_hkia", "regime", "tight")
AXES = ("ratio_M_over_N", "ratio_N_over_M", "p_c")
NUMERIC_COLUMNS = ("eta_ub", "eta_lb", "eta_ia", "eta_hkia")

# flag destination -> keys accepted in a --config file
CONFIG_KEYS = {
    "M": ("M",), "N": ("N",), "pd": ("pd", "p_d"), "pc": ("pc", "p_c"),
    "pdc": ("pdc", "p_d_given_c", "p_dgc"), "a": ("a",), "b": ("b",), "seed": ("seed",),
    "trials": ("trials",), "suite": ("suite",), "family": ("family",), "points": ("points",),
    "cap": ("cap",), "axis": ("axis",), "start": ("start",), "stop": ("stop",),
}

DEFAULTS = {"seed": 0, "cap": 12, "a": 1.0, "b": 1.0, "axis": "ratio_M_over_N", "suite": "all"}


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".12g")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o) if isinstance(o, (set, frozenset)) else list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ------------------------------------------------------------ arguments

def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    for dest, keys in CONFIG_KEYS.items():
        if not hasattr(args, dest) or getattr(args, dest) is not None:
            continue
        for k in keys:
            if k in cfg:
                setattr(args, dest, cfg[k])
                break
        else:
            if dest in DEFAULTS:
                setattr(args, dest, DEFAULTS[dest])
    return args


def _params(args, need_probs: bool = True):
    if args.M is None or args.N is None:
        raise UsageError("--M and --N are required")
    if need_probs and None in (args.pd, args.pc, args.pdc):
        raise UsageError("--pd, --pc and --pdc are required")
    M, N = int(args.M), int(args.N)
    if M < 1 or N < 1:
        raise ParameterError(f"antenna counts must be >= 1 (M={M}, N={N})")
    if not need_probs:
        return M, N
    return canonicalize(make_params(M, N, float(args.pd), float(args.pc), float(args.pdc)))


def _add_dims(p: argparse.ArgumentParser) -> None:
    p.add_argument("--M", type=int, help="antennas per transmitter")
    p.add_argument("--N", type=int, help="antennas per receiver")


def _add_probs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pd", type=float, help="direct-link on probability p_d")
    p.add_argument("--pc", type=float, help="cross-link on probability p_c")
    p.add_argument("--pdc", type=float, help="conditional probability p_{d|c}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="burstyx", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON file supplying flag values; explicit flags win")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="upper/lower bounds and per-scheme DoF at one point")
    _add_dims(p)
    _add_probs(p)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("curve", help="sweep bounds along an axis and write CSV")
    _add_dims(p)
    _add_probs(p)
    p.add_argument("--axis", choices=AXES)
    p.add_argument("--start", type=float, help="smallest axis value")
    p.add_argument("--stop", type=float, help="largest axis value")
    p.add_argument("--points", type=int, help="number of grid points")
    p.add_argument("--cap", type=int, help="max(M, N) for ratio sweeps")
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", help="all, " + ", ".join(verifier.SUITES))
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--family", choices=FAMILIES)
    _add_dims(p)
    p.add_argument("--out", help="JSON report path (default stdout)")

    p = sub.add_parser("scheme", help="build a scheme on a random channel and dump it")
    p.add_argument("--family", choices=FAMILIES)
    _add_dims(p)
    _add_probs(p)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--check", action="store_true", help="print the condition residual table")
    p.add_argument("--dump", help="write the scheme JSON to this path")

    p = sub.add_parser("plot", help="render a curve CSV as SVG")
    p.add_argument("--in", dest="inp", required=True, help="CSV from the curve command")
    p.add_argument("--out", required=True, help="SVG path")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    return ap


# -------------------------------------------------------------- bounds

def cmd_bounds(args) -> int:
    p = _params(args)
    rep = bounds.report(p)
    if args.json:
        _write(None, _dumps(rep.to_dict()) + "\n")
        return EXIT_OK
    d = rep.to_dict()
    lines = [
        f"M={p.M} N={p.N} p_d={_fmt(p.p_d)} p_c={_fmt(p.p_c)} p_cd={_fmt(p.p_cd)}",
        f"type {d['type']}, regime {d['regime']}",
        f"eta_ub  {_fmt(rep.eta_ub)}",
        f"eta_lb  {_fmt(rep.eta_lb)}",
        ("tight" if rep.tight else f"not tight ({rep.reason}); gap {_fmt(rep.gap)}"),
        "per scheme:",
    ]
    lines += [f"  {k:24s} {_fmt(v)}" for k, v in sorted(rep.per_scheme.items())]
    _write(None, "\n".join(lines) + "\n")
    return EXIT_OK


# --------------------------------------------------------------- curves

@dataclass(frozen=True)
class SweepSpec:
    axis: str
    p_d: float
    p_c: Optional[float]
    p_dgc: float
    start: Optional[float]
    stop: Optional[float]
    points: Optional[int]
    cap: int
    M: Optional[int] = None
    N: Optional[int] = None


def ratio_pairs(axis: str, cap: int) -> list[tuple[float, int, int]]:
    """Integer (M, N) pairs with max(M, N) = cap, sorted by the axis ratio."""
    pairs = {(m, cap) for m in range(1, cap + 1)} | {(cap, n) for n in range(1, cap + 1)}
    out = [((m / n) if axis == "ratio_M_over_N" else (n / m), m, n) for m, n in pairs]
    return sorted(out)


def sweep_points(spec: SweepSpec) -> list[tuple[float, int, int, float]]:
    """(x, M, N, p_c) for every row of a sweep."""
    if spec.axis in ("ratio_M_over_N", "ratio_N_over_M"):
        if spec.cap < 1:
            raise UsageError("--cap must be >= 1")
        cand = ratio_pairs(spec.axis, spec.cap)
        lo = spec.start if spec.start is not None else -math.inf
        hi = spec.stop if spec.stop is not None else math.inf
        cand = [c for c in cand if lo - 1e-12 <= c[0] <= hi + 1e-12]
        if spec.points is not None:
            if spec.points < 1 or not cand:
                raise UsageError("empty sweep grid")
            a = cand[0][0] if spec.start is None else spec.start
            b = cand[-1][0] if spec.stop is None else spec.stop
            targets = np.linspace(a, b, spec.points) if spec.points > 1 else np.array([a])
            chosen = []
            for t in targets:
                best = min(cand, key=lambda c: (abs(c[0] - t), c[0]))
                if best not in chosen:
                    chosen.append(best)
            cand = sorted(chosen)
        if not cand:
            raise UsageError("empty sweep grid")
        return [(x, m, n, spec.p_c) for x, m, n in cand]
    if spec.M is None or spec.N is None:
        raise UsageError("a p_c sweep needs --M and --N")
    start = 0.0 if spec.start is None else spec.start
    stop = spec.p_d if spec.stop is None else spec.stop
    pts = 51 if spec.points is None else spec.points
    if pts < 1 or stop < start:
        raise UsageError("empty sweep grid")
    grid = np.linspace(start, stop, pts) if pts > 1 else np.array([start])
    if np.any(np.diff(grid) <= 0):
        raise UsageError("sweep grid must be strictly increasing")
    return [(float(x), spec.M, spec.N, float(x)) for x in grid]


def curve_rows(spec: SweepSpec) -> list[dict]:
    rows = []
    for x, M, N, p_c in sweep_points(spec):
        if p_c is None:
            raise UsageError("--pc is required for ratio sweeps")
        try:
            p = canonicalize(make_params(M, N, spec.p_d, p_c, spec.p_dgc))
        except ParameterError as exc:
            raise UsageError(f"grid point x={_fmt(x)} leaves the valid domain: {exc}") from exc
        scale = max(M, N) if spec.axis != "p_c" else 1
        rep = bounds.report(p)
        hk = bounds.hkia_dof(p)
        rows.append({
            "x": x,
            "eta_ub": rep.eta_ub / scale,
            "eta_lb": rep.eta_lb / scale,
            "eta_ia": rep.per_scheme["ia"] / scale,
            "eta_hkia": (hk / scale) if hk is not None else None,
            "regime": classify(p).regime,
            "tight": "true" if rep.tight else "false",
        })
    return rows


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(r["x"]), _fmt(r["eta_ub"]), _fmt(r["eta_lb"]), _fmt(r["eta_ia"]),
                    _fmt(r["eta_hkia"]), str(r["regime"]), r["tight"]])
    return buf.getvalue()


def cmd_curve(args) -> int:
    if args.pd is None or args.pdc is None:
        raise UsageError("--pd and --pdc are required")
    spec = SweepSpec(args.axis, float(args.pd), None if args.pc is None else float(args.pc),
                     float(args.pdc), args.start, args.stop, args.points, int(args.cap),
                     args.M, args.N)
    text = rows_to_csv(curve_rows(spec))
    _write(args.out, text)
    return EXIT_OK


# ---------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    suite = args.suite
    if suite != "all" and suite not in verifier.SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from all, {', '.join(verifier.SUITES)}")
    kw = {}
    if args.family:
        kw["family"] = args.family
    if args.M is not None and args.N is not None:
        kw["M"], kw["N"] = int(args.M), int(args.N)
    rep = verifier.run_suite(suite, seed=int(args.seed), trials=args.trials, **kw)
    _write(args.out, _dumps(rep) + "\n")
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


# ---------------------------------------------------------------- scheme

def cmd_scheme(args) -> int:
    if not args.family:
        raise UsageError("--family is required")
    M, N = _params(args, need_probs=False)
    r = sample_channel(M, N, int(args.seed))
    spec = build(args.family, r, a=float(args.a), b=float(args.b))
    doc = spec.to_dict()
    doc["seed"] = int(args.seed)
    if args.check:
        conds = check_conditions(spec, r)
        width = max(len(c.name) for c in conds)
        lines = [f"{'condition':{width}s}  {'kind':5s}  value          ok"]
        lines += [f"{c.name:{width}s}  {c.kind:5s}  {c.value:.3e}      {'yes' if c.passed else 'NO'}"
                  for c in conds]
        _write(None, "\n".join(lines) + "\n")
        if args.dump:
            _write(args.dump, _dumps(doc) + "\n")
        return EXIT_OK if all(c.passed for c in conds) else EXIT_VERIFY
    _write(args.dump, _dumps(doc) + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ plot

COLORS = {"eta_ub": "#1f77b4", "eta_lb": "#d62728", "eta_ia": "#2ca02c", "eta_hkia": "#9467bd"}


def read_curve_csv(text: str) -> list[dict]:
    rd = csv.reader(io.StringIO(text))
    try:
        header = next(rd)
    except StopIteration:
        raise UsageError("empty CSV") from None
    missing = [c for c in CSV_HEADER if c not in header]
    if missing:
        raise UsageError(f"CSV is missing column(s): {', '.join(missing)}")
    idx = {c: header.index(c) for c in CSV_HEADER}
    rows = []
    for n, line in enumerate(rd, start=2):
        if not line:
            continue
        if len(line) != len(header):
            raise UsageError(f"CSV line {n} has {len(line)} fields, expected {len(header)}")
        try:
            row = {c: float(line[idx[c]]) for c in ("x",) + NUMERIC_COLUMNS}
        except ValueError as exc:
            raise UsageError(f"CSV line {n}: {exc}") from None
        row["tight"] = line[idx["tight"]].strip().lower() == "true"
        rows.append(row)
    if not rows:
        raise UsageError("CSV has no data rows")
    return rows


def render_svg(rows: Sequence[dict], width: int = 640, height: int = 480, xlabel: str = "x",
               ylabel: str = "normalized sum DoF") -> str:
    ml, mr, mt, mb = 60, 130, 20, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = [r["x"] for r in rows]
    ys = [r[c] for r in rows for c in NUMERIC_COLUMNS if not math.isnan(r[c])]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys + [0.0]), max(ys) if ys else 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 <= y0:
        y1 = y0 + 1.0
    y1 += 0.05 * (y1 - y0)

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    dashed_lb = any(not r["tight"] for r in rows)
    out = [f'<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        out.append(f'<text x="{sx(xv):.2f}" y="{mt + ph + 16}" font-size="11" '
                   f'text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{ml - 6}" y="{sy(yv) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" font-size="13" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.2f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.2f})">{ylabel}</text>')
    for k, col in enumerate(NUMERIC_COLUMNS):
        pts = [(sx(r["x"]), sy(r[col])) for r in rows if not math.isnan(r[col])]
        if not pts:
            continue
        dash = ' stroke-dasharray="6,4"' if col == "eta_lb" and dashed_lb else ""
        color = COLORS[col]
        if len(pts) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                       f'points="{coords}"/>')
        else:
            x, y = pts[0]
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        ly = mt + 14 + 18 * k
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 34}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{ml + pw + 40}" y="{ly + 4}" font-size="12">{col}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args) -> int:
    try:
        with open(args.inp, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {args.inp}: {exc}") from exc
    rows = read_curve_csv(text)
    _write(args.out, render_svg(rows, args.width, args.height))
    return EXIT_OK


# ------------------------------------------------------------------ main

COMMANDS = {"bounds": cmd_bounds, "curve": cmd_curve, "verify": cmd_verify,
            "scheme": cmd_scheme, "plot": cmd_plot}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    # --config may appear before or after the subcommand
    argv = list(sys.argv[1:] if argv is None else argv)
    config = None
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            print("error: --config needs a file path", file=sys.stderr)
            return EXIT_USAGE
        config = argv[i + 1]
        del argv[i:i + 2]
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if config is not None:
        args.config = config
    try:
        args = _apply_config(args)
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
