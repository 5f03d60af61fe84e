"""Command-line front end: identity suites, inequality checks, sweeps, studies.

Commands write JSON and/or CSV reports into --out. Every file embeds the
fully resolved configuration (surface, parameters, grid, seed, version),
so a report is reproducible from its own header. JSON reports carry a
"timestamp" field; everything else is byte-deterministic for identical
inputs. Exit codes: 0 success/PASS, 1 verification failure, 2 input or
numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, geometry, quadrature, surfaces, verifier
from .errors import UmbilicError
from .quadrature import GridSpec

DEFAULT_SEED = 1729
DEFAULT_EPS = (0.5, 0.25, 0.1, 0.05)
DEFAULT_IDENTITY_TOL = 1e-8
# second-derivative-level identity: two extra jet orders cost ~100x in noise
BOCHNER_TOL_FACTOR = 100.0

VERIFY_CSV_COLUMNS = (
    "eps", "vol_omega_c", "term1", "term2", "lhs", "rhs", "margin",
    "cond3_value", "sharp_gap",
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="umbilic",
        description="curvature identity checks and sublevel-volume inequality reports",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, eps_flag=True):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--preset", help="built-in surface name")
        src.add_argument("--file", help="surface definition file")
        sp.add_argument("--c", type=float, default=None,
                        help="override the background curvature")
        sp.add_argument("--grid", default="512x512", metavar="NUxNV",
                        help="base grid cells per axis (default 512x512)")
        sp.add_argument("--depth", type=int, default=6,
                        help="adaptive subdivision depth near the interface")
        if eps_flag:
            sp.add_argument("--eps", default=None, metavar="LIST",
                            help="comma-separated threshold ladder, descending")
        sp.add_argument("--tol", type=float, default=None,
                        help="tolerance override (command-specific)")
        sp.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (default: current)")
        sp.add_argument("--format", default="both", choices=("json", "csv", "both"))
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        return sp

    sp = common(sub.add_parser("identities", help="residuals of the curvature identities"),
                eps_flag=False)
    sp.add_argument("--n", type=int, default=1000, help="number of sample points")

    sp = common(sub.add_parser("verify", help="volume inequality along a threshold ladder"))
    sp.add_argument("--eps0", type=float, default=None,
                    help="also evaluate the sufficient conditions at this threshold")
    sp.add_argument("--hsup-override", type=float, default=None, dest="hsup_override",
                    help="replace the measured sup|H| in the constant")

    common(sub.add_parser("sweep", help="sharpness gap ladder on revolution ellipsoids"))

    sp = common(sub.add_parser("convergence", help="grid-convergence study"))
    sp.add_argument("--field", default="area", choices=("area", "total_R", "vol"),
                    help="integrand: area, total curvature, or sublevel volume (needs --eps)")
    sp.add_argument("--levels", type=int, default=3, help="number of doubling levels")

    sub.add_parser("list-presets", help="available surfaces and their defaults")
    return p


# -- config handling ----------------------------------------------------------


def _parse_grid(text) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"--grid expects NUxNV, got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_eps(text):
    if text is None:
        return list(DEFAULT_EPS)
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"--eps expects comma-separated numbers, got {text!r}") from None


def _param_overrides(extra) -> dict:
    """Leftover `--name value` pairs become surface parameters."""
    if len(extra) % 2:
        raise ValueError(f"parameter flag without a value near {extra[-1]!r}")
    out = {}
    for flag, value in zip(extra[::2], extra[1::2]):
        if not (flag.startswith("--") and len(flag) > 2):
            raise ValueError(f"unrecognized argument {flag!r}")
        try:
            out[flag[2:]] = float(value)
        except ValueError:
            raise ValueError(f"parameter {flag} expects a number, got {value!r}") from None
    return out


def _resolve_surface(args, params) -> surfaces.ImmersionSpec:
    if args.file:
        spec = surfaces.load_definition(args.file)
        if params:
            unknown = set(params) - set(spec.params)
            if unknown:
                raise ValueError(
                    f"parameters {sorted(unknown)} are not declared by {args.file}"
                )
            spec = spec.with_params(**params)
            surfaces.validate(spec)
    elif args.preset:
        spec = surfaces.preset(args.preset, params or None)
    else:
        raise ValueError("choose a surface with --preset or --file")
    if args.c is not None and args.c != spec.ambient_c:
        spec = replace(spec, ambient_c=float(args.c))
        surfaces.validate(spec)
    return spec


def _grid_of(args) -> GridSpec:
    nu, nv = _parse_grid(args.grid)
    return GridSpec(nu, nv, args.depth)


def _config_payload(args, spec, grid, **extras):
    # output routing (--out, --format) stays out of the payload so reruns
    # into different directories produce identical reports
    cfg = {
        "command": args.command,
        "source": f"file:{args.file}" if args.file else f"preset:{args.preset}",
        "grid": {"nu": grid.nu, "nv": grid.nv, "adaptive_depth": grid.adaptive_depth},
        "seed": args.seed,
        "version": __version__,
    }
    cfg.update(extras)
    return cfg


def _surface_payload(spec):
    return {
        "name": spec.name,
        "params": {k: float(v) for k, v in sorted(spec.params.items())},
        "c": spec.ambient_c,
        "closed": spec.is_closed,
        "components": list(spec.component_sources()),
    }


def _config_lines(cfg, spec):
    lines = [
        f"command={cfg['command']}",
        f"source={cfg['source']}",
        f"surface={spec.name}",
        "params=" + ",".join(f"{k}:{v!r}" for k, v in sorted(spec.params.items())),
        f"c={spec.ambient_c!r}",
        f"grid={cfg['grid']['nu']}x{cfg['grid']['nv']}",
        f"depth={cfg['grid']['adaptive_depth']}",
        f"seed={cfg['seed']}",
        f"version={cfg['version']}",
    ]
    for key in sorted(cfg):
        if key not in ("command", "source", "grid", "seed", "version"):
            lines.append(f"{key}={cfg[key]}")
    return lines


def _write_json(path: Path, payload):
    payload = dict(payload)
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows, config_lines):
    with open(path, "w", newline="") as fh:
        for line in config_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _emit(args, stem, payload, csv_header, csv_rows, config_lines):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if args.format in ("json", "both"):
        p = out / f"{stem}_report.json"
        _write_json(p, payload)
        written.append(p)
    if args.format in ("csv", "both"):
        p = out / f"{stem}_rows.csv"
        _write_csv(p, csv_header, csv_rows, config_lines)
        written.append(p)
    for p in written:
        print(f"wrote {p}")


# -- commands -------------------------------------------------------------------


def _sample_interior(spec, n, seed):
    rng = np.random.default_rng(seed)
    u0, u1 = spec.u_range
    v0, v1 = spec.v_range
    m = spec.singular_margin
    if not spec.periodic_u:
        u0, u1 = u0 + m, u1 - m
    if not spec.periodic_v:
        v0, v1 = v0 + m, v1 - m
    return rng.uniform(u0, u1, n), rng.uniform(v0, v1, n)


def cmd_identities(args, params) -> int:
    spec = _resolve_surface(args, params)
    grid = _grid_of(args)  # recorded for reproducibility; sampling is random
    tol = args.tol if args.tol is not None else DEFAULT_IDENTITY_TOL
    if tol <= 0:
        raise ValueError("--tol must be positive")
    us, vs = _sample_interior(spec, args.n, args.seed)

    res = geometry.identity_residuals(geometry.point_geometry(spec, us, vs))
    stats = {k: v for k, v in res.normalized().items()}
    stats["bochner"] = geometry.bochner_residual(spec, us, vs).normalized()

    rows = []
    all_ok = True
    for name in ("codazzi", "div", "smo", "norm", "bochner"):
        arr = np.asarray(stats[name])
        bound = tol * BOCHNER_TOL_FACTOR if name == "bochner" else tol
        ok = bool(np.max(arr) < bound)
        all_ok &= ok
        rows.append({
            "identity": name,
            "max_residual": float(np.max(arr)),
            "mean_residual": float(np.mean(arr)),
            "tolerance": bound,
            "passed": ok,
        })

    cfg = _config_payload(args, spec, grid, n=args.n, tol=tol)
    payload = {
        "config": cfg,
        "surface": _surface_payload(spec),
        "chi": None,
        "H_sup": None,
        "C_const": None,
        "rows": rows,
        "verdict": "PASS" if all_ok else "FAIL",
        "errors": [],
    }
    csv_rows = [
        [r["identity"], repr(r["max_residual"]), repr(r["mean_residual"]),
         repr(r["tolerance"]), r["passed"]]
        for r in rows
    ]
    _emit(args, "identities", payload,
          ("identity", "max_residual", "mean_residual", "tolerance", "passed"),
          csv_rows, _config_lines(cfg, spec))
    print(f"identities: {payload['verdict']} "
          f"(worst {max(r['max_residual'] for r in rows):.3e} over {args.n} points)")
    return 0 if all_ok else 1


def cmd_verify(args, params) -> int:
    spec = _resolve_surface(args, params)
    grid = _grid_of(args)
    ladder = _parse_eps(args.eps)
    if args.tol is not None and args.tol <= 0:
        raise ValueError("--tol must be positive")
    report = verifier.verify_prel(
        spec, ladder, grid, h_sup_override=args.hsup_override, tol_margin=args.tol
    )

    corollary = None
    if args.eps0 is not None:
        rec = verifier.corollary_check(spec, args.eps0, grid)
        corollary = {
            "eps0": rec.eps0,
            "cond1_max_gradH2": rec.cond1_max_gradH2,
            "cond1_holds": rec.cond1_holds,
            "cond2_max_excess": rec.cond2_max_excess,
            "cond2_holds": rec.cond2_holds,
            "cond3_rows": [list(t) for t in rec.cond3_rows],
            "cond3_trend": rec.cond3_trend,
            "cond3_supported": rec.cond3_supported,
            "verdict": rec.verdict,
            "notes": list(rec.notes),
        }

    rows = [
        {
            "eps": r.eps,
            "vol_omega_c": r.vol_omega_c,
            "term1": r.term1,
            "term2": r.term2,
            "lhs": r.lhs,
            "rhs": r.rhs,
            "margin": r.margin,
            "cond3_value": r.cond3_value,
            "sharp_gap": r.sharp_gap,
            "tol_margin": r.tol_margin,
            "passed": r.passed,
            "c_min_empirical": r.c_min_empirical,
        }
        for r in report.rows
    ]
    cfg = _config_payload(
        args, spec, grid,
        eps=[float(e) for e in ladder],
        eps0=args.eps0,
        tol=args.tol,
        hsup_override=args.hsup_override,
    )
    payload = {
        "config": cfg,
        "surface": _surface_payload(spec),
        "chi": {"estimate": report.chi_estimate, "rounded": report.chi_rounded},
        "H_sup": report.H_sup,
        "C_const": report.C_const,
        "rows": rows,
        "verdict": report.verdict,
        "errors": list(report.warnings),
    }
    if corollary is not None:
        payload["corollary"] = corollary
    csv_rows = [[repr(r[k]) for k in VERIFY_CSV_COLUMNS] for r in rows]
    _emit(args, "verify", payload, VERIFY_CSV_COLUMNS, csv_rows, _config_lines(cfg, spec))

    print(f"verify: {report.verdict} surface={spec.name} chi={report.chi_rounded} "
          f"C={report.C_const:.6g}")
    for r in report.rows:
        cmin = "n/a" if r.c_min_empirical is None else f"{r.c_min_empirical:.4g}"
        print(f"  eps={r.eps:<6g} margin={r.margin:+.6e} tol={r.tol_margin:.2e} "
              f"minimal C={cmin}")
    for w in report.warnings:
        print(f"  note: {w}")
    return 0 if report.verdict == "PASS" else 1


def cmd_sweep(args, params) -> int:
    spec = _resolve_surface(args, params)
    grid = _grid_of(args)
    ladder = _parse_eps(args.eps) if args.eps else [0.4, 0.2, 0.1, 0.05]
    rows = verifier.sharpness_gap(spec, ladder, grid)
    trend = verifier.classify_trend([abs(r.normalized_gap) for r in rows])

    cfg = _config_payload(args, spec, grid, eps=[float(e) for e in ladder])
    payload = {
        "config": cfg,
        "surface": _surface_payload(spec),
        "chi": None,
        "H_sup": None,
        "C_const": None,
        "rows": [
            {"eps": r.eps, "sharp_gap": r.sharp_gap,
             "normalized_gap": r.normalized_gap, "trend": trend}
            for r in rows
        ],
        "verdict": trend,
        "errors": [],
    }
    csv_rows = [[repr(r.eps), repr(r.sharp_gap), repr(r.normalized_gap), trend] for r in rows]
    _emit(args, "sweep", payload, ("eps", "sharp_gap", "normalized_gap", "trend"),
          csv_rows, _config_lines(cfg, spec))
    print(f"sweep: |normalized gap| trend is {trend}")
    for r in rows:
        print(f"  eps={r.eps:<6g} gap={r.sharp_gap:+.6e} normalized={r.normalized_gap:+.6e}")
    return 0 if trend == "decreasing" else 1


def cmd_convergence(args, params) -> int:
    spec = _resolve_surface(args, params)
    grid = _grid_of(args)
    if args.levels < 3:
        raise ValueError("--levels must be at least 3")
    factor = 2 ** (args.levels - 1)
    if grid.nu % factor or grid.nv % factor:
        raise ValueError(
            f"--grid {grid.nu}x{grid.nv} is not divisible by {factor} for {args.levels} levels"
        )
    base = GridSpec(grid.nu // factor, grid.nv // factor, grid.adaptive_depth)
    grids = [base]
    while len(grids) < args.levels:
        grids.append(grids[-1].doubled())

    if args.field == "area":
        field, region = (lambda pg: 1.0), quadrature.ALL
    elif args.field == "total_R":
        field, region = (lambda pg: pg.R), quadrature.ALL
    else:
        ladder = _parse_eps(args.eps)
        if args.eps is None or len(ladder) != 1:
            raise ValueError("--field vol needs --eps with exactly one threshold")
        field, region = (lambda pg: 1.0), quadrature.sublevel(ladder[0])

    study = quadrature.convergence_study(spec, field, region, grids)

    def order_cell(o):
        if o is None:
            return ""
        return o if isinstance(o, str) else repr(o)

    per_row_err = {}
    for k in range(2, len(study.rows)):
        o = study.rows[k].estimated_order
        d = abs(study.rows[k].value - study.rows[k - 1].value)
        if o == math.inf:
            per_row_err[k] = 0.0
        elif isinstance(o, float):
            per_row_err[k] = d / (2.0**o - 1.0)
        else:
            per_row_err[k] = d
    rows = []
    for k, row in enumerate(study.rows):
        rows.append({
            "grid": f"{row.grid.nu}x{row.grid.nv}",
            "value": row.value,
            "estimated_order": order_cell(row.estimated_order),
            "error_estimate": per_row_err.get(k, ""),
        })

    cfg = _config_payload(args, spec, grid, field=args.field, levels=args.levels,
                          eps=args.eps)
    payload = {
        "config": cfg,
        "surface": _surface_payload(spec),
        "chi": None,
        "H_sup": None,
        "C_const": None,
        "rows": rows,
        "verdict": order_cell(study.order) or "n/a",
        "errors": [],
    }
    csv_rows = [
        [r["grid"], repr(r["value"]), r["estimated_order"],
         "" if r["error_estimate"] == "" else repr(r["error_estimate"])]
        for r in rows
    ]
    _emit(args, "convergence", payload,
          ("grid", "value", "estimated_order", "error_estimate"),
          csv_rows, _config_lines(cfg, spec))
    print(f"convergence: value={study.value!r} order={order_cell(study.order) or 'n/a'} "
          f"error~{study.error_estimate:.3e}")
    return 0


def cmd_list_presets() -> int:
    for name in surfaces.PRESET_NAMES:
        defaults = surfaces.preset_defaults(name)
        spec = surfaces.preset(name)
        shape = "closed" if spec.is_closed else "open"
        args_text = ", ".join(f"{k}={v}" for k, v in defaults.items())
        print(f"{name}({args_text})  [{shape}, c={spec.ambient_c}]")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        if args.command == "list-presets":
            if extra:
                raise ValueError(f"unrecognized arguments: {' '.join(extra)}")
            return cmd_list_presets()
        params = _param_overrides(extra)
        if args.command == "identities":
            return cmd_identities(args, params)
        if args.command == "verify":
            return cmd_verify(args, params)
        if args.command == "sweep":
            return cmd_sweep(args, params)
        if args.command == "convergence":
            return cmd_convergence(args, params)
        raise ValueError(f"unknown command {args.command!r}")
    except (UmbilicError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
