#!/usr/bin/env python3
"""Run the integral inequality check over every closed builtin surface.

For each closed preset this evaluates the epsilon ladder with verify_prel,
prints one summary line per surface plus the worst margin row, and writes a
combined JSON report. Exit code is 0 only if every surface passes.

Typical use:

    python3 scripts/verify_all_presets.py --grid 256x256 --depth 6
    python3 scripts/verify_all_presets.py --eps 0.5,0.25,0.1,0.05 --out runs/
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from umbilic import GridSpec, surfaces, verify_prel

DEFAULT_EPS = (0.5, 0.25, 0.1, 0.05)


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", default="256x256", help="base grid as NUxNV")
    ap.add_argument("--depth", type=int, default=6, help="adaptive refinement depth")
    ap.add_argument("--eps", default=",".join(str(e) for e in DEFAULT_EPS),
                    help="comma separated decreasing epsilon ladder")
    ap.add_argument("--out", type=Path, default=None,
                    help="directory for the combined JSON report (optional)")
    return ap.parse_args(argv)


def closed_presets():
    for name in surfaces.PRESET_NAMES:
        spec = surfaces.preset(name)
        if spec.is_closed:
            yield spec


def main(argv=None) -> int:
    args = parse_args(argv)
    nu, nv = (int(t) for t in args.grid.lower().split("x"))
    grid = GridSpec(nu, nv, args.depth)
    ladder = tuple(float(t) for t in args.eps.split(","))

    results = []
    any_fail = False
    for spec in closed_presets():
        report = verify_prel(spec, ladder, grid)
        worst = min(report.rows, key=lambda r: r.margin - (-r.tol_margin))
        any_fail |= report.verdict != "PASS"
        print(f"{spec.name:<28s} {report.verdict:<4s} chi={report.chi_rounded} "
              f"C={report.C_const:10.4g} worst margin {worst.margin:+.4e} "
              f"(eps={worst.eps}, tol={worst.tol_margin:.2e})")
        for w in report.warnings:
            print(f"    note: {w}")
        results.append({
            "surface": spec.name,
            "params": dict(spec.params),
            "c": spec.ambient_c,
            "verdict": report.verdict,
            "chi": report.chi_rounded,
            "C_const": report.C_const,
            "rows": [
                {"eps": r.eps, "vol_omega_c": r.vol_omega_c, "margin": r.margin,
                 "tol_margin": r.tol_margin, "passed": r.passed}
                for r in report.rows
            ],
            "warnings": list(report.warnings),
        })

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "all_presets_report.json"
        payload = {
            "grid": {"nu": nu, "nv": nv, "adaptive_depth": args.depth},
            "eps": list(ladder),
            "results": results,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")

    print("overall:", "FAIL" if any_fail else "PASS")
    return 1 if any_fail else 0


if __name__ == "__main__":
    sys.exit(main())
