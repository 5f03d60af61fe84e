#!/usr/bin/env python3
"""Trace how tight the integral inequality gets on ellipsoids of revolution.

For each aspect ratio b the script shrinks epsilon along a ladder and records
the gap between the two gradient terms and its normalized form. A normalized
gap that decays toward zero as epsilon shrinks means the inequality constant
cannot be improved on that family. Flatter ellipsoids (larger b) start closer
to the limit; near-spherical ones are rejected because the region collapses.

Typical use:

    python3 scripts/sharpness_ladder.py --aspects 1.5,2,3 --grid 512x512 --depth 8
    python3 scripts/sharpness_ladder.py --csv runs/sharpness.csv
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from umbilic import GridSpec, sharpness_gap, surfaces

DEFAULT_EPS = (0.4, 0.2, 0.1, 0.05)
DEFAULT_ASPECTS = (1.5, 2.0)


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--aspects", default=",".join(str(b) for b in DEFAULT_ASPECTS),
                    help="comma separated polar semi-axes b (equatorial axis a=1)")
    ap.add_argument("--eps", default=",".join(str(e) for e in DEFAULT_EPS),
                    help="comma separated decreasing epsilon ladder")
    ap.add_argument("--grid", default="256x256", help="base grid as NUxNV")
    ap.add_argument("--depth", type=int, default=6, help="adaptive refinement depth")
    ap.add_argument("--csv", type=Path, default=None, help="optional CSV output path")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    nu, nv = (int(t) for t in args.grid.lower().split("x"))
    grid = GridSpec(nu, nv, args.depth)
    ladder = tuple(float(t) for t in args.eps.split(","))
    aspects = tuple(float(t) for t in args.aspects.split(","))

    records = []
    for b in aspects:
        spec = surfaces.preset("ellipsoid_rev", {"a": 1.0, "b": b})
        rows = sharpness_gap(spec, ladder, grid)
        print(f"b = {b:g}")
        for r in rows:
            print(f"  eps={r.eps:<6g} gap={r.sharp_gap:+.6e} "
                  f"normalized={r.normalized_gap:+.6e}")
            records.append((b, r.eps, r.sharp_gap, r.normalized_gap))
        first, last = abs(rows[0].normalized_gap), abs(rows[-1].normalized_gap)
        shrink = last / first if first else float("nan")
        print(f"  |normalized| shrink over ladder: {shrink:.4f}")

    if args.csv is not None:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["b", "eps", "sharp_gap", "normalized_gap"])
            for rec in records:
                w.writerow([repr(x) for x in rec])
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
