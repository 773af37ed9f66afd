#!/usr/bin/env python3
"""Scan source strengths across the Cheeger threshold and report which side
each end state lands on.

Below the threshold the continuation must collapse to the zero state (sup
norm at regularization-dust scale); above it a genuine profile with a
plateau appears.  The table prints both, and the scan CSV records sup norm,
plateau radius, and the trivial/nontrivial call per strength.

    python3 scripts/rigidity_scan.py --domain interval --lambdas 0.5,0.9,1,1.5,2
    python3 scripts/rigidity_scan.py --domain ball --dim 2 --lambdas 1,2,3 --mesh 1000
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from onelap import io
from onelap.geometry import DomainSpec, cheeger_bounds
from onelap.solver import (ProblemSpec, RadialGrid, continuation_solve,
                           plateau_extent, schedule_preset)

TRIVIAL_CEIL = 1e-6  # end states below this stand for the zero state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", choices=("ball", "interval"), default="interval")
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--lambdas", default="0.5,0.9,1,1.5,2")
    ap.add_argument("--mesh", type=int, default=2000)
    ap.add_argument("--schedule", default="default")
    ap.add_argument("--out", type=Path, default=Path("rigidity_scan.csv"))
    args = ap.parse_args(argv)

    dom = DomainSpec(args.domain, args.dim)
    grid = RadialGrid.uniform(dom, args.mesh)
    schedule = schedule_preset(args.schedule, args.mesh)
    h = cheeger_bounds(dom).exact
    lams = [float(p) for p in args.lambdas.split(",") if p.strip()]

    print(f"domain {dom.kind} dim {dom.dim}, Cheeger constant {h:g}, mesh {args.mesh}")
    print(f"{'lam':>6}  {'sup norm':>12}  {'plateau':>8}  verdict")
    rows = []
    for lam in lams:
        spec = ProblemSpec(dom, gamma=1.0, source=lam)
        sol = continuation_solve(spec, schedule, grid)
        top = float(np.max(np.abs(sol.u)))
        radius = plateau_extent(grid, sol.u)
        trivial = top <= TRIVIAL_CEIL
        side = "<= h" if lam <= h else "> h"
        agree = "" if trivial == (lam <= h) else "   <-- disagrees with the threshold"
        print(f"{lam:6g}  {top:12.4e}  {radius:8.4f}  {'trivial' if trivial else 'nontrivial'} ({side}){agree}")
        rows.append((lam, top, radius, float(trivial)))

    cols = [np.array(c) for c in zip(*rows)]
    path = io.write_csv(args.out, ["lam", "sup_norm", "plateau_radius", "trivial"], cols)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
