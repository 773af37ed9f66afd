#!/usr/bin/env python3
"""Solution curves across source strengths, on a diameter section.

Closed-form mode evaluates the explicit profiles directly and is instant;
solver mode runs the full continuation ladder per strength and interpolates
the end states onto the section, which is the honest (and slow) variant.
Either way one CSV lands next to you with a column per strength, plus a
printed table of plateau height and free-boundary radius.

    python3 scripts/curves_sweep.py --lambdas 2:20:1
    python3 scripts/curves_sweep.py --mode solver --lambdas 2,4,8 --mesh 2000
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from onelap import io, oracle
from onelap.geometry import DomainSpec, cheeger_bounds
from onelap.solver import (ProblemSpec, RadialGrid, continuation_solve,
                           plateau_extent, schedule_preset)


def parse_lambdas(text):
    if ":" in text:
        a, b, st = (float(p) for p in text.split(":"))
        k = int(round((b - a) / st))
        return [a + i * st for i in range(k + 1) if a + i * st <= b + 1e-12]
    return [float(p) for p in text.split(",") if p.strip()]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", choices=("oracle", "solver"), default="oracle")
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--lambdas", default="2:20:1")
    ap.add_argument("--samples", type=int, default=401)
    ap.add_argument("--mesh", type=int, default=2000)
    ap.add_argument("--schedule", default="default")
    ap.add_argument("--out", type=Path, default=Path("curves.csv"))
    args = ap.parse_args(argv)

    lams = parse_lambdas(args.lambdas)
    dom = DomainSpec("ball", args.dim)
    h = cheeger_bounds(dom).exact
    low = [lam for lam in lams if lam <= h]
    if low:
        ap.error(f"strengths {low} sit at or below the Cheeger constant {h:g}; nothing to plot there")

    x = np.linspace(-1.0, 1.0, args.samples)
    header = ["x"]
    cols = [x]
    print(f"{'lam':>6}  {'height':>10}  {'radius':>8}  {'sup diff':>9}")
    for lam in lams:
        exact = oracle.ExplicitSolution(args.dim, lam)
        if args.mode == "oracle":
            u = oracle.profile(args.dim, lam, np.abs(x))
            diff = 0.0
            radius = exact.plateau_radius
        else:
            spec = ProblemSpec(dom, gamma=1.0, source=lam)
            grid = RadialGrid.uniform(dom, args.mesh)
            sol = continuation_solve(spec, schedule_preset(args.schedule, args.mesh), grid)
            u = np.interp(np.abs(x), grid.nodes, sol.u)
            diff = float(np.max(np.abs(sol.u - oracle.profile(args.dim, lam, grid.nodes))))
            radius = plateau_extent(grid, sol.u)
        header.append(f"u_lam{lam:g}")
        cols.append(u)
        print(f"{lam:6g}  {1.0 - math.exp(1.0 - lam):10.6f}  {radius:8.4f}  {diff:9.2e}")

    path = io.write_csv(args.out, header, cols)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
