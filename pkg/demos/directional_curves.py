"""Zero sets of directional derivatives beyond the nodal line.

For a direction e_theta the zero set of u_theta = <grad u, e_theta>,
restricted to the half-region to the right of the nodal line, is a single
simple arc joining two boundary points.  Every such arc passes through
the critical point, which is where all of them meet.  This script
extracts the arcs for 8 directions on the N = 16 ellipse and writes them
to CSV files for plotting.

Run:  python demos/directional_curves.py [out_dir]
"""

import math
import sys
from pathlib import Path

import numpy as np

from eigencrit import (DomainSpec, ScalarField, assemble_dirichlet_laplacian, build_grid,
                       directional_field, extract_level_curve, find_critical_points, make_family,
                       normalize_mode, solve_lowest)
from eigencrit.contours import is_simple_polyline

out = Path(sys.argv[1] if len(sys.argv) > 1 else "directional-out")
out.mkdir(parents=True, exist_ok=True)

domain = make_family(DomainSpec("ellipse", N=16))
grid = build_grid(domain, 1 / 64)
modes = solve_lowest(assemble_dirichlet_laplacian(grid), 2, tol=1e-10)
u = ScalarField(grid, normalize_mode(modes[1], domain).values)
center = extract_level_curve(u)[0].mean_x
peak = max(find_critical_points(u), key=lambda c: c.x)
print(f"right critical point at ({peak.x:.4f}, {peak.y:.4f})")

for k in range(8):
    theta = math.pi * k / 8
    curves = extract_level_curve(directional_field(u, theta), side="right", cut=center + 0.5)
    arc = curves[0]
    # distance from the critical point to the nearest segment of the arc
    p, q = arc.points[:-1], arc.points[1:]
    t = np.clip(np.einsum("ij,ij->i", (peak.x, peak.y) - p, q - p)
                / np.maximum(np.einsum("ij,ij->i", q - p, q - p), 1e-300), 0, 1)
    d = np.hypot(*(p + t[:, None] * (q - p) - (peak.x, peak.y)).T).min()
    print(f"theta = {theta:.4f}: {len(curves)} arc, {arc.hits} boundary hits, "
          f"simple: {is_simple_polyline(arc.points)}, passes {d:.1e} from the critical point")
    np.savetxt(out / f"theta_{k}.csv", arc.points, delimiter=",", header="x,y", comments="")
print(f"arcs written to {out}/")
