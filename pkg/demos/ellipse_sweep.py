"""Watch the second mode of long ellipses as they get longer.

For a convex domain of length N and width 1 the nodal line of the second
mode stays within O(1/N) of a vertical segment, and the two interior
critical points (one maximum, one minimum) drift away from it as N grows.
This script runs the ellipse for N = 8, 16, 32 and prints, for each N,
the critical points, the horizontal width of the nodal line and the
winding number of the field T along the boundary of each half-region.

Run:  python demos/ellipse_sweep.py        (about ten seconds)
"""

from eigencrit import (DomainSpec, ScalarField, assemble_dirichlet_laplacian, build_grid,
                       extract_level_curve, find_critical_points, make_family, normalize_mode,
                       solve_lowest)
from eigencrit.degree import region_degree_T

h = 1 / 64
print(" N    L        critical points (x, kind)              width*N     deg T (right, left)")
for N in (8, 16, 32):
    domain = make_family(DomainSpec("ellipse", N=N))
    grid = build_grid(domain, h)
    modes = solve_lowest(assemble_dirichlet_laplacian(grid), 2, tol=1e-10)
    u = ScalarField(grid, normalize_mode(modes[1], domain).values)

    cps = find_critical_points(u)
    line = extract_level_curve(u)[0]
    # T winds once around each half-region beyond the nodal line
    center = line.mean_x
    wr = region_degree_T(u, "right", center).winding
    wl = region_degree_T(u, "left", center).winding
    pts = ", ".join(f"({c.x:+.3f}, {c.kind})" for c in cps)
    print(f"{N:2d}  {domain.L:7.4f}  {pts:40s}  {line.width * N:.2e}   ({wr}, {wl})")

print("\nThe ellipse is symmetric, so its nodal line is the segment x = 0 and the")
print("width is at roundoff level.  Try the egg-shaped domain built by")
print("eigencrit.geometry.egg_heights for a curved nodal line.")
