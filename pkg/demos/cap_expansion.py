"""Rectangles with a concave cap: the effective length correction.

A rectangle (0, N) x (0, 1) whose left side bulges out to x = -phi(y)
behaves, for the low modes, like a rectangle of length N + a with a
single number a between 0 and max phi:

    lambda_m  ~  pi^2 + m^2 pi^2 / (N + a)^2.

This script solves the cap phi(y) = y (1 - y) / 2 for N = 8, 16, 32,
fits a, and checks that mode m has its m critical points where the
shifted sine sin(m pi (x + a) / (N + a)) has its extrema.

Run:  python demos/cap_expansion.py        (about twenty seconds)
"""

import numpy as np

from eigencrit import (DomainSpec, ScalarField, assemble_dirichlet_laplacian, build_grid,
                       find_critical_points, make_family, normalize_mode, solve_lowest)
from eigencrit.asymptotics import fit_a, landmarks

h = 1 / 64
cap = {"kind": "parabolic", "c": 0.5}
table, fields = {}, {}
for N in (8, 16, 32):
    domain = make_family(DomainSpec("perturbed_rectangle", N=N, phi=cap))
    grid = build_grid(domain, h)
    modes = solve_lowest(assemble_dirichlet_laplacian(grid), 4, tol=1e-10)
    for md in modes[:3]:
        table[(md.index, N)] = md.eigenvalue
    if N == 16:
        fields = {md.index: ScalarField(grid, normalize_mode(md, domain).values) for md in modes}

# The five-point model is used so that the O(h^2) error of the straight part
# cancels against the model instead of being absorbed into a.
fit = fit_a(table, 0.125, h)
print(f"fitted a = {fit.a:.6f} (search interval [0, 1/8], boundary hit: {fit.boundary_hit})")
print(" m   N   residual")
for (m, N), r in sorted(fit.residuals.items()):
    print(f" {m}  {N:2d}   {r:+.3e}")

print("\nMode m on N = 16: critical points against the landmarks of the shifted sine")
for m in (2, 3, 4):
    cps = find_critical_points(fields[m])
    lm = landmarks(16, fit.a, m)
    xs = np.array([c.x for c in cps])
    print(f" m={m}: x = {np.round(xs, 4).tolist()}")
    print(f"      predicted {np.round(lm.extrema, 4).tolist()}, none left of x' = {lm.x_prime:.4f}")
