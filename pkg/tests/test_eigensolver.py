import math

import numpy as np
import pytest

from eigencrit.discretization import assemble_dirichlet_laplacian, build_grid
from eigencrit.eigensolver import (EigenSolverError, nodal_domains, normalize_mode,
                                   read_mode_binary, rectangle_mode_labels,
                                   rectangle_spectrum_oracle, solve_lowest, write_mode_binary,
                                   write_mode_csv)
from eigencrit.geometry import DomainSpec, make_family

from conftest import solved

PI2 = math.pi ** 2


def test_rectangle_lowest_three():
    _, _, modes = solved("rectangle", 4, 1 / 64, 3)
    lam = np.array([m.eigenvalue for m in modes])
    assert np.allclose(lam, rectangle_spectrum_oracle(4, 1 / 64, 3), rtol=1e-8)
    assert np.allclose(lam, np.array([1.0625, 1.25, 1.5625]) * PI2, rtol=5e-3)
    assert lam[0] == pytest.approx(10.4856, abs=5e-2)
    assert all(m.residual <= 1e-10 for m in modes)


def test_residual_and_orthogonality():
    _, grid, modes = solved("rectangle", 4, 1 / 64, 3)
    A = assemble_dirichlet_laplacian(grid).matrix
    V = np.column_stack([m.vector for m in modes])
    for m in modes:
        r = np.linalg.norm(A @ m.vector - m.eigenvalue * m.vector)
        assert r <= 1e-9 * np.linalg.norm(m.vector)
    assert np.allclose(V.T @ V, np.eye(3), atol=1e-8)


def test_square_flags_double_eigenvalue():
    op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("rectangle", N=1)), 1 / 16))
    modes = solve_lowest(op, 3, tol=1e-10)
    assert modes[0].simple
    assert not modes[1].simple and not modes[2].simple
    assert modes[1].eigenvalue == pytest.approx(modes[2].eigenvalue, rel=1e-9)
    assert modes[1].eigenvalue == pytest.approx(rectangle_spectrum_oracle(1, 1 / 16, 2)[1], rel=1e-9)


def test_deterministic():
    op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("ellipse", N=3)), 1 / 16))
    a = solve_lowest(op, 2)
    b = solve_lowest(op, 2)
    assert all(np.array_equal(x.vector, y.vector) for x, y in zip(a, b))


def test_bicgstab_inner_solver_agrees():
    op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("ellipse", N=3)), 1 / 16))
    lu = solve_lowest(op, 2, tol=1e-9)
    it = solve_lowest(op, 2, tol=1e-9, inner="bicgstab")
    assert [m.eigenvalue for m in it] == pytest.approx([m.eigenvalue for m in lu], rel=1e-9)


def test_no_convergence_raises():
    op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("ellipse", N=3)), 1 / 16))
    with pytest.raises(EigenSolverError) as info:
        solve_lowest(op, 2, tol=1e-10, maxiter=1)
    assert info.value.residuals is not None


def test_bad_arguments():
    op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("rectangle", N=2)), 1 / 8))
    with pytest.raises(ValueError):
        solve_lowest(op, 0)
    with pytest.raises(ValueError):
        solve_lowest(op, 2, tol=1e-14)


def test_domain_monotonicity():
    big = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("stadium", N=6)), 1 / 32))
    small = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("rectangle", N=5)), 1 / 32))
    # the N=5 rectangle fits inside the N=6 stadium (straight part of length 5)
    assert solve_lowest(small, 1)[0].eigenvalue >= solve_lowest(big, 1)[0].eigenvalue


def test_normalize_rectangle_mode_two():
    dom, grid, modes = solved("rectangle", 4, 1 / 64, 3)
    nm = normalize_mode(modes[1], dom)
    assert np.abs(nm.values).max() == pytest.approx(4.0)
    nodes = grid.nodes
    exact = 4 * np.sin(math.pi * nodes[:, 0] / 2) * np.sin(math.pi * nodes[:, 1]) * -1
    # positive on the right of x = 2, matching -sin(pi x / 2) sin(pi y) scaled by L
    assert np.all(nm.values[nodes[:, 0] > 2.1] > 0)
    assert np.allclose(nm.values, exact, atol=1e-3 * 4)


def test_normalize_first_mode_positive():
    dom, grid, modes = solved("rectangle", 4, 1 / 64, 3)
    nm = normalize_mode(modes[0], dom)
    assert np.all(nm.values > 0) and nm.values.max() == pytest.approx(dom.L)


def test_ellipse_right_lobe_positive():
    dom, grid, modes = solved("ellipse", 8, 1 / 32, 2)
    nm = normalize_mode(modes[1], dom)
    from eigencrit.fields import ScalarField
    assert ScalarField(grid, nm.values)(2.0, 0.5) > 0


def test_second_mode_has_two_nodal_domains():
    for fam in ("rectangle", "ellipse"):
        dom, grid, modes = solved(fam, 8 if fam == "ellipse" else 4, 1 / 32 if fam == "ellipse" else 1 / 64, 2)
        _, count = nodal_domains(grid, modes[1].vector)
        assert count == 2


def test_oracle_continuum_and_labels():
    assert rectangle_spectrum_oracle(4, None, 2)[1] == pytest.approx(1.25 * PI2)
    h = 1 / 64
    assert rectangle_spectrum_oracle(4, h, 1)[0] == pytest.approx(
        4 / h ** 2 * (math.sin(math.pi * h / 8) ** 2 + math.sin(math.pi * h / 2) ** 2))
    assert rectangle_mode_labels(2, 5)[:4] == [(1, 1), (2, 1), (3, 1), (1, 2)]
    lam = [PI2 * (j * j / 4 + k * k) for j in range(1, 9) for k in range(1, 9)]
    assert np.allclose(rectangle_spectrum_oracle(2, None, 5), sorted(lam)[:5])


def test_mode_dumps(tmp_path):
    dom, grid, modes = solved("rectangle", 4, 1 / 64, 3)
    nm = normalize_mode(modes[1], dom)
    write_mode_csv(nm, tmp_path / "u.csv")
    data = np.loadtxt(tmp_path / "u.csv", delimiter=",", skiprows=1)
    assert data.shape == (grid.n, 3) and np.allclose(data[:, 2], nm.values)
    write_mode_binary(nm, tmp_path / "u.bin")
    lat, h = read_mode_binary(tmp_path / "u.bin")
    assert h == grid.h and np.array_equal(lat, nm.lattice())
