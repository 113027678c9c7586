import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eigencrit.discretization import (EAST, NORTH, SOUTH, WEST, GridError,
                                      assemble_dirichlet_laplacian, build_grid, write_mask_pgm,
                                      write_operator_coo)
from eigencrit.eigensolver import rectangle_spectrum_oracle
from eigencrit.geometry import DomainSpec, make_family

CAP = {"kind": "parabolic", "c": 0.5}


def test_rectangle_grid_counts():
    g = build_grid(make_family(DomainSpec("rectangle", N=4)), 1 / 8)
    I, J = g.ij
    assert g.n == 31 * 7
    assert len(np.unique(I)) == 31 and len(np.unique(J)) == 7
    assert np.all(g.arms[I, J] == 1.0)


def test_ellipse_fractions_only_near_boundary():
    g = build_grid(make_family(DomainSpec("ellipse", N=4)), 1 / 32)
    I, J = g.ij
    short = np.any(g.arms[I, J] < 1.0, axis=1)
    assert short.any()
    # a short arm means the neighbour in that direction is not an unknown
    for d, (di, dj) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
        s = g.arms[I, J, d] < 1.0
        assert not np.any(g.unknown[I[s] + di, J[s] + dj])


def test_perturbed_left_fractions_follow_cap():
    dom = make_family(DomainSpec("perturbed_rectangle", N=8, phi=CAP))
    g = build_grid(dom, 1 / 32)
    I, J = g.ij
    phi = lambda y: 0.5 * y * (1 - y)
    rows = np.unique(J)[1:-1]
    for j in rows[:: max(len(rows) // 10, 1)][:10]:
        sel = J == j
        i = I[sel].min()
        x, y = g.xs[i], g.ys[j]
        xb = x - g.arms[i, j, WEST] * g.h
        assert xb == pytest.approx(-phi(y), abs=1e-9)


def test_interior_stencil_values():
    g = build_grid(make_family(DomainSpec("rectangle", N=2)), 1 / 8)
    op = assemble_dirichlet_laplacian(g)
    M = op.matrix.toarray()
    # grids are limited to h <= 1/8, so the 1/4 example is checked through its scaling
    h = g.h
    k = int(np.argmax([np.count_nonzero(r) for r in M]))
    assert M[k, k] == pytest.approx(4 / h ** 2)
    off = M[k][np.arange(len(M)) != k]
    assert sorted(off[off != 0]) == pytest.approx([-1 / h ** 2] * 4)


def test_shortley_weller_half_arm():
    dom = make_family(DomainSpec("perturbed_rectangle", N=8, phi=CAP))
    g = build_grid(dom, 1 / 8)
    op = assemble_dirichlet_laplacian(g)
    I, J = g.ij
    A = g.arms[I, J]
    h = g.h
    # east coefficient for a node with arms (aE, aW, 1, 1), checked against the formula
    sel = np.nonzero((A[:, WEST] < 1.0) & (A[:, NORTH] == 1) & (A[:, SOUTH] == 1))[0]
    assert sel.size
    r = sel[0]
    aE, aW = A[r, EAST], A[r, WEST]
    east = g.index[I[r] + 1, J[r]]
    assert op.matrix[r, east] == pytest.approx(-2 / (aE * (aE + aW)) / h ** 2)
    # the worked example aE = 1/2, others 1, h = 1/4
    assert -2 / (0.5 * 1.5) / 0.25 ** 2 == pytest.approx(-128 / 3)


@pytest.mark.parametrize("family", ["ellipse", "stadium", "perturbed_rectangle"])
def test_exact_on_quadratics(family):
    spec = DomainSpec(family, N=5, phi=CAP if family == "perturbed_rectangle" else None)
    op = assemble_dirichlet_laplacian(build_grid(make_family(spec), 1 / 16))
    q = lambda x, y: 3 * x ** 2 - 2 * x * y + 5 * y ** 2 + x - 7 * y + 2
    got = op.apply_to_function(q)
    assert np.allclose(got, -16.0, rtol=1e-9, atol=1e-9 * 16)


@settings(max_examples=20, deadline=None)
@given(c=st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_quadratic_property(c):
    op = _ellipse_op()
    q = lambda x, y: c[0] * x ** 2 + c[1] * x * y + c[2] * y ** 2 + c[3] * x + c[4] * y + c[5]
    expect = -2 * (c[0] + c[2])
    scale = 1 + sum(abs(v) for v in c)
    assert np.allclose(op.apply_to_function(q), expect, atol=1e-11 * scale / op.grid.h ** 2)


_cache = {}


def _ellipse_op():
    if "e" not in _cache:
        _cache["e"] = assemble_dirichlet_laplacian(
            build_grid(make_family(DomainSpec("ellipse", N=3)), 1 / 16))
    return _cache["e"]


def test_rectangle_operator_symmetric_with_closed_form_spectrum():
    op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("rectangle", N=2)), 1 / 8))
    M = op.matrix.toarray()
    assert np.allclose(M, M.T)
    ev = np.sort(np.linalg.eigvalsh(M))
    assert np.allclose(ev[:6], rectangle_spectrum_oracle(2, 1 / 8, 6), rtol=1e-12)


def test_second_order_convergence_on_ellipse():
    import scipy.sparse.linalg as spla
    lam = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("ellipse", axes=(1, 0.5))), h))
        lam.append(spla.eigs(op.matrix.tocsc(), k=1, sigma=0)[0][0].real)
    # successive differences shrink by about 4 under second-order convergence
    d1, d2 = lam[0] - lam[1], lam[1] - lam[2]
    assert abs(d1) >= 3 * abs(d2)


def test_rectangle_continuum_convergence():
    import scipy.sparse.linalg as spla
    errs = []
    for h in (1 / 8, 1 / 16, 1 / 32):
        op = assemble_dirichlet_laplacian(build_grid(make_family(DomainSpec("rectangle", N=2)), h))
        lam = spla.eigs(op.matrix.tocsc(), k=1, sigma=0)[0][0].real
        errs.append(abs(lam - np.pi ** 2 * 1.25))
    assert errs[0] >= 3 * errs[1] and errs[1] >= 3 * errs[2]


def test_bad_h_rejected():
    dom = make_family(DomainSpec("rectangle", N=2))
    with pytest.raises(GridError):
        build_grid(dom, 0.25)
    with pytest.raises(GridError):
        build_grid(dom, 1 / 10.5)


def test_dumps(tmp_path):
    g = build_grid(make_family(DomainSpec("ellipse", N=2)), 1 / 8)
    op = assemble_dirichlet_laplacian(g)
    write_mask_pgm(g, tmp_path / "m.pgm")
    write_operator_coo(op, tmp_path / "a.coo")
    head = (tmp_path / "m.pgm").read_text().split()
    assert head[0] == "P2" and int(head[1]) == g.shape[0] and int(head[2]) == g.shape[1]
    rows = np.loadtxt(tmp_path / "a.coo")
    assert len(rows) == op.matrix.nnz
