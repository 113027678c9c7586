"""Uniform-grid embedding and the Shortley-Weller Dirichlet Laplacian."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.sparse as sp

from .geometry import NormalizedDomain

# arm order used everywhere: east, west, north, south
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))
EAST, WEST, NORTH, SOUTH = range(4)
OPPOSITE = (WEST, EAST, SOUTH, NORTH)

PAD = 4
SNAP = 1e-3
DEFAULT_H = 1.0 / 64
SWEEP_H = (1.0 / 32, 1.0 / 64, 1.0 / 128)


class GridError(ValueError):
    pass


@dataclasses.dataclass(eq=False)
class Grid:
    """Lattice ``x_i = xs[i]``, ``y_j = ys[j]`` padded around the domain.

    ``unknown[i, j]`` marks interior nodes carrying a degree of freedom,
    ``index`` maps them to matrix rows (-1 elsewhere) and ``arms[i, j, d]`` is
    the fraction of ``h`` to the next boundary point or unknown neighbour in
    direction ``d`` (1 when the neighbour is an unknown).  ``clearance`` is
    the smallest axis-aligned distance from a node to the boundary.
    """

    domain: NormalizedDomain
    h: float
    xs: np.ndarray
    ys: np.ndarray
    unknown: np.ndarray
    index: np.ndarray
    arms: np.ndarray
    clearance: np.ndarray

    @property
    def shape(self):
        return self.unknown.shape

    @property
    def n(self) -> int:
        return int(self.unknown.sum())

    @property
    def nodes(self) -> np.ndarray:
        """(n, 2) coordinates of the unknowns, in row order."""
        I, J = np.nonzero(self.unknown)
        order = np.argsort(self.index[I, J])
        return np.column_stack([self.xs[I[order]], self.ys[J[order]]])

    @property
    def ij(self) -> tuple[np.ndarray, np.ndarray]:
        I, J = np.nonzero(self.unknown)
        order = np.argsort(self.index[I, J])
        return I[order], J[order]

    def boundary_adjacent(self) -> np.ndarray:
        return self.unknown & np.any(self.arms < 1.0, axis=-1)

    def to_lattice(self, values, fill=0.0) -> np.ndarray:
        """Scatter a vector over the unknowns into a full lattice array."""
        out = np.full(self.shape, fill, dtype=float)
        I, J = self.ij
        out[I, J] = values
        return out

    def from_lattice(self, arr) -> np.ndarray:
        I, J = self.ij
        return np.asarray(arr)[I, J]


def build_grid(domain: NormalizedDomain, h: float = DEFAULT_H) -> Grid:
    """Embed ``domain`` in the lattice ``h * Z^2``.

    Boundary fractions come from the height functions (vertical arms) and
    from the horizontal extent of the domain at each row (horizontal arms).
    Nodes closer than ``1e-3 h`` to the boundary are removed and treated as
    boundary points.
    """
    if h > 1.0 / 8 + 1e-15:
        raise GridError(f"h = {h} is coarser than 1/8")
    m = round(1.0 / h)
    if abs(m * h - 1.0) > 1e-12:
        raise GridError("1/h must be an integer so that y = 0 and y = 1 are grid lines")
    i0 = math.floor(domain.a / h + 1e-9) - PAD
    i1 = math.ceil(domain.b / h - 1e-9) + PAD
    xs = np.arange(i0, i1 + 1) * h
    ys = np.arange(-PAD, m + PAD + 1) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    colmask = (xs > domain.a + 1e-12) & (xs < domain.b - 1e-12)
    f1 = np.where(colmask, domain.f1(xs), np.inf)
    f2 = np.where(colmask, domain.f2(xs), -np.inf)
    dist = np.full(X.shape + (4,), np.inf)
    inside = (Y > f1[:, None] + 1e-12) & (Y < f2[:, None] - 1e-12)
    dist[..., NORTH] = f2[:, None] - Y
    dist[..., SOUTH] = Y - f1[:, None]
    for j, y in enumerate(ys):
        ext = domain.x_extent(y) if 0.0 < y < 1.0 else None
        if ext is None:
            inside[:, j] = False
            continue
        xl, xr = ext
        dist[:, j, EAST] = xr - xs
        dist[:, j, WEST] = xs - xl
    inside &= np.all(dist > 0, axis=-1)
    if not inside.any():
        raise GridError("no interior node: h is too coarse for this domain")
    snapped = inside & np.any(dist < SNAP * h, axis=-1)
    unknown = inside & ~snapped

    arms = np.ones(X.shape + (4,))
    for d, (di, dj) in enumerate(DIRECTIONS):
        # the padding keeps wrapped-around entries False
        nb = np.roll(unknown, shift=(-di, -dj), axis=(0, 1))
        a = np.where(nb, 1.0, np.minimum(1.0, dist[..., d] / h))
        arms[..., d] = np.where(unknown, a, np.nan)
    index = np.full(unknown.shape, -1, dtype=np.int64)
    # x-major ordering keeps the bandwidth at one column for thin domains
    index[unknown] = np.arange(int(unknown.sum()))
    clearance = np.where(inside, dist.min(axis=-1), 0.0)
    return Grid(domain=domain, h=h, xs=xs, ys=ys, unknown=unknown, index=index, arms=arms,
                clearance=clearance)


@dataclasses.dataclass(eq=False)
class SparseOperator:
    """Discrete ``-Delta`` on the unknowns.

    ``bd_rows``, ``bd_coef`` and ``bd_points`` describe the couplings to
    boundary points, so ``matrix @ g(nodes) + lift(g)`` approximates
    ``-Delta g`` for functions that do not vanish on the boundary.
    """

    matrix: sp.csr_matrix
    grid: Grid
    bd_rows: np.ndarray
    bd_coef: np.ndarray
    bd_points: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def lift(self, g) -> np.ndarray:
        out = np.zeros(self.dimension)
        if len(self.bd_rows):
            np.add.at(out, self.bd_rows, self.bd_coef * g(self.bd_points[:, 0], self.bd_points[:, 1]))
        return out

    def apply_to_function(self, g) -> np.ndarray:
        """Discrete ``-Delta g`` at the unknowns, boundary values included."""
        nodes = self.grid.nodes
        return self.matrix @ g(nodes[:, 0], nodes[:, 1]) + self.lift(g)


def assemble_dirichlet_laplacian(grid: Grid) -> SparseOperator:
    """Shortley-Weller five-point operator.

    With arm fractions ``aE, aW`` the x-part of a row is
    ``-2/(aE (aE+aW) h^2)`` to the east, ``-2/(aW (aE+aW) h^2)`` to the west
    and ``2/(aE aW h^2)`` on the diagonal, and likewise in y.  The row is
    exact on quadratics.
    """
    h2 = grid.h * grid.h
    I, J = grid.ij
    A = grid.arms[I, J]
    rows = grid.index[I, J]
    diag = 2.0 / (A[:, EAST] * A[:, WEST] * h2) + 2.0 / (A[:, NORTH] * A[:, SOUTH] * h2)
    r_list, c_list, v_list = [rows], [rows], [diag]
    br, bc, bp = [], [], []
    for d, (di, dj) in enumerate(DIRECTIONS):
        a = A[:, d]
        a_opp = A[:, OPPOSITE[d]]
        coef = -2.0 / (a * (a + a_opp) * h2)
        ni, nj = I + di, J + dj
        nb_idx = grid.index[ni, nj]
        coupled = (a == 1.0) & (nb_idx >= 0)
        r_list.append(rows[coupled])
        c_list.append(nb_idx[coupled])
        v_list.append(coef[coupled])
        b = ~coupled
        br.append(rows[b])
        bc.append(coef[b])
        bp.append(np.column_stack([grid.xs[I[b]] + di * a[b] * grid.h,
                                   grid.ys[J[b]] + dj * a[b] * grid.h]))
    n = grid.n
    M = sp.csr_matrix((np.concatenate(v_list), (np.concatenate(r_list), np.concatenate(c_list))),
                      shape=(n, n))
    M.sort_indices()
    return SparseOperator(matrix=M, grid=grid, bd_rows=np.concatenate(br),
                          bd_coef=np.concatenate(bc), bd_points=np.vstack(bp))


def write_mask_pgm(grid: Grid, path) -> None:
    """Plain portable graymap of the unknown mask (255 = unknown), top row
    is the largest y."""
    img = np.where(grid.unknown.T[::-1], 255, 0)
    with open(path, "w") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n255\n")
        for row in img:
            fh.write(" ".join(map(str, row)) + "\n")


def write_operator_coo(op: SparseOperator, path) -> None:
    """One ``row col value`` triple per line, rows and columns 0-based."""
    coo = op.matrix.tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")
