"""Lowest Dirichlet eigenpairs by shift-invert subspace iteration."""

from __future__ import annotations

import dataclasses
import math
import struct

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage

from .discretization import Grid, SparseOperator
from .geometry import NormalizedDomain

SEED = 0x5EED
SIGMA = 0.9 * math.pi ** 2
MAX_MODES = 12


class EigenSolverError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclasses.dataclass(frozen=True, eq=False)
class EigenMode:
    """Eigenpair of the discrete operator.  ``vector`` holds values at the
    grid unknowns (unit 2-norm, largest entry positive)."""

    index: int
    eigenvalue: float
    vector: np.ndarray
    residual: float
    grid: Grid
    simple: bool = True

    def lattice(self, fill=0.0) -> np.ndarray:
        return self.grid.to_lattice(self.vector, fill)


@dataclasses.dataclass(frozen=True, eq=False)
class NormalizedMode:
    """Eigenfunction rescaled to ``L * u / max|u|`` with a sign convention."""

    mode: EigenMode
    domain: NormalizedDomain
    L: float
    scale: float
    sign: int
    values: np.ndarray

    @property
    def grid(self) -> Grid:
        return self.mode.grid

    def lattice(self, fill=0.0) -> np.ndarray:
        return self.grid.to_lattice(self.values, fill)


def _inner_solver(A, sigma, inner, tol):
    n = A.shape[0]
    shifted = (A - sigma * sp.identity(n, format="csr")).tocsc()
    if inner == "lu":
        lu = spla.splu(shifted, permc_spec="NATURAL" if n < 400_000 else "COLAMD")
        return lu.solve
    if inner == "bicgstab":
        ilu = spla.spilu(shifted, drop_tol=1e-5, fill_factor=20)
        M = spla.LinearOperator(shifted.shape, ilu.solve)

        def solve(B):
            out = np.empty_like(B)
            for k in range(B.shape[1]):
                x, info = spla.bicgstab(shifted, B[:, k], M=M, rtol=min(1e-3 * tol, 1e-12),
                                        atol=0.0, maxiter=2000)
                if info != 0:
                    raise EigenSolverError(f"inner BiCGSTAB did not converge (info={info})")
                out[:, k] = x
            return out
        return solve
    raise ValueError(f"unknown inner solver {inner!r}")


def solve_lowest(op: SparseOperator, m: int, tol: float = 1e-8, *, sigma: float = SIGMA,
                 block: int | None = None, maxiter: int = 1000, inner: str = "lu",
                 seed: int = SEED) -> list[EigenMode]:
    """The ``m`` lowest eigenpairs of ``op``.

    Subspace iteration on ``(A - sigma I)^{-1}`` with a block of ``m + 4``
    vectors and a Rayleigh-Ritz step on ``A`` after each sweep.  The operator
    is mildly nonsymmetric near the boundary, so the projected problem is
    solved as a general eigenproblem and the basis is re-orthonormalized.
    Converged when every wanted pair satisfies ``|A u - lam u| <= tol |u|``.
    """
    if not 1 <= m <= MAX_MODES:
        raise ValueError(f"m must be in [1, {MAX_MODES}]")
    if tol < 1e-10:
        raise ValueError("tol must be at least 1e-10")
    A = op.matrix
    n = A.shape[0]
    p = min(block or m + 4, n)
    solve = _inner_solver(A, sigma, inner, tol)
    rng = np.random.default_rng(seed)
    X, _ = np.linalg.qr(rng.standard_normal((n, p)))
    best = None
    for _ in range(maxiter):
        Q, _ = np.linalg.qr(solve(X))
        AQ = A @ Q
        H = Q.T @ AQ
        vals, vecs = np.linalg.eig(H)
        order = np.argsort(vals.real)
        vals, vecs = vals.real[order], vecs.real[:, order]
        X = Q @ vecs
        X /= np.linalg.norm(X, axis=0)
        R = A @ X - X * vals
        res = np.linalg.norm(R, axis=0)
        if best is None or res[:m].max() < best.max():
            best = res[:m]
        if res[:m].max() <= tol:
            break
    else:
        raise EigenSolverError(f"no convergence in {maxiter} sweeps; best residuals {best}",
                               residuals=best)
    simple = np.ones(m, bool)
    for k in range(min(m, p - 1)):
        gap = abs(vals[k + 1] - vals[k])
        if gap < 10 * tol * max(abs(vals[k]), 1.0):
            simple[k] = False
            if k + 1 < m:
                simple[k + 1] = False
    modes = []
    for k in range(m):
        v = X[:, k].copy()
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        v.setflags(write=False)
        modes.append(EigenMode(index=k + 1, eigenvalue=float(vals[k]), vector=v,
                               residual=float(res[k]), grid=op.grid, simple=bool(simple[k])))
    return modes


def rectangle_spectrum_oracle(N: float, h: float | None, count: int) -> np.ndarray:
    """Lowest ``count`` eigenvalues of ``-Delta`` on ``(0, N) x (0, 1)``.

    With ``h`` the five-point values
    ``(4/h^2)[sin^2(j pi h/(2N)) + sin^2(k pi h/2)]``; with ``h=None`` the
    continuum values ``pi^2 (j^2/N^2 + k^2)``.
    """
    jmax = count
    kmax = count
    if h is not None:
        jmax = min(jmax, round(N / h) - 1)
        kmax = min(kmax, round(1 / h) - 1)
    j = np.arange(1, jmax + 1)[:, None]
    k = np.arange(1, kmax + 1)[None, :]
    if h is None:
        lam = math.pi ** 2 * (j ** 2 / N ** 2 + k ** 2)
    else:
        lam = 4.0 / h ** 2 * (np.sin(j * math.pi * h / (2 * N)) ** 2
                              + np.sin(k * math.pi * h / 2) ** 2)
    return np.sort(lam.ravel())[:count]


def rectangle_mode_labels(N: float, count: int) -> list[tuple[int, int]]:
    """(j, k) labels of the continuum rectangle modes in eigenvalue order."""
    pairs = [(j, k) for j in range(1, count + 1) for k in range(1, count + 1)]
    pairs.sort(key=lambda jk: (jk[0] ** 2 / N ** 2 + jk[1] ** 2, jk[1]))
    return pairs[:count]


def nodal_domains(grid: Grid, values) -> tuple[np.ndarray, int]:
    """Connected sign components over the unknowns (4-connectivity).

    Returns a lattice of labels (positive components first, 0 outside) and
    the number of components.
    """
    u = grid.to_lattice(values)
    pos, npos = ndimage.label((u > 0) & grid.unknown)
    neg, nneg = ndimage.label((u < 0) & grid.unknown)
    labels = np.where(pos > 0, pos, np.where(neg > 0, neg + npos, 0))
    return labels, npos + nneg


def normalize_mode(mode: EigenMode, domain: NormalizedDomain | None = None) -> NormalizedMode:
    """Scale to ``L * u / max|u|`` and make the rightmost sign component
    positive.  For a mode without sign change this means positive."""
    domain = domain or mode.grid.domain
    u = np.asarray(mode.vector, float)
    umax = float(np.abs(u).max())
    grid = mode.grid
    labels, count = nodal_domains(grid, u)
    I, J = grid.ij
    right = I == I.max()
    cand = np.nonzero(right)[0]
    k = cand[np.argmax(np.abs(u[cand]))]
    sign = 1 if u[k] > 0 else -1
    if count == 1:
        sign = 1 if u[np.argmax(np.abs(u))] > 0 else -1
    scale = sign * domain.L / umax
    vals = scale * u
    vals.setflags(write=False)
    return NormalizedMode(mode=mode, domain=domain, L=domain.L, scale=scale, sign=sign,
                          values=vals)


# --------------------------------------------------------------------------
# dumps

_HEADER = struct.Struct("<iid")


def write_mode_csv(mode: EigenMode | NormalizedMode, path) -> None:
    grid = mode.grid
    vals = mode.values if isinstance(mode, NormalizedMode) else mode.vector
    nodes = grid.nodes
    np.savetxt(path, np.column_stack([nodes, vals]), delimiter=",", header="x,y,value",
               comments="", fmt="%.17g")


def write_mode_binary(mode: EigenMode | NormalizedMode, path) -> None:
    """16-byte header (int32 nx, int32 ny, float64 h) then the lattice values
    as row-major little-endian doubles, zero outside the unknowns."""
    grid = mode.grid
    lat = mode.lattice()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(lat.shape[0], lat.shape[1], grid.h))
        fh.write(np.ascontiguousarray(lat, dtype="<f8").tobytes())


def read_mode_binary(path) -> tuple[np.ndarray, float]:
    with open(path, "rb") as fh:
        nx, ny, h = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(nx, ny), h
