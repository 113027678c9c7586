"""Sampled scalar fields on a grid: derivatives, critical points, curvature.

`ScalarField` interpolates lattice values with a bicubic spline.  The
interpolant is built on the values extended a few nodes beyond the boundary
(linear extrapolation through the boundary data), so derivatives stay
smooth up to about one cell from the boundary.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .discretization import DIRECTIONS, EAST, NORTH, PAD, SOUTH, WEST, Grid

DEGENERACY_TOL = 1e-6
NEWTON_TOL = 1e-10
MERGE_RADIUS = 4.0  # in units of h
PAD_LAYERS = PAD + 1


class FieldError(ValueError):
    pass


def boundary_points(grid: Grid):
    """Boundary points on grid lines next to the unknowns.

    Returns ``(I, J, d, pts)``: node lattice indices, arm direction, and the
    (k, 2) coordinates of the boundary point on that arm.  Arms ending at an
    unknown neighbour are skipped.
    """
    I, J = np.nonzero(grid.unknown)
    out_i, out_j, out_d, out_p = [], [], [], []
    for d, (di, dj) in enumerate(DIRECTIONS):
        nb = grid.unknown[I + di, J + dj]
        sel = ~nb
        a = grid.arms[I[sel], J[sel], d]
        out_i.append(I[sel])
        out_j.append(J[sel])
        out_d.append(np.full(sel.sum(), d))
        out_p.append(np.column_stack([grid.xs[I[sel]] + di * a * grid.h,
                                      grid.ys[J[sel]] + dj * a * grid.h]))
    return (np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_d),
            np.vstack(out_p))


def boundary_normals(grid: Grid, d, pts) -> np.ndarray:
    """Outward unit normals at boundary points reached along arm ``d``."""
    dom = grid.domain
    out = np.empty((len(pts), 2))
    for k, (dd, (x, y)) in enumerate(zip(d, pts)):
        if dd == NORTH:
            out[k] = dom.normal_on_column(x, "top")
        elif dd == SOUTH:
            out[k] = dom.normal_on_column(x, "bottom")
        elif dd == EAST:
            out[k] = dom.normal_on_row(y, "right")
        else:
            out[k] = dom.normal_on_row(y, "left")
    return out


class ScalarField:
    """Grid samples of a function with a smooth interpolant.

    Parameters
    ----------
    grid : Grid
    values : array
        Either a vector over the unknowns or a full lattice array.
    boundary : callable, optional
        ``boundary(x, y, d) -> values`` at boundary points reached along arm
        ``d``.  Defaults to zero (Dirichlet data of an eigenfunction).
    """

    def __init__(self, grid: Grid, values, boundary: Callable | None = None, name: str = "u"):
        values = np.asarray(values, dtype=float)
        if values.shape == grid.shape:
            lat = np.where(grid.unknown, values, 0.0)
        elif values.shape == (grid.n,):
            lat = grid.to_lattice(values)
        else:
            raise FieldError(f"values of shape {values.shape} do not match the grid")
        self.grid = grid
        self.values = lat
        self.boundary = boundary
        self.name = name
        self._bd = None
        self._nodal = None
        self.extended = self._extend()
        self._spline = RectBivariateSpline(grid.xs, grid.ys, self.extended, kx=3, ky=3, s=0)

    @classmethod
    def from_function(cls, grid: Grid, f: Callable, name: str = "f") -> "ScalarField":
        """Sample ``f`` on the unknowns; boundary data is ``f`` itself."""
        nodes = grid.nodes
        return cls(grid, f(nodes[:, 0], nodes[:, 1]), boundary=lambda x, y, d: f(x, y), name=name)

    # boundary data -----------------------------------------------------

    def _boundary_data(self):
        if self._bd is None:
            I, J, d, pts = boundary_points(self.grid)
            if self.boundary is None:
                vals = np.zeros(len(pts))
            else:
                vals = np.asarray(self.boundary(pts[:, 0], pts[:, 1], d), float) \
                    + np.zeros(len(pts))
            self._bd = (I, J, d, pts, vals)
        return self._bd

    def _extend(self, layers: int = 2 * PAD_LAYERS) -> np.ndarray:
        g = self.grid
        ext = self.values.copy()
        known = g.unknown.copy()
        I, J, d, pts, gB = self._boundary_data()
        num = np.zeros(g.shape)
        den = np.zeros(g.shape)
        for dd, (di, dj) in enumerate(DIRECTIONS):
            s = d == dd
            if not s.any():
                continue
            i, j, b = I[s], J[s], gB[s]
            a = g.arms[i, j, dd]
            uP = self.values[i, j]
            v = uP + (b - uP) / a
            # a boundary point hugging the node amplifies noise; extrapolate
            # from the next node inward instead
            i2, j2 = i - di, j - dj
            inner = g.unknown[i2, j2] & (a < 0.5)
            v = np.where(inner, 2 * uP - self.values[i2, j2], v)
            gi, gj = i + di, j + dj
            np.add.at(num, (gi, gj), v)
            np.add.at(den, (gi, gj), 1.0)
        layer = (den > 0) & ~known
        ext[layer] = num[layer] / den[layer]
        known |= layer
        for _ in range(layers - 1):
            num[:] = 0.0
            den[:] = 0.0
            for di, dj in DIRECTIONS:
                k1 = np.roll(known, (di, dj), axis=(0, 1))
                k2 = np.roll(known, (2 * di, 2 * dj), axis=(0, 1))
                e1 = np.roll(ext, (di, dj), axis=(0, 1))
                e2 = np.roll(ext, (2 * di, 2 * dj), axis=(0, 1))
                c = ~known & k1 & k2
                num[c] += 2 * e1[c] - e2[c]
                den[c] += 1.0
            layer = (den > 0) & ~known
            if not layer.any():
                break
            ext[layer] = num[layer] / den[layer]
            known |= layer
        ext[~known] = 0.0
        return ext

    # point evaluation --------------------------------------------------

    def __call__(self, x, y):
        return self._spline.ev(x, y)

    def partial(self, x, y, dx=0, dy=0):
        return self._spline.ev(x, y, dx=dx, dy=dy)

    def derivatives(self, x, y):
        """``(u, ux, uy, uxx, uxy, uyy)`` of the interpolant."""
        ev = self._spline.ev
        return (ev(x, y), ev(x, y, dx=1), ev(x, y, dy=1), ev(x, y, dx=2),
                ev(x, y, dx=1, dy=1), ev(x, y, dy=2))

    def gradient(self, p) -> np.ndarray:
        x, y = p
        return np.array([float(self._spline.ev(x, y, dx=1)), float(self._spline.ev(x, y, dy=1))])

    def hessian(self, p) -> np.ndarray:
        x, y = p
        ev = self._spline.ev
        hxy = float(ev(x, y, dx=1, dy=1))
        return np.array([[float(ev(x, y, dx=2)), hxy], [hxy, float(ev(x, y, dy=2))]])

    # nodal derivatives --------------------------------------------------

    def nodal_derivatives(self) -> dict[str, np.ndarray]:
        """Derivatives at the unknowns from three-point quadratics that use
        the boundary data on short arms (exact for quadratics).

        The mixed derivative differences the nodal first derivatives over
        unknown neighbours only, one-sided next to the boundary.
        Returns lattice arrays ``ux, uy, uxx, uxy, uyy`` (zero elsewhere).
        """
        if self._nodal is not None:
            return self._nodal
        g = self.grid
        h = g.h
        I, J = np.nonzero(g.unknown)
        I_b, J_b, d_b, _, gB = self._boundary_data()
        bval = np.zeros(g.shape + (4,))
        bval[I_b, J_b, d_b] = gB
        uP = self.values[I, J]

        def side(dd):
            di, dj = DIRECTIONS[dd]
            a = g.arms[I, J, dd]
            nb = g.unknown[I + di, J + dj]
            v = np.where(nb, self.values[I + di, J + dj], bval[I, J, dd])
            return a * h, v

        out = {}
        for axis, (plus, minus) in (("x", (EAST, WEST)), ("y", (NORTH, SOUTH))):
            hp, vp = side(plus)
            hm, vm = side(minus)
            den = hp * hm * (hp + hm)
            d1 = (vp * hm ** 2 - vm * hp ** 2 + uP * (hp ** 2 - hm ** 2)) / den
            d2 = 2.0 * (vp * hm + vm * hp - uP * (hp + hm)) / den
            out["u" + axis] = np.zeros(g.shape)
            out["u" + axis][I, J] = d1
            out["u" + axis + axis] = np.zeros(g.shape)
            out["u" + axis + axis][I, J] = d2

        def diff(arr, plus, minus):
            dip, djp = DIRECTIONS[plus]
            dim, djm = DIRECTIONS[minus]
            ok_p = g.unknown[I + dip, J + djp]
            ok_m = g.unknown[I + dim, J + djm]
            vp = arr[I + dip, J + djp]
            vm = arr[I + dim, J + djm]
            c = arr[I, J]
            return np.where(ok_p & ok_m, (vp - vm) / (2 * h),
                            np.where(ok_p, (vp - c) / h, np.where(ok_m, (c - vm) / h, 0.0)))

        uxy = 0.5 * (diff(out["uy"], EAST, WEST) + diff(out["ux"], NORTH, SOUTH))
        out["uxy"] = np.zeros(g.shape)
        out["uxy"][I, J] = uxy
        self._nodal = out
        return out

    def gradient_scale(self) -> float:
        nd = self.nodal_derivatives()
        return float(np.hypot(nd["ux"], nd["uy"]).max())


# --------------------------------------------------------------------------
# critical points


@dataclasses.dataclass(frozen=True)
class CriticalPoint:
    x: float
    y: float
    value: float
    grad_norm: float
    hessian: np.ndarray
    kind: str  # "max" | "min" | "saddle" | "degenerate"
    index: int | None

    @property
    def location(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "value": self.value, "grad_norm": self.grad_norm,
                "hessian": np.asarray(self.hessian).tolist(), "kind": self.kind,
                "index": self.index}


class CriticalPointList(list):
    """List of `CriticalPoint` plus the flagged cells whose Newton iteration
    did not settle (``unresolved``: list of dicts with ``cell`` and
    ``reason``)."""

    def __init__(self, points=(), unresolved=()):
        super().__init__(points)
        self.unresolved = list(unresolved)


def classify(hessian, degeneracy_tol: float = DEGENERACY_TOL) -> tuple[str, int | None]:
    """Kind and index of a critical point from its Hessian.

    ``|det H| < tol * ||H||_F^2`` is degenerate (index undefined); otherwise
    definite Hessians give extrema (index +1), indefinite ones saddles (-1).
    """
    H = np.asarray(hessian, float)
    H = 0.5 * (H + H.T)
    det = float(np.linalg.det(H))
    scale = float(np.sum(H * H))
    if scale == 0.0 or abs(det) < degeneracy_tol * scale:
        return "degenerate", None
    if det < 0:
        return "saddle", -1
    return ("max", 1) if H[0, 0] + H[1, 1] < 0 else ("min", 1)


def _newton(field: ScalarField, p0, gscale, margin, maxit=40):
    g = field.grid
    p = np.array(p0, float)
    dom = g.domain
    for _ in range(maxit):
        grad = field.gradient(p)
        if np.linalg.norm(grad) <= NEWTON_TOL * gscale:
            return p, grad, None
        H = field.hessian(p)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            return None, None, "singular Hessian"
        if np.linalg.norm(step) > 4 * g.h:
            step *= 4 * g.h / np.linalg.norm(step)
        p = p - step
        if not dom.contains(p[0], p[1]):
            return None, None, "left the domain"
    grad = field.gradient(p)
    if np.linalg.norm(grad) <= 1e3 * NEWTON_TOL * gscale:
        return p, grad, None
    return None, None, "no convergence"


def find_critical_points(field: ScalarField, margin: float | None = None,
                         degeneracy_tol: float = DEGENERACY_TOL) -> CriticalPointList:
    """Interior zeros of the gradient.

    Cells whose four corners are unknowns at least ``margin`` (default
    ``2h``) from the boundary and on which both nodal derivative components
    change sign are refined by Newton's method on the interpolated gradient.
    Limits within ``4h`` of each other are merged to their mean.
    """
    g = field.grid
    margin = 2 * g.h if margin is None else margin
    if margin < 2 * g.h - 1e-15:
        raise FieldError("margin must be at least 2h")
    nd = field.nodal_derivatives()
    ok = g.unknown & (g.clearance >= margin)
    cell_ok = ok[:-1, :-1] & ok[1:, :-1] & ok[1:, 1:] & ok[:-1, 1:]

    def changes(a):
        c = np.stack([a[:-1, :-1], a[1:, :-1], a[1:, 1:], a[:-1, 1:]])
        return (c.max(axis=0) >= 0) & (c.min(axis=0) <= 0)

    cand = cell_ok & changes(nd["ux"]) & changes(nd["uy"])
    gscale = field.gradient_scale() or 1.0
    found, unresolved = [], []
    for i, j in zip(*np.nonzero(cand)):
        p0 = (g.xs[i] + 0.5 * g.h, g.ys[j] + 0.5 * g.h)
        p, grad, why = _newton(field, p0, gscale, margin)
        if p is None:
            unresolved.append({"cell": (float(p0[0]), float(p0[1])), "reason": why})
            continue
        found.append(p)
    # merge coincident limits
    merged: list[list[np.ndarray]] = []
    for p in found:
        for grp in merged:
            if np.linalg.norm(np.mean(grp, axis=0) - p) <= MERGE_RADIUS * g.h:
                grp.append(p)
                break
        else:
            merged.append([p])
    points = []
    for grp in merged:
        p = np.mean(grp, axis=0)
        H = field.hessian(p)
        kind, index = classify(H, degeneracy_tol)
        points.append(CriticalPoint(x=float(p[0]), y=float(p[1]), value=float(field(*p)),
                                    grad_norm=float(np.linalg.norm(field.gradient(p))),
                                    hessian=H, kind=kind, index=index))
    points.sort(key=lambda c: (c.x, c.y))
    return CriticalPointList(points, unresolved)


# --------------------------------------------------------------------------
# curvature, directional derivatives


def level_curvature(field, point) -> float:
    """Signed curvature of the level line of ``field`` through ``point``:
    ``-(uyy ux^2 - 2 uxy ux uy + uxx uy^2) / |grad u|^3``."""
    x, y = point
    _, ux, uy, uxx, uxy, uyy = (float(v) for v in field.derivatives(x, y))
    g = math.hypot(ux, uy)
    if g <= 1e-8:
        raise FieldError("curvature undefined at critical point")
    return -(uyy * ux * ux - 2 * uxy * ux * uy + uxx * uy * uy) / g ** 3


def _normal_derivative(field: ScalarField, pts, normals, d):
    """One-sided ``du/dnu`` at boundary points, from the interpolant at two
    inward offsets (the field vanishes on the boundary)."""
    dom = field.grid.domain
    h = field.grid.h
    s = np.full(len(pts), h)
    vert = (d == NORTH) | (d == SOUTH)
    if vert.any():
        s[vert] = np.minimum(h, 0.25 * np.maximum(dom.height(pts[vert, 0]), 1e-12))
    p1 = pts - s[:, None] * normals
    p2 = pts - 2 * s[:, None] * normals
    f1 = field(p1[:, 0], p1[:, 1])
    f2 = field(p2[:, 0], p2[:, 1])
    return -(4 * f1 - f2) / (2 * s)


def directional_field(field: ScalarField, theta: float, boundary: bool = True) -> ScalarField:
    """``u_theta = cos(theta) u_x + sin(theta) u_y`` sampled at the unknowns.

    With ``boundary=True`` the boundary data of the new field is
    ``u_nu <nu, e_theta>`` (the gradient of a function vanishing on the
    boundary is normal to it), with ``u_nu`` taken one-sidedly.
    """
    if not 0.0 <= theta < math.pi + 1e-12:
        raise FieldError("theta must lie in [0, pi)")
    c, s = math.cos(theta), math.sin(theta)
    nd = field.nodal_derivatives()
    vals = c * nd["ux"] + s * nd["uy"]
    bfun = None
    if boundary:
        def bfun(x, y, d):
            pts = np.column_stack([x, y])
            nrm = boundary_normals(field.grid, d, pts)
            un = _normal_derivative(field, pts, nrm, np.asarray(d))
            return un * (nrm[:, 0] * c + nrm[:, 1] * s)
    out = ScalarField(field.grid, vals, boundary=bfun, name=f"{field.name}_theta")
    out.theta = theta
    out.parent = field
    return out


# --------------------------------------------------------------------------
# boundary saddles


@dataclasses.dataclass(frozen=True)
class SaddleReport:
    point: tuple[float, float]
    hessian: np.ndarray
    det: float
    uxy: float

    @property
    def is_saddle(self) -> bool:
        return self.det < 0


def boundary_hessian(field: ScalarField, q, radius: float = 4.0) -> np.ndarray:
    """Hessian at a boundary point by a one-sided least-squares cubic fit.

    Data: unknowns within ``radius * h`` of ``q`` and the zero Dirichlet
    values at the boundary points on grid lines in the same disk.
    """
    g = field.grid
    h = g.h
    q = np.asarray(q, float)
    nodes = g.nodes
    vals = g.from_lattice(field.values)
    near = np.hypot(*(nodes - q).T) <= radius * h
    _, _, _, bpts, bvals = field._boundary_data()
    bnear = np.hypot(*(bpts - q).T) <= radius * h
    P = np.vstack([nodes[near], bpts[bnear]])
    v = np.concatenate([vals[near], bvals[bnear]])
    if near.sum() < 6:
        raise FieldError("too few interior samples near the boundary point")
    X = (P[:, 0] - q[0]) / h
    Y = (P[:, 1] - q[1]) / h
    V = np.column_stack([np.ones_like(X), X, Y, X * X, X * Y, Y * Y,
                         X ** 3, X * X * Y, X * Y * Y, Y ** 3])
    coef, *_ = np.linalg.lstsq(V, v, rcond=None)
    return np.array([[2 * coef[3], coef[4]], [coef[4], 2 * coef[5]]]) / (h * h)


def boundary_saddle_check(field: ScalarField, curve) -> list[SaddleReport]:
    """Hessians at the boundary contacts of a nodal curve.

    At a contact the gradient vanishes (the field is zero along the boundary
    and along the nodal line), so a negative determinant makes it a
    nondegenerate saddle.
    """
    contacts = np.asarray(curve.contacts, float)
    if len(contacts) != 2:
        raise FieldError(f"expected two boundary contacts, found {len(contacts)}")
    out = []
    for q in contacts:
        H = boundary_hessian(field, q)
        out.append(SaddleReport(point=(float(q[0]), float(q[1])), hessian=H,
                                det=float(np.linalg.det(H)), uxy=float(H[0, 1])))
    return out
