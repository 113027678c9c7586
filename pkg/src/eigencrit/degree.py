"""Winding numbers of planar vector fields along closed paths."""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np

from .fields import ScalarField

ZERO_TOL = 1e-10
MAX_REFINE = 30
TAIL_FRACTION = 1e-4


class DegreeError(RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class DegreeReport:
    """Winding of a field along a closed path.

    ``raw`` is the accumulated angle over ``2 pi`` before rounding and
    ``min_norm`` the smallest field magnitude met on the path, relative to
    the largest.  ``refinements`` counts the bisections inserted.
    """

    winding: int
    raw: float
    min_norm: float
    samples: int
    refinements: int
    tag: str = ""
    eps: float | None = None
    path: np.ndarray | None = dataclasses.field(default=None, repr=False, compare=False)

    def to_dict(self, with_path: bool = False) -> dict:
        out = {k: getattr(self, k) for k in
               ("winding", "raw", "min_norm", "samples", "refinements", "tag", "eps")}
        if with_path and self.path is not None:
            out["path"] = np.asarray(self.path).tolist()
        return out


def vector_field_T(field: ScalarField, x, y) -> np.ndarray:
    """``T = (u_yy u_x - u_xy u_y, u_xx u_y - u_xy u_x)``, shape ``(..., 2)``.

    Along a level curve ``T . grad u = -K |grad u|^3`` with ``K`` the level
    curvature, and zeros of ``T`` are critical points of ``u`` or points with
    a singular Hessian.
    """
    _, ux, uy, uxx, uxy, uyy = field.derivatives(np.asarray(x, float), np.asarray(y, float))
    return np.stack([uyy * ux - uxy * uy, uxx * uy - uxy * ux], axis=-1)


def gradient_field(field: ScalarField, x, y) -> np.ndarray:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return np.stack([field.partial(x, y, dx=1), field.partial(x, y, dy=1)], axis=-1)


def winding_number(F: Callable, path, zero_tol: float = ZERO_TOL,
                   max_refine: int = MAX_REFINE, tag: str = "") -> DegreeReport:
    """Winding of ``F`` along the closed polyline ``path``.

    ``F(x, y)`` returns ``(k, 2)`` vectors.  Consecutive samples whose
    directions differ by ``pi/2`` or more are refined by bisecting the path
    segment between them.  A sample with ``|F| < zero_tol * max|F|`` means
    the path passes through (or next to) a zero and raises `DegreeError`.
    """
    P = np.asarray(path, float)
    if np.allclose(P[0], P[-1]):
        P = P[:-1]
    if len(P) < 3:
        raise DegreeError("path needs at least three vertices")
    V = np.asarray(F(P[:, 0], P[:, 1]), float)
    scale = float(np.hypot(V[:, 0], V[:, 1]).max())
    if scale == 0.0:
        raise DegreeError("field vanishes identically on the path")
    total = 0.0
    min_norm = np.inf
    count = len(P)
    nxt = np.roll(np.arange(len(P)), -1)
    for k in range(len(P)):
        stack = [(P[k], V[k], P[nxt[k]], V[nxt[k]], 0)]
        while stack:
            pa, va, pb, vb, depth = stack.pop()
            na = math.hypot(*va)
            min_norm = min(min_norm, na / scale)
            if na < zero_tol * scale:
                raise DegreeError(f"field vanishes near ({pa[0]:.6g}, {pa[1]:.6g})")
            step = math.atan2(va[0] * vb[1] - va[1] * vb[0], va[0] * vb[0] + va[1] * vb[1])
            if abs(step) < 0.5 * math.pi:
                total += step
                continue
            if depth >= max_refine:
                raise DegreeError(f"direction jumps by {step:.3g} near "
                                  f"({pa[0]:.6g}, {pa[1]:.6g}) after {depth} refinements")
            pm = 0.5 * (pa + pb)
            vm = np.asarray(F(np.array([pm[0]]), np.array([pm[1]])), float).reshape(2)
            count += 1
            # process the first half before the second
            stack.append((pm, vm, pb, vb, depth + 1))
            stack.append((pa, va, pm, vm, depth + 1))
    raw = total / (2 * math.pi)
    return DegreeReport(winding=int(round(raw)), raw=raw, min_norm=float(min_norm),
                        samples=count, refinements=count - len(P), tag=tag, path=P)


def circle(center, radius, n: int = 256) -> np.ndarray:
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def inset_region_path(domain, x0: float, x1: float, eps: float, step: float) -> np.ndarray:
    """Counterclockwise boundary of ``{x0 < x < x1, f1 + eps < y < f2 - eps}``.

    Samples every ``step`` along the horizontal extent.
    """
    n = max(int(math.ceil((x1 - x0) / step)), 2)
    xs = np.linspace(x0, x1, n + 1)
    lo = domain.f1(xs) + eps
    hi = domain.f2(xs) - eps
    if np.any(hi - lo <= 0):
        raise DegreeError("inset is empty somewhere on the requested range")
    m_right = max(int(math.ceil((hi[-1] - lo[-1]) / step)), 2)
    m_left = max(int(math.ceil((hi[0] - lo[0]) / step)), 2)
    bottom = np.column_stack([xs, lo])
    right = np.column_stack([np.full(m_right - 1, x1), np.linspace(lo[-1], hi[-1], m_right + 1)[1:-1]])
    top = np.column_stack([xs[::-1], hi[::-1]])
    left = np.column_stack([np.full(m_left - 1, x0), np.linspace(hi[0], lo[0], m_left + 1)[1:-1]])
    return np.vstack([bottom, right, top, left])


def _region_range(field: ScalarField, side: str, center: float, eps: float):
    """x-range of the inset region on one side of ``center +- 1/2``.

    The far end stops where the height drops to ``3 eps`` or where the
    largest ``|u|`` over a grid column falls below ``TAIL_FRACTION`` of its
    maximum, whichever comes first: in the thin tails the field decays so
    fast that the direction of ``T`` is lost in the discretization noise.
    """
    domain = field.grid.domain
    colmax = np.abs(field.values).max(axis=1)
    live = field.grid.xs[colmax >= TAIL_FRACTION * colmax.max()]
    xs = np.linspace(domain.a, domain.b, 20001)
    ok = (domain.height(xs) >= 3 * eps) & (xs >= live.min()) & (xs <= live.max())
    if side == "right":
        x0 = center + 0.5
        sel = xs[ok & (xs > x0)]
        if len(sel) == 0:
            raise DegreeError("right region is empty")
        return x0, float(min(sel.max(), domain.b - eps))
    if side == "left":
        x1 = center - 0.5
        sel = xs[ok & (xs < x1)]
        if len(sel) == 0:
            raise DegreeError("left region is empty")
        return float(max(sel.min(), domain.a + eps)), x1
    raise ValueError("side must be 'right' or 'left'")


def region_degree_T(field: ScalarField, side: str, center: float = 0.0,
                    eps: float | None = None, field_fn: Callable | None = None) -> DegreeReport:
    """Winding of ``T`` along the inset boundary of the right region
    ``{x > center + 1/2}`` or the left region ``{x < center - 1/2}``.

    The inset distance starts at ``4h`` and grows by ``h`` up to ``8h`` when
    the path meets a near-zero of the field.
    """
    h = field.grid.h
    F = field_fn or (lambda x, y: vector_field_T(field, x, y))
    eps_list = [eps] if eps is not None else [k * h for k in range(4, 9)]
    last = None
    for e in eps_list:
        try:
            x0, x1 = _region_range(field, side, center, e)
            path = inset_region_path(field.grid.domain, x0, x1, e, 0.5 * h)
            rep = winding_number(F, path, tag="T" if field_fn is None else "custom")
            return dataclasses.replace(rep, eps=e)
        except DegreeError as err:
            last = err
    raise DegreeError(f"no zero-free inset path: {last}")


def point_in_polygon(loop, p) -> bool:
    """Even-odd ray test."""
    P = np.asarray(loop, float)
    x, y = p
    xa, ya = P[:, 0], P[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    straddle = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = xa + (y - ya) * (xb - xa) / (yb - ya)
    return bool(np.count_nonzero(straddle & (x < xc)) % 2)


def loop_index_sum(points, indices, loop) -> int:
    """Sum of the indices of the points enclosed by the polygon ``loop``."""
    return int(sum(i for p, i in zip(points, indices) if point_in_polygon(loop, p)))
