"""Level curves of sampled fields by marching over cut cells.

Every lattice cell touching the region becomes a polygon: its corners that
lie in the region, plus the boundary points on the cell edges (where the
grid lines leave the region).  Sign changes along the polygon edges give
crossing points, which are joined into segments inside the cell and then
chained across cells by the identity of the edge they lie on.  Edges that
join two boundary points (chords) approximate the boundary, so a curve
ending on a chord ends on the region boundary.
"""

from __future__ import annotations

import dataclasses
from collections import defaultdict

import numpy as np

from .discretization import DIRECTIONS, EAST, NORTH, OPPOSITE, SOUTH, WEST
from .fields import ScalarField, boundary_points

# cell corners counterclockwise from the lower left and the direction of
# travel along each cell edge
_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
_TRAVEL = (EAST, NORTH, WEST, SOUTH)
NOISE_FLOOR = 1e-12


class ContourError(RuntimeError):
    def __init__(self, message, orphans=None):
        super().__init__(message)
        self.orphans = orphans or []


@dataclasses.dataclass
class NodalCurve:
    """A connected component of a level set.

    ``ends`` gives, for an open curve, how each end terminates: ``"domain"``
    (on the domain boundary), ``"cut"`` (on the cut line of a half-plane
    region), ``"corner"`` (on a chord joining both) or ``"near"`` (the
    interior-only extraction stopped within a cell of the boundary).
    ``contacts`` are the boundary points where the open ends meet the region
    boundary.
    """

    points: np.ndarray
    closed: bool
    ends: tuple = ()
    contacts: np.ndarray = dataclasses.field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def width(self) -> float:
        return float(np.ptp(self.points[:, 0]))

    @property
    def hits(self) -> int:
        return 0 if self.closed else len(self.ends)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())

    @property
    def mean_x(self) -> float:
        """Arclength-weighted mean abscissa."""
        seg = np.diff(self.points, axis=0)
        w = np.linalg.norm(seg, axis=1)
        if w.sum() == 0:
            return float(self.points[:, 0].mean())
        mid = 0.5 * (self.points[1:, 0] + self.points[:-1, 0])
        return float((w * mid).sum() / w.sum())

    def to_dict(self) -> dict:
        return {"closed": self.closed, "ends": list(self.ends), "width": self.width,
                "contacts": np.asarray(self.contacts).tolist(),
                "points": np.asarray(self.points).tolist()}


class _Region:
    """Unknowns of the grid optionally intersected with ``x > cut`` or
    ``x < cut``, with boundary points and their values."""

    def __init__(self, field: ScalarField, side: str | None, cut: float | None, use_boundary,
                 level: float = 0.0):
        g = field.grid
        self.g = g
        self.field = field
        X = g.xs[:, None] + 0.0 * g.ys[None, :]
        inn = g.unknown.copy()
        if side == "right":
            inn &= X > cut
        elif side == "left":
            inn &= X < cut
        elif side is not None:
            raise ValueError("side must be 'right', 'left' or None")
        self.inn = inn
        self.side, self.cut = side, cut
        self.use_boundary = use_boundary
        self.bpoint = {}  # (i, j, d) -> (point, value, kind)
        if not use_boundary:
            return
        I, J, d, pts = boundary_points(g)
        _, _, _, _, vals = field._boundary_data()
        dom_lookup = {(int(i), int(j), int(dd)): (p, v)
                      for i, j, dd, p, v in zip(I, J, d, pts, vals)}
        h = g.h
        cut_keys, cut_pts = [], []
        for dd, (di, dj) in enumerate(DIRECTIONS):
            toward_cut = side is not None and di == (-1 if side == "right" else 1)
            Ii, Jj = np.nonzero(inn & ~np.roll(inn, (-di, -dj), axis=(0, 1)))
            for i, j in zip(Ii, Jj):
                key = (int(i), int(j), dd)
                arm = g.arms[i, j, dd]
                cut_arm = abs(g.xs[i] - cut) / h if toward_cut else np.inf
                if key in dom_lookup and not cut_arm < arm:
                    p, v = dom_lookup[key]
                    if v == level:
                        # boundary data exactly at the level (a boundary arc
                        # inside the level set) carries no sign information
                        v = field.values[i, j]
                    self.bpoint[key] = (np.asarray(p, float), float(v), "domain")
                else:
                    cut_keys.append(key)
                    cut_pts.append((g.xs[i] + di * min(cut_arm, arm) * h, g.ys[j]))
        if cut_keys:
            cut_pts = np.asarray(cut_pts, float)
            for key, p, v in zip(cut_keys, cut_pts, self._cut_values(cut_pts)):
                self.bpoint[key] = (p, float(v), "cut")

    def _cut_values(self, pts):
        return self.field(pts[:, 0], pts[:, 1])


def _cell_polygon(reg: _Region, i: int, j: int):
    """Vertices ``(point, value, id)`` of the cut cell with lower-left node
    ``(i, j)``; ``id`` is ``("n", i, j)`` for nodes and ``("b", i, j, d)``
    for boundary points."""
    g = reg.g
    verts = []
    for t, ((ci, cj), d) in enumerate(zip(_CORNERS, _TRAVEL)):
        ai, aj = i + ci, j + cj
        di, dj = DIRECTIONS[d]
        bi, bj = ai + di, aj + dj
        ina, inb = reg.inn[ai, aj], reg.inn[bi, bj]
        if ina:
            verts.append(((g.xs[ai], g.ys[aj]), reg.field.values[ai, aj], ("n", ai, aj)))
            if not inb:
                key = (ai, aj, d)
                if key in reg.bpoint:
                    p, v, _ = reg.bpoint[key]
                    verts.append((tuple(p), v, ("b",) + key))
        elif inb:
            key = (bi, bj, OPPOSITE[d])
            if key in reg.bpoint:
                p, v, _ = reg.bpoint[key]
                verts.append((tuple(p), v, ("b",) + key))
    return verts


def _edge_key(va, vb, cell, t):
    ida, idb = va[2], vb[2]
    if ida[0] == "n" and idb[0] == "n":
        return ("n",) + tuple(sorted((ida[1:], idb[1:])))
    if ida[0] == "n" and idb[0] == "b" and ida[1:] == idb[1:3]:
        return ("a",) + idb[1:]
    if idb[0] == "n" and ida[0] == "b" and idb[1:] == ida[1:3]:
        return ("a",) + ida[1:]
    return ("c", cell, t)


def _crossings(verts, level, cell, center_value):
    """Segments inside one cell polygon as pairs of ``(key, point)``."""
    k = len(verts)
    if k < 3:
        return []
    pos = [v[1] >= level for v in verts]
    cross = []
    for t in range(k):
        va, vb = verts[t], verts[(t + 1) % k]
        if pos[t] != pos[(t + 1) % k]:
            fa, fb = va[1] - level, vb[1] - level
            s = fa / (fa - fb)
            p = np.asarray(va[0]) + s * (np.asarray(vb[0]) - np.asarray(va[0]))
            cross.append((_edge_key(va, vb, cell, t), p, pos[t]))
    if not cross:
        return []
    if len(cross) == 2:
        return [(cross[0][:2], cross[1][:2])]
    # several crossings (a saddle inside the cell): the centre value decides
    # which sign connects across the cell; every run of the other sign is
    # cut off by its own segment
    start = next(q for q, c in enumerate(cross) if c[2] == (center_value >= level))
    order = cross[start:] + cross[:start]
    return [(order[2 * q][:2], order[2 * q + 1][:2]) for q in range(len(order) // 2)]


def _segments(reg: _Region, level: float, noise: float):
    g = reg.g
    inn = reg.inn
    u = reg.field.values
    c4 = np.stack([inn[:-1, :-1], inn[1:, :-1], inn[1:, 1:], inn[:-1, 1:]])
    full = c4.all(axis=0)
    corners = np.stack([u[:-1, :-1], u[1:, :-1], u[1:, 1:], u[:-1, 1:]])
    vals = corners >= level
    mixed = vals.any(axis=0) & ~vals.all(axis=0)
    mixed &= np.abs(corners - level).max(axis=0) > noise
    todo = full & mixed
    if reg.use_boundary:
        todo |= c4.any(axis=0) & ~full
    segs = []
    h = g.h
    for i, j in zip(*np.nonzero(todo)):
        verts = _cell_polygon(reg, i, j)
        if len(verts) < 3:
            continue
        center = float(reg.field(g.xs[i] + 0.5 * h, g.ys[j] + 0.5 * h)) if full[i, j] else \
            float(np.mean([v[1] for v in verts]))
        segs.extend(_crossings(verts, level, (int(i), int(j)), center))
    return segs


def _chain(segs):
    ends = defaultdict(list)
    for s, (a, b) in enumerate(segs):
        ends[a[0]].append((s, 0))
        ends[b[0]].append((s, 1))
    bad = [k for k, v in ends.items() if len(v) > 2]
    if bad:
        raise ContourError(f"{len(bad)} edges carry more than two segment ends", orphans=bad)
    used = np.zeros(len(segs), bool)

    def walk(s, e):
        """Follow from segment ``s`` leaving through end ``1-e``."""
        pts = [segs[s][e][1]]
        keys = [segs[s][e][0]]
        while True:
            used[s] = True
            k, p = segs[s][1 - e]
            pts.append(p)
            keys.append(k)
            nxt = [(t, f) for t, f in ends[k] if t != s]
            if not nxt or used[nxt[0][0]]:
                return pts, keys, bool(nxt)
            s, e = nxt[0]

    curves = []
    # open chains first: start at keys with a single segment end
    for k, v in ends.items():
        if len(v) == 1 and not used[v[0][0]]:
            s, e = v[0]
            pts, keys, _ = walk(s, e)
            curves.append((pts, keys, False))
    for s in range(len(segs)):
        if not used[s]:
            pts, keys, closed = walk(s, 0)
            curves.append((pts, keys, closed))
    return curves


def _end_kind(reg: _Region, key):
    if key[0] == "c":
        (i, j), t = key[1], key[2]
        verts = _cell_polygon(reg, i, j)
        ida, idb = verts[t][2], verts[(t + 1) % len(verts)][2]
        kinds = {reg.bpoint[idx[1:]][2] for idx in (ida, idb) if idx[0] == "b"}
        if kinds == {"domain"}:
            return "domain"
        if kinds == {"cut"}:
            return "cut"
        return "corner"
    return "near"


def _extrapolate_to_boundary(dom, p, q, h):
    """Continue the segment ``q -> p`` past ``p`` until it leaves the domain
    (at most three cells); returns the exit point or ``p``."""
    d = np.asarray(p) - np.asarray(q)
    n = np.linalg.norm(d)
    if n == 0:
        return np.asarray(p)
    d /= n
    lo, hi = 0.0, None
    for t in np.linspace(0.25 * h, 3 * h, 12):
        x = np.asarray(p) + t * d
        if not dom.contains(x[0], x[1]):
            hi = t
            break
        lo = t
    if hi is None:
        return np.asarray(p)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        x = np.asarray(p) + mid * d
        if dom.contains(x[0], x[1]):
            lo = mid
        else:
            hi = mid
    return np.asarray(p) + lo * d


def extract_level_curve(field: ScalarField, level: float = 0.0, *, side: str | None = None,
                        cut: float | None = None, use_boundary: bool | None = None,
                        noise: float | None = None) -> list[NodalCurve]:
    """Components of ``{field = level}``, longest first.

    Parameters
    ----------
    side, cut
        Restrict to the half-region ``x > cut`` (``side="right"``) or
        ``x < cut`` (``side="left"``).
    use_boundary
        March over the cut cells at the boundary using the field's boundary
        data.  Defaults to True when the field has boundary data.  Otherwise
        (and always for eigenfunctions, whose boundary is part of the zero
        set) only cells with four interior corners are used and open ends
        are continued to the boundary.
    noise
        Interior cells whose corner values all lie within ``noise`` of the
        level carry no sign information and are skipped.  Defaults to
        ``1e-12 max|field|``, which removes sign flips in the far tails of
        thin domains where the field is at roundoff level.
    """
    if use_boundary is None:
        use_boundary = field.boundary is not None
    if use_boundary and field.boundary is None:
        raise ValueError("the field has no boundary data")
    reg = _Region(field, side, cut, use_boundary, level)
    if noise is None:
        noise = NOISE_FLOOR * float(np.abs(field.values).max())
    segs = _segments(reg, level, noise)
    out = []
    dom = field.grid.domain
    for pts, keys, closed in _chain(segs):
        P = np.asarray(pts, float)
        if closed:
            out.append(NodalCurve(points=P, closed=True))
            continue
        kinds = (_end_kind(reg, keys[0]), _end_kind(reg, keys[-1]))
        contacts = []
        for kind, p, q in ((kinds[0], P[0], P[1] if len(P) > 1 else P[0]),
                           (kinds[1], P[-1], P[-2] if len(P) > 1 else P[-1])):
            if kind == "near":
                contacts.append(_extrapolate_to_boundary(dom, p, q, field.grid.h))
            else:
                contacts.append(p)
        out.append(NodalCurve(points=P, closed=False, ends=kinds,
                              contacts=np.asarray(contacts)))
    out.sort(key=lambda c: -c.length)
    return out


def is_simple_polyline(points, closed: bool = False) -> bool:
    """True when no two non-adjacent segments of the polyline intersect."""
    P = np.asarray(points, float)
    if closed:
        P = np.vstack([P, P[:1]])
    A, B = P[:-1], P[1:]
    n = len(A)
    if n < 3:
        return True

    def orient(p, q, r):
        return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                       - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    chunk = 256
    for s in range(0, n, chunk):
        a, b = A[s:s + chunk, None, :], B[s:s + chunk, None, :]
        c, d = A[None, :, :], B[None, :, :]
        o1, o2 = orient(a, b, c), orient(a, b, d)
        o3, o4 = orient(c, d, a), orient(c, d, b)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        i = np.arange(s, min(s + chunk, n))[:, None]
        j = np.arange(n)[None, :]
        near = np.abs(i - j) <= 1
        if closed:
            near |= np.abs(i - j) == n - 1
        if np.any(hit & ~near):
            return False
    return True
