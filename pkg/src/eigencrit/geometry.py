"""Convex planar domains described by a pair of height functions.

A normalized domain is the region ``{f1(x) < y < f2(x), a < x < b}`` whose
projection on the y-axis is the unit interval.  The long side has length
``N = b - a``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any, Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, linprog, minimize_scalar
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

FAMILIES = ("rectangle", "perturbed_rectangle", "ellipse", "stadium",
            "custom_height_functions")

SAMPLES_PER_UNIT = 4096
CONVEX_TOL = 1e-8
L_RTOL = 1e-6


class DomainError(ValueError):
    """Invalid or degenerate domain input.

    ``witness`` carries the offending sample triple when a convexity or
    concavity test failed.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# --------------------------------------------------------------------------
# cap functions for perturbed rectangles


def make_phi(phi) -> Callable[[np.ndarray], np.ndarray]:
    """Turn a cap description into a vectorized callable on [0, 1].

    Accepted forms: ``None`` (zero cap), a callable, a dict
    ``{"kind": "parabolic"|"tent"|"zero"|"constant", "c": ...}`` or an
    array of ``(y, phi(y))`` samples (linearly interpolated).
    """
    if phi is None:
        return lambda y: np.zeros_like(np.asarray(y, dtype=float))
    if callable(phi):
        return lambda y: np.asarray(phi(np.asarray(y, dtype=float)), dtype=float) \
            + np.zeros_like(np.asarray(y, dtype=float))
    if isinstance(phi, dict):
        kind = phi.get("kind", "parabolic")
        c = float(phi.get("c", 0.0))
        if kind == "parabolic":
            return lambda y: c * np.asarray(y, float) * (1.0 - np.asarray(y, float))
        if kind == "tent":
            return lambda y: c * np.minimum(np.asarray(y, float), 1.0 - np.asarray(y, float))
        if kind == "constant":
            return lambda y: c + np.zeros_like(np.asarray(y, float))
        if kind == "zero":
            return make_phi(None)
        raise DomainError(f"unknown cap kind {kind!r}")
    samples = np.asarray(phi, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise DomainError("cap samples must be an array of (y, phi(y)) pairs")
    order = np.argsort(samples[:, 0])
    ys, vals = samples[order, 0], samples[order, 1]
    return lambda y: np.interp(np.asarray(y, float), ys, vals)


def _check_cap(phi, n=1025, tol=CONVEX_TOL):
    y = np.linspace(0.0, 1.0, n)
    v = phi(y)
    if np.any(v < -tol):
        i = int(np.argmin(v))
        raise DomainError("cap function must be nonnegative", witness=(y[i], v[i]))
    d2 = v[:-2] - 2.0 * v[1:-1] + v[2:]
    bad = np.nonzero(d2 > tol)[0]
    if bad.size:
        i = bad[0]
        raise DomainError(
            "cap function is not concave",
            witness=tuple((y[k], v[k]) for k in (i, i + 1, i + 2)))


# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class DomainSpec:
    """Parametric description of a domain before normalization.

    ``N`` is the requested length.  ``phi`` is the cap of a perturbed
    rectangle; ``axes`` the semi-axes of an ellipse (overrides ``N``);
    ``heights`` for the custom family is either a dict of sample arrays
    ``{"x": ..., "f1": ..., "f2": ...}`` or a tuple ``(f1, f2, a, b)`` of
    callables and endpoints.
    """

    family: str
    N: float | None = None
    phi: Any = None
    axes: tuple[float, float] | None = None
    heights: Any = None
    orientation: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        d = dict(d)
        family = d.pop("family", None)
        if family is None:
            raise DomainError("domain spec needs a 'family' entry")
        axes = d.pop("axes", None)
        heights = d.pop("heights", None)
        if isinstance(heights, dict):
            heights = {k: np.asarray(v, float) for k, v in heights.items()}
        spec = cls(family=family, N=d.pop("N", None), phi=d.pop("phi", None),
                   axes=tuple(axes) if axes is not None else None,
                   heights=heights, orientation=float(d.pop("orientation", 0.0)))
        if d:
            raise DomainError(f"unexpected domain spec keys: {sorted(d)}")
        return spec

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"family": self.family}
        if self.N is not None:
            out["N"] = self.N
        if self.phi is not None and not callable(self.phi):
            out["phi"] = self.phi if isinstance(self.phi, dict) else np.asarray(self.phi).tolist()
        if self.axes is not None:
            out["axes"] = list(self.axes)
        if isinstance(self.heights, dict):
            out["heights"] = {k: np.asarray(v).tolist() for k, v in self.heights.items()}
        if self.orientation:
            out["orientation"] = self.orientation
        return out

    def label(self) -> str:
        if self.family == "custom_height_functions":
            return "custom"
        base = f"{self.family}-N{self.N if self.N is not None else self.axes}"
        if isinstance(self.phi, dict):
            base += f"-{self.phi.get('kind', 'phi')}{self.phi.get('c', '')}"
        return base


# --------------------------------------------------------------------------


class NormalizedDomain:
    """Convex region between two height functions, unit height.

    Height functions are stored as dense samples and interpolated by monotone
    cubics.  Families with closed forms also keep the exact functions, which
    are then used for point queries.
    """

    def __init__(self, x, f1, f2, *, family="custom_height_functions",
                 exact: tuple[Callable, Callable] | None = None,
                 extent: Callable | None = None, params: dict | None = None):
        x = np.asarray(x, dtype=float)
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        if x.ndim != 1 or x.size < 4 or np.any(np.diff(x) <= 0):
            raise DomainError("height samples need at least 4 strictly increasing abscissae")
        for arr in (x, f1, f2):
            arr.setflags(write=False)
        self.xs, self.f1s, self.f2s = x, f1, f2
        self.a, self.b = float(x[0]), float(x[-1])
        self.N = self.b - self.a
        self.family = family
        self.params = dict(params or {})
        self._p1 = PchipInterpolator(x, f1, extrapolate=False)
        self._p2 = PchipInterpolator(x, f2, extrapolate=False)
        self._exact = exact
        self._extent = extent
        self.L = compute_L(self)
        self.ecc = eccentricity(self)

    # point queries -------------------------------------------------------

    def f1(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        return self._exact[0](x) if self._exact else self._p1(x)

    def f2(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        return self._exact[1](x) if self._exact else self._p2(x)

    def height(self, x):
        return self.f2(x) - self.f1(x)

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (x > self.a) & (x < self.b)
        return inside & (y > self.f1(x)) & (y < self.f2(x))

    def x_extent(self, y: float) -> tuple[float, float] | None:
        """Interval of x where the horizontal line at height ``y`` is inside."""
        if self._extent is not None:
            return self._extent(float(y))
        return self._generic_extent(float(y))

    def _generic_extent(self, y):
        g_s = np.minimum(y - self.f1s, self.f2s - y)
        k = int(np.argmax(g_s))
        if g_s[k] <= 0:
            return None

        def g(x):
            return float(min(y - self.f1(x), self.f2(x) - y))

        xp = float(self.xs[k])
        xl = self.a if g(self.a) > 0 else brentq(g, self.a, xp, xtol=1e-14)
        xr = self.b if g(self.b) > 0 else brentq(g, xp, self.b, xtol=1e-14)
        return xl, xr

    # boundary ------------------------------------------------------------

    def boundary_points(self, n: int = 2001) -> np.ndarray:
        """Closed counter-clockwise boundary polygon (no repeated endpoint).

        Abscissae are cosine-clustered so that rounded caps are resolved.
        """
        t = np.linspace(0.0, np.pi, n)
        xs = self.a + 0.5 * self.N * (1.0 - np.cos(t))
        xs[0], xs[-1] = self.a, self.b
        lower = np.column_stack([xs, self.f1(xs)])
        upper = np.column_stack([xs[::-1], self.f2(xs[::-1])])
        pts = np.vstack([lower, upper])
        keep = np.ones(len(pts), bool)
        keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-15, axis=1)
        return pts[keep]

    def normal_on_column(self, x: float, side: str) -> np.ndarray:
        """Outward unit normal where the vertical line at ``x`` meets the top
        (``side='top'``) or bottom boundary."""
        d = _derivative(self.f2 if side == "top" else self.f1, x, self.a, self.b)
        n = np.array([-d, 1.0]) if side == "top" else np.array([d, -1.0])
        return n / np.hypot(*n)

    def normal_on_row(self, y: float, side: str) -> np.ndarray:
        """Outward unit normal where the horizontal line at ``y`` meets the
        right (``side='right'``) or left boundary."""
        k = 0 if side == "left" else 1

        def xe(t):
            e = self.x_extent(t)
            return np.nan if e is None else e[k]

        x0 = xe(y)
        if (k == 1 and x0 >= self.b - 1e-12) or (k == 0 and x0 <= self.a + 1e-12):
            # vertical end segment
            if np.isclose(xe(min(y + 1e-6, 1.0)), x0) and np.isclose(xe(max(y - 1e-6, 0.0)), x0):
                return np.array([1.0, 0.0]) if k == 1 else np.array([-1.0, 0.0])
        s = 1e-7
        lo, hi = max(y - s, 1e-12), min(y + s, 1.0 - 1e-12)
        xl, xh = xe(lo), xe(hi)
        if not (np.isfinite(xl) and np.isfinite(xh)):
            return np.array([1.0, 0.0]) if k == 1 else np.array([-1.0, 0.0])
        d = (xh - xl) / (hi - lo)
        n = np.array([1.0, -d]) if k == 1 else np.array([-1.0, d])
        return n / np.hypot(*n)

    def __repr__(self):
        return (f"NormalizedDomain(family={self.family!r}, N={self.N:.6g}, "
                f"L={self.L:.6g}, ecc={self.ecc:.6g})")


def _derivative(f, x, a, b, step=1e-6):
    lo, hi = max(x - step, a), min(x + step, b)
    return float((f(hi) - f(lo)) / (hi - lo))


def _samples(a, b, per_unit=SAMPLES_PER_UNIT):
    n = max(int(math.ceil((b - a) * per_unit)) + 1, 64)
    return np.linspace(a, b, n)


# --------------------------------------------------------------------------
# families


def _rectangle(N):
    x = _samples(0.0, N)
    one = lambda t: np.ones_like(np.asarray(t, float))
    zero = lambda t: np.zeros_like(np.asarray(t, float))
    ext = lambda y: (0.0, float(N)) if 0.0 < y < 1.0 else None
    return NormalizedDomain(x, zero(x), one(x), family="rectangle",
                            exact=(zero, one), extent=ext, params={"N": N})


def _ellipse(N):
    half = 0.5 * N

    def r(t):
        s = 1.0 - (np.asarray(t, float) / half) ** 2
        return 0.5 * np.sqrt(np.clip(s, 0.0, None))

    f1 = lambda t: 0.5 - r(t)
    f2 = lambda t: 0.5 + r(t)

    def ext(y):
        s = 1.0 - (2.0 * y - 1.0) ** 2
        if s <= 0:
            return None
        w = half * math.sqrt(s)
        return -w, w

    x = _samples(-half, half)
    return NormalizedDomain(x, f1(x), f2(x), family="ellipse", exact=(f1, f2),
                            extent=ext, params={"N": N})


def _stadium(N):
    if N < 1:
        raise DomainError("stadium needs N >= 1")
    s = 0.5 * (N - 1.0)

    def r(t):
        d = np.abs(np.asarray(t, float)) - s
        return np.where(d <= 0, 0.5, np.sqrt(np.clip(0.25 - d * d, 0.0, None)))

    f1 = lambda t: 0.5 - r(t)
    f2 = lambda t: 0.5 + r(t)

    def ext(y):
        q = 0.25 - (y - 0.5) ** 2
        if q <= 0:
            return None
        w = s + math.sqrt(q)
        return -w, w

    x = _samples(-0.5 * N, 0.5 * N)
    return NormalizedDomain(x, f1(x), f2(x), family="stadium", exact=(f1, f2),
                            extent=ext, params={"N": N, "straight": N - 1.0})


def _perturbed_rectangle(N, phi_desc):
    phi = make_phi(phi_desc)
    _check_cap(phi)
    yy = np.linspace(0.0, 1.0, 4097)
    vv = phi(yy)
    k = int(np.argmax(vv))
    lo, hi = yy[max(k - 1, 0)], yy[min(k + 1, len(yy) - 1)]
    res = minimize_scalar(lambda t: -float(phi(t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    ypk = float(res.x) if -res.fun >= vv[k] else float(yy[k])
    pmax = float(phi(ypk))
    if pmax <= 0:
        dom = _rectangle(N)
        dom.family = "perturbed_rectangle"
        dom.params = {"N": N, "phi_max": 0.0, "phi": phi_desc}
        return dom
    phi0, phi1 = float(phi(0.0)), float(phi(1.0))

    def ylo(t):
        if t < phi0:
            return 0.0
        if t >= pmax:
            return ypk
        return brentq(lambda s: float(phi(s)) - t, 0.0, ypk, xtol=1e-15)

    def yhi(t):
        if t < phi1:
            return 1.0
        if t >= pmax:
            return ypk
        return brentq(lambda s: float(phi(s)) - t, ypk, 1.0, xtol=1e-15)

    def _on_cap(fn, fill):
        def f(x):
            x = np.asarray(x, float)
            out = np.full(x.shape, fill)
            flat, xf = out.reshape(-1), x.reshape(-1)
            for i in np.flatnonzero(xf < 0):
                flat[i] = fn(-xf[i])
            return out
        return f

    f1, f2 = _on_cap(ylo, 0.0), _on_cap(yhi, 1.0)

    def ext(y):
        if not 0.0 < y < 1.0:
            return None
        return -float(phi(y)), float(N)

    x = _samples(-pmax, N)
    return NormalizedDomain(x, f1(x), f2(x), family="perturbed_rectangle",
                            exact=(f1, f2), extent=ext,
                            params={"N": N, "phi_max": pmax, "phi": phi_desc})


def _custom(heights):
    if isinstance(heights, dict):
        x = np.asarray(heights["x"], float)
        f1 = np.asarray(heights["f1"], float)
        f2 = np.asarray(heights["f2"], float)
        exact = None
        if x.size < 4:
            raise DomainError("custom heights need at least 4 samples")
        # linear interpolation keeps convex data convex (cubics overshoot at the knots)
        xs = _samples(x[0], x[-1])
        f1s = np.interp(xs, x, f1)
        f2s = np.interp(xs, x, f2)
    else:
        g1, g2, a, b = heights
        xs = _samples(float(a), float(b))
        f1s, f2s = np.asarray(g1(xs), float), np.asarray(g2(xs), float)
        exact = (g1, g2)
    lo = float(f1s.min())
    top = float(f2s.max())
    hmax = float((f2s - f1s).max())
    if hmax <= 0:
        raise DomainError("custom domain has zero area")
    if top - lo > hmax * (1 + 1e-9):
        raise DomainError("custom domain is not normalized: its y-projection exceeds its "
                          "maximal height; use normalize_domain on its boundary instead")
    scale = 1.0 / hmax
    if exact is not None and (abs(lo) > 1e-15 or abs(scale - 1.0) > 1e-15):
        g1, g2 = exact
        exact = (lambda t: (g1(t) - lo) * scale, lambda t: (g2(t) - lo) * scale)
    xs0 = xs
    return NormalizedDomain(xs0, (f1s - lo) * scale, (f2s - lo) * scale,
                            family="custom_height_functions", exact=exact)


def make_family(spec: DomainSpec | dict) -> NormalizedDomain:
    """Build the normalized domain described by ``spec``.

    Raises `DomainError` for invalid parameters, a non-concave cap or a
    nonconvex custom region (with the failing sample triple attached).
    """
    if isinstance(spec, dict):
        spec = DomainSpec.from_dict(spec)
    fam = spec.family
    if fam == "ellipse" and spec.axes is not None:
        A, B = sorted(map(float, spec.axes), reverse=True)
        N = A / B
    elif fam == "custom_height_functions":
        N = None
    else:
        if spec.N is None:
            raise DomainError(f"{fam} needs N")
        N = float(spec.N)
        if N < 1:
            raise DomainError("N must be at least 1")
    if fam == "rectangle":
        dom = _rectangle(N)
    elif fam == "ellipse":
        dom = _ellipse(N)
    elif fam == "stadium":
        dom = _stadium(N)
    elif fam == "perturbed_rectangle":
        dom = _perturbed_rectangle(N, spec.phi)
    else:
        if spec.heights is None:
            raise DomainError("custom family needs 'heights'")
        dom = _custom(spec.heights)
    report = check_convex(dom)
    if not report.ok:
        raise DomainError("domain is not convex", witness=report.witness)
    return dom


def egg_heights(left: float, right: float):
    """Height functions of two half-ellipses glued at x=0 (semi-axes
    ``left`` and ``right``, common half-height 1/2).  Convex, C^1, and not
    symmetric under x -> -x when ``left != right``."""

    def r(t):
        t = np.asarray(t, float)
        A = np.where(t < 0, left, right)
        return 0.5 * np.sqrt(np.clip(1.0 - (t / A) ** 2, 0.0, None))

    return (lambda t: 0.5 - r(t), lambda t: 0.5 + r(t), -float(left), float(right))


# --------------------------------------------------------------------------
# measurements


def _hull(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DomainError("need at least 3 planar points")
    try:
        hull = ConvexHull(pts)
    except Exception as exc:  # qhull raises on collinear input
        raise DomainError(f"degenerate (zero-area) input: {exc}") from None
    if hull.volume <= 1e-14 * max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0) ** 2:
        raise DomainError("degenerate (zero-area) input")
    return hull


def diameter(points) -> float:
    hull = _hull(points)
    return float(pdist(hull.points[hull.vertices]).max())


def inradius(points) -> tuple[float, np.ndarray]:
    """Radius and center of the largest disk inside the convex hull.

    Solved as the Chebyshev-center linear program over the hull facets.
    """
    hull = _hull(points)
    eq = hull.equations  # n.x + off <= 0 inside, |n| = 1
    A = np.column_stack([eq[:, :2], np.ones(len(eq))])
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=A, b_ub=-eq[:, 2],
                  bounds=[(None, None), (None, None), (0, None)], method="highs")
    if not res.success:
        raise DomainError(f"inradius program failed: {res.message}")
    return float(res.x[2]), np.asarray(res.x[:2])


def eccentricity(domain: NormalizedDomain | np.ndarray) -> float:
    """Diameter divided by inradius."""
    pts = domain.boundary_points() if isinstance(domain, NormalizedDomain) else domain
    return diameter(pts) / inradius(pts)[0]


def _longest_interval(x, h, t):
    ok = h >= t
    if not ok.any():
        return 0.0, None
    d = np.diff(ok.astype(np.int8))
    starts = np.nonzero(d == 1)[0] + 1
    ends = np.nonzero(d == -1)[0]
    if ok[0]:
        starts = np.r_[0, starts]
    if ok[-1]:
        ends = np.r_[ends, len(ok) - 1]
    best, where = -1.0, None
    for i0, i1 in zip(starts, ends):
        xl = x[i0]
        if i0 > 0:
            xl = x[i0 - 1] + (t - h[i0 - 1]) / (h[i0] - h[i0 - 1]) * (x[i0] - x[i0 - 1])
        xr = x[i1]
        if i1 < len(x) - 1:
            xr = x[i1] + (t - h[i1]) / (h[i1 + 1] - h[i1]) * (x[i1 + 1] - x[i1])
        if xr - xl > best + 1e-15:
            best, where = xr - xl, (xl, xr)
    return best, where


def compute_L(domain: NormalizedDomain) -> float:
    """Length scale L: the fixed point of L -> |longest interval with
    h >= 1 - 1/L^2|.

    The interval length shrinks as L grows, so the fixed point is unique and
    is bracketed by bisection on [N^(1/3), N].
    """
    x = domain.xs
    h = domain.f2s - domain.f1s
    N = domain.N

    def gap(L):
        return _longest_interval(x, h, 1.0 - 1.0 / (L * L))[0] - L

    lo, hi = N ** (1.0 / 3.0), N
    if gap(hi) >= -1e-12 * N:
        return float(hi)
    if gap(lo) < 0:
        raise DomainError(
            f"no fixed point for L in [N^(1/3), N] = [{lo:.6g}, {hi:.6g}]; "
            f"interval length at N^(1/3) is {gap(lo) + lo:.6g}")
    while hi - lo > L_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if gap(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclasses.dataclass(frozen=True)
class ConvexityReport:
    ok: bool
    max_violation: float
    witness: tuple | None = None


def check_convex(domain: NormalizedDomain, tol: float = CONVEX_TOL) -> ConvexityReport:
    """Midpoint convexity test on the sampled height functions.

    The region is convex iff the lower boundary is convex and the upper one
    concave.  On uniform samples the midpoint test is a second difference;
    it is applied at dyadic strides so that a broad dent, whose second
    difference at the sample spacing sits below ``tol``, is still caught.
    """
    x, f1, f2 = domain.xs, domain.f1s, domain.f2s
    scale = tol * math.hypot(domain.N, 1.0)
    if np.any(f1 > f2 + scale):
        i = int(np.argmax(f1 - f2))
        return ConvexityReport(False, float(f1[i] - f2[i]), ((x[i], f1[i]), (x[i], f2[i])))
    worst = 0.0
    first = None
    s = 1
    while 2 * s < len(x):
        top = 0.5 * (f2[:-2 * s] + f2[2 * s:]) - f2[s:-s]
        bot = f1[s:-s] - 0.5 * (f1[:-2 * s] + f1[2 * s:])
        worst = max(worst, float(top.max()), float(bot.max()))
        for viol, f in ((top, f2), (bot, f1)):
            bad = np.nonzero(viol > scale)[0]
            if bad.size and first is None:
                i = int(bad[np.argmax(viol[bad])])
                first = tuple((float(x[k]), float(f[k])) for k in (i, i + s, i + 2 * s))
        s *= 2
    return ConvexityReport(first is None, max(worst, 0.0), first)


def _min_width_direction(hull):
    pts = hull.points[hull.vertices]  # counter-clockwise in 2D
    edges = np.roll(pts, -1, axis=0) - pts
    lens = np.hypot(edges[:, 0], edges[:, 1])
    keep = lens > 0
    pts_e, edges, lens = pts[keep], edges[keep], lens[keep]
    normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lens[:, None]
    widths = np.empty(len(edges))
    for s in range(0, len(edges), 512):
        sl = slice(s, s + 512)
        proj = np.einsum("ekd,ed->ek", pts[None, :, :] - pts_e[sl, None, :], normals[sl])
        widths[sl] = -proj.min(axis=1)
    angles = np.arctan2(edges[:, 1], edges[:, 0])
    angles = (angles + 0.5 * np.pi) % np.pi - 0.5 * np.pi  # (-pi/2, pi/2]
    wmin = widths.min()
    cand = np.nonzero(widths <= wmin * (1 + 1e-9))[0]
    k = cand[np.argmin(np.abs(angles[cand]))]
    return float(angles[k]), float(widths[k])


def normalize_domain(obj, samples_per_unit: int = SAMPLES_PER_UNIT) -> NormalizedDomain:
    """Rotate so the shortest projection is on the y-axis, scale it to 1.

    ``obj`` is a boundary point cloud (n, 2), a `DomainSpec` or dict (built
    with `make_family`), or a `NormalizedDomain` (re-normalized from its
    boundary polygon).  The result is translated to ``x >= 0, y >= 0``.
    """
    if isinstance(obj, (DomainSpec, dict)):
        return make_family(obj)
    pts = obj.boundary_points() if isinstance(obj, NormalizedDomain) else np.asarray(obj, float)
    hull = _hull(pts)
    angle, width = _min_width_direction(hull)
    c, s = math.cos(-angle), math.sin(-angle)
    R = np.array([[c, -s], [s, c]])
    P = (hull.points[hull.vertices] @ R.T) / width
    P -= P.min(axis=0)
    # counter-clockwise chains between leftmost and rightmost vertices
    n = len(P)
    il = int(np.lexsort((P[:, 1], P[:, 0]))[0])          # min x, then min y
    ir = int(np.lexsort((P[:, 1], -P[:, 0]))[0])         # max x, then min y
    ir_top = int(np.lexsort((-P[:, 1], -P[:, 0]))[0])    # max x, then max y
    il_top = int(np.lexsort((-P[:, 1], P[:, 0]))[0])     # min x, then max y
    lower = [P[(il + k) % n] for k in range((ir - il) % n + 1)]
    upper = [P[(ir_top + k) % n] for k in range((il_top - ir_top) % n + 1)][::-1]
    lower, upper = np.array(lower), np.array(upper)
    a, b = 0.0, float(P[:, 0].max())
    xs = _samples(a, b, samples_per_unit)
    f1 = np.interp(xs, lower[:, 0], lower[:, 1])
    f2 = np.interp(xs, upper[:, 0], upper[:, 1])
    return NormalizedDomain(xs, f1, f2, family="custom_height_functions",
                            params={"rotation": -angle, "scale": 1.0 / width})


def projection_widths(points, n_directions: int = 3600) -> tuple[np.ndarray, np.ndarray]:
    """Width of the projection of ``points`` on each of ``n_directions``
    equispaced directions in [0, pi).  Brute force, used as an oracle."""
    pts = np.asarray(points, float)
    th = np.arange(n_directions) * np.pi / n_directions
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    proj = pts @ dirs.T
    return th, proj.max(axis=0) - proj.min(axis=0)
