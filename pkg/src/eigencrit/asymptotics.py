"""Reference fields and asymptotic diagnostics for long thin domains.

Two closed-form references are used: the strip limit ``A0 x sin(pi y)`` of a
normalized second mode, and ``v_m = sin(m pi (x + a)/(N + a)) sin(pi y)`` on a
rectangle of length ``N`` whose left side carries a concave cap.  The
functions here compare sampled modes with them, fit the effective length
increment ``a`` from eigenvalues, and locate the extrema of ``v_m``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping

import numpy as np
from scipy.integrate import simpson

from .fields import ScalarField

PI = math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
A0_FLAG_RATIO = 0.2
ANALYTIC_DY = 1.0 / 512


class AsymptoticsError(ValueError):
    pass


class _Analytic:
    """Shared evaluation protocol of the closed-form references (matches
    `ScalarField`: ``derivatives``, ``partial``, ``gradient``, ``hessian``)."""

    domain = None
    boundary = None

    def derivatives(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.derivatives(x, y)[0]

    def partial(self, x, y, dx=0, dy=0):
        table = {(0, 0): 0, (1, 0): 1, (0, 1): 2, (2, 0): 3, (1, 1): 4, (0, 2): 5}
        return self.derivatives(x, y)[table[(dx, dy)]]

    def gradient(self, p):
        d = self.derivatives(*p)
        return np.array([float(d[1]), float(d[2])])

    def hessian(self, p):
        d = self.derivatives(*p)
        return np.array([[float(d[3]), float(d[4])], [float(d[4]), float(d[5])]])


@dataclasses.dataclass(frozen=True)
class StripReference(_Analytic):
    """``u(x, y) = A0 x sin(pi y)`` on the strip ``R x (0, 1)``."""

    A0: float = 1.0

    def __post_init__(self):
        if self.A0 == 0:
            raise AsymptoticsError("A0 must be nonzero")

    def derivatives(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        s, c = np.sin(PI * y), np.cos(PI * y)
        A = self.A0
        zero = np.zeros(np.broadcast(x, y).shape)
        return (A * x * s, A * s + zero, A * PI * x * c, zero, A * PI * c + zero,
                -A * PI * PI * x * s)


@dataclasses.dataclass(frozen=True)
class RectangleReference(_Analytic):
    """``v_m(x, y) = sin(m pi (x + a)/(N + a)) sin(pi y)``; it vanishes at
    ``x = -a`` and ``x = N``."""

    m: int
    N: float
    a: float = 0.0

    @property
    def k(self) -> float:
        return self.m * PI / (self.N + self.a)

    def derivatives(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        k = self.k
        sx, cx = np.sin(k * (x + self.a)), np.cos(k * (x + self.a))
        sy, cy = np.sin(PI * y), np.cos(PI * y)
        return (sx * sy, k * cx * sy, PI * sx * cy, -k * k * sx * sy, k * PI * cx * cy,
                -PI * PI * sx * sy)


# --------------------------------------------------------------------------
# Fourier coefficients in y


def _slice(field, x):
    dom = getattr(field, "domain", None)
    if dom is None:
        dom = getattr(getattr(field, "grid", None), "domain", None)
    if dom is None:
        return 0.0, 1.0, ANALYTIC_DY
    x = float(x)
    if not dom.a < x < dom.b:
        raise AsymptoticsError(f"x = {x} is outside the domain")
    return float(dom.f1(x)), float(dom.f2(x)), field.grid.h


def fourier_coefficient(field, j: int, x) -> float | np.ndarray:
    """``A_j(x) = 2 int_0^1 u(x, t) sin(j pi t) dt`` by composite Simpson.

    The integral runs over the vertical slice of the domain (the field
    vanishes outside it) with about one sample per grid spacing; closed-form
    fields on the strip use ``1/512``.  Accepts a scalar or an array of x.
    """
    if j < 1:
        raise AsymptoticsError("j must be at least 1")
    if np.ndim(x):
        return np.array([fourier_coefficient(field, j, xi) for xi in np.ravel(x)]).reshape(np.shape(x))
    lo, hi, dy = _slice(field, x)
    n = max(int(math.ceil((hi - lo) / dy)), 2)
    n += n % 2
    if n + 1 < 8:
        raise AsymptoticsError(f"slice at x = {x} has fewer than 8 samples")
    t = np.linspace(lo, hi, n + 1)
    vals = np.asarray(field(np.full_like(t, float(x)), t), float) * np.sin(j * PI * t)
    return 2.0 * float(simpson(vals, x=t))


@dataclasses.dataclass(frozen=True)
class StripUniquenessReport:
    c1: float
    d1: float
    affine_residual: float
    max_abs: dict  # j -> max |A_j| over the window
    ratio: float  # max_{j >= 2} max|A_j| / max|A_1|
    tol: float
    failing: tuple

    @property
    def passed(self) -> bool:
        return not self.failing

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["max_abs"] = {str(k): v for k, v in self.max_abs.items()}
        d["failing"] = list(self.failing)
        d["passed"] = self.passed
        return d


def verify_strip_uniqueness(field, window=(-2.0, 2.0), jmax: int = 5, tol: float = 1e-8,
                            center: float = 0.0, samples: int | None = None,
                            rel_tol: float | None = None) -> StripUniquenessReport:
    """Check the structure forced on bounded-growth strip solutions.

    On the window ``center + [x0, x1]`` the coefficient ``A_1`` is fitted by
    ``c_1 x + d_1``; a strip solution has ``d_1 = A_1(0) = 0`` and
    ``A_2 = ... = A_jmax = 0``.  The check passes when ``|d_1| <= tol`` and
    every ``max |A_j| <= tol`` (or, with ``rel_tol``, when
    ``max |A_j| <= rel_tol * max |A_1|``).  ``failing`` lists ``"d1"`` and the
    offending indices ``j``.  The deviation of ``A_1`` from its affine fit is
    reported as ``affine_residual``.  For sampled fields the window is clipped
    to stay ``4h`` inside the ends of the domain.
    """
    x0, x1 = window
    grid = getattr(field, "grid", None)
    if grid is not None:
        # keep the slices long enough for the quadrature
        x0 = max(x0, grid.domain.a + 4 * grid.h - center)
        x1 = min(x1, grid.domain.b - 4 * grid.h - center)
    if samples is None:
        samples = int(round((x1 - x0) / grid.h)) + 1 if grid is not None else 81
    xs = np.linspace(x0, x1, samples)
    A = {j: fourier_coefficient(field, j, xs + center) for j in range(1, jmax + 1)}
    c1, d1 = np.polyfit(xs, A[1], 1)
    resid = float(np.abs(A[1] - (c1 * xs + d1)).max())
    max_abs = {j: float(np.abs(A[j]).max()) for j in A}
    higher = max((max_abs[j] for j in range(2, jmax + 1)), default=0.0)
    bound = tol if rel_tol is None else rel_tol * max_abs[1]
    failing = ["d1"] if abs(d1) > tol else []
    failing += [j for j in range(2, jmax + 1) if max_abs[j] > bound]
    return StripUniquenessReport(c1=float(c1), d1=float(d1), affine_residual=resid,
                                 max_abs=max_abs, ratio=higher / max(max_abs[1], 1e-300),
                                 tol=tol, failing=tuple(failing))


# --------------------------------------------------------------------------
# strip limit of second modes


def nodal_center(field: ScalarField) -> float:
    """Arclength mean abscissa of the longest nodal curve (the translation
    that recenters a second mode)."""
    from .contours import extract_level_curve

    curves = extract_level_curve(field)
    if not curves:
        raise AsymptoticsError("the field has no nodal curve")
    return curves[0].mean_x


def _window_nodes(field: ScalarField, k: float, center: float):
    nodes = field.grid.nodes
    sel = np.abs(nodes[:, 0] - center) <= k
    if sel.sum() < 4:
        raise AsymptoticsError("window contains too few grid nodes")
    vals = field.grid.from_lattice(field.values)[sel]
    return nodes[sel], vals


@dataclasses.dataclass(frozen=True)
class A0Estimate:
    A0: float
    residual_ratio: float
    flagged: bool
    k: float
    center: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def estimate_A0(field: ScalarField, k: float = 2.0, center: float = 0.0,
                odd_terms: int = 3) -> A0Estimate:
    """Slope ``A0`` of the strip limit ``A0 x sin(pi y)``.

    Least squares over the grid nodes with ``|x - center| <= k`` on the
    basis ``x^(2i+1) sin(pi y)``, ``i < odd_terms``; ``A0`` is the
    coefficient of ``x sin(pi y)``.  The higher odd powers absorb the
    curvature of the mode along the window, so the estimate is the slope at
    the center.  ``odd_terms=1`` is the plain one-term fit.  The estimate is
    flagged when ``|u - A0 x sin(pi y)|`` exceeds 20 % of ``|u|`` (2-norms
    over the window): the window is then not in the linear regime.
    """
    if k < 1:
        raise AsymptoticsError("window half-width k must be at least 1")
    P, u = _window_nodes(field, k, center)
    x = P[:, 0] - center
    s = np.sin(PI * P[:, 1])
    V = np.column_stack([x ** (2 * i + 1) * s for i in range(odd_terms)])
    coef, *_ = np.linalg.lstsq(V, u, rcond=None)
    A0 = float(coef[0])
    ratio = float(np.linalg.norm(u - A0 * x * s) / max(np.linalg.norm(u), 1e-300))
    return A0Estimate(A0=A0, residual_ratio=ratio, flagged=ratio > A0_FLAG_RATIO, k=k,
                      center=center)


def sup_error_window(field, reference: StripReference, k: float = 2.0,
                     center: float = 0.0) -> dict[int, float]:
    """``max |D^alpha (u - A0 x sin(pi y))|`` over the window nodes for
    ``|alpha| = 0, 1, 2`` (the maximum over the partials of each order).

    Sampled fields use their node values for order 0 and the interpolant
    for the derivatives; closed-form fields are sampled on a ``1/64``
    lattice of the strip window.
    """
    if hasattr(field, "grid"):
        P, _ = _window_nodes(field, k, center)
    else:
        xs = np.linspace(-k, k, int(round(128 * k)) + 1) + center
        ys = np.linspace(0.0, 1.0, 65)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        P = np.column_stack([X.ravel(), Y.ravel()])
    du = field.derivatives(P[:, 0], P[:, 1])
    if hasattr(field, "grid"):
        du = (field.grid.from_lattice(field.values)[np.abs(field.grid.nodes[:, 0] - center) <= k],
              ) + tuple(du[1:])
    dr = reference.derivatives(P[:, 0] - center, P[:, 1])
    diff = [np.abs(np.asarray(a) - np.asarray(b)) for a, b in zip(du, dr)]
    return {0: float(diff[0].max()), 1: float(max(diff[1].max(), diff[2].max())),
            2: float(max(diff[3].max(), diff[4].max(), diff[5].max()))}


@dataclasses.dataclass(frozen=True)
class GrowthBounds:
    C_upper: float
    C_lower: float

    @property
    def ok(self) -> bool:
        return self.C_lower > 0

    def to_dict(self) -> dict:
        return {"C_upper": self.C_upper, "C_lower": self.C_lower, "ok": self.ok}


def check_growth_bounds(field, center: float = 0.0) -> GrowthBounds:
    """Measured constants of the linear growth bound and of the
    nondegeneracy at ``x = +-1``.

    ``C_upper = max |u| / (1 + |x|)`` over the grid nodes (a ``1/64``
    lattice of ``|x| <= 64`` for the strip) and
    ``C_lower = min(|u(1, 1/2)|, |u(-1, 1/2)|)``, both after recentering.
    """
    if hasattr(field, "grid"):
        P = field.grid.nodes
        u = field.grid.from_lattice(field.values)
    else:
        xs = np.linspace(-64.0, 64.0, 8193) + center
        ys = np.linspace(0.0, 1.0, 65)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        P = np.column_stack([X.ravel(), Y.ravel()])
        u = field(P[:, 0], P[:, 1])
    upper = float(np.max(np.abs(u) / (1.0 + np.abs(P[:, 0] - center))))
    lower = float(min(abs(float(field(center + 1.0, 0.5))), abs(float(field(center - 1.0, 0.5)))))
    return GrowthBounds(C_upper=upper, C_lower=lower)


# --------------------------------------------------------------------------
# rectangles with a cap: eigenvalue fit, landmarks, small-x decay


# name used by the module contract
check_lemma21_bounds = check_growth_bounds


def model_eigenvalue(m, N, a, h: float | None = None):
    """``pi^2 + m^2 pi^2/(N + a)^2``, or with ``h`` the five-point analogue
    ``(4/h^2)[sin^2(pi h/2) + sin^2(m pi h/(2(N + a)))]``."""
    m = np.asarray(m, float)
    N = np.asarray(N, float)
    if h is None:
        return PI ** 2 + m ** 2 * PI ** 2 / (N + a) ** 2
    return 4.0 / h ** 2 * (math.sin(PI * h / 2) ** 2 + np.sin(m * PI * h / (2 * (N + a))) ** 2)


@dataclasses.dataclass(frozen=True)
class AsymptoticFit:
    a: float
    phi_max: float
    residuals: dict  # (m, N) -> lambda - model
    boundary_hit: bool
    expansion_observed: bool
    h: float | None
    window: tuple

    def max_residual(self, N) -> float:
        return max(abs(r) for (m, n), r in self.residuals.items() if n == N)

    def rows(self, family: str = ""):
        for (m, N), r in sorted(self.residuals.items()):
            yield {"family": family, "m": m, "N": N, "residual": r, "a_hat": self.a}

    def to_dict(self) -> dict:
        return {"a": self.a, "phi_max": self.phi_max, "boundary_hit": self.boundary_hit,
                "expansion_observed": self.expansion_observed, "h": self.h,
                "window": list(self.window),
                "residuals": [{"m": m, "N": N, "residual": r}
                              for (m, N), r in sorted(self.residuals.items())]}


def golden_section(f, lo: float, hi: float, tol: float = 1e-13, maxit: int = 200):
    """Minimizer of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxit):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    cand = [(f(lo), lo), (f(hi), hi), (min(fc, fd), c if fc < fd else d)]
    return min(cand)[1]


def fit_a(table: Mapping, phi_max: float, h: float | None = None) -> AsymptoticFit:
    """Least-squares ``a`` in ``lambda_{m,N} = pi^2 + m^2 pi^2/(N + a)^2``.

    ``table`` maps ``(m, N)`` to eigenvalues.  The search is confined to
    ``[0, phi_max]``; ``boundary_hit`` reports a minimizer at either end.
    Given the grid spacing ``h``, the five-point model of `model_eigenvalue`
    replaces the continuum one, so the O(h^2) error that the discretization
    of the straight part shares with the model does not leak into ``a``.
    ``expansion_observed`` is False when the largest residual at the largest
    N exceeds the one at the smallest N.
    """
    if not table:
        raise AsymptoticsError("empty eigenvalue table")
    keys = sorted(table)
    ms = np.array([k[0] for k in keys], float)
    Ns = np.array([k[1] for k in keys], float)
    lam = np.array([table[k] for k in keys], float)

    def sse(a):
        return float(np.sum((lam - model_eigenvalue(ms, Ns, a, h)) ** 2))

    if phi_max <= 0:
        a = 0.0
    else:
        a = golden_section(sse, 0.0, float(phi_max))
    span = max(phi_max, 1e-300)
    hit = phi_max > 0 and (a <= 1e-9 * span or a >= (1 - 1e-9) * span)
    res = lam - model_eigenvalue(ms, Ns, a, h)
    residuals = {(int(m), float(N) if N % 1 else int(N)): float(r) for m, N, r in zip(ms, Ns, res)}
    lo, hi = Ns.min(), Ns.max()
    r_lo = np.abs(res[Ns == lo]).max()
    r_hi = np.abs(res[Ns == hi]).max()
    return AsymptoticFit(a=float(a), phi_max=float(phi_max), residuals=residuals,
                         boundary_hit=bool(hit), expansion_observed=bool(r_hi <= r_lo), h=h,
                         window=(float(lo), float(hi)))


@dataclasses.dataclass(frozen=True)
class Landmarks:
    """Extrema and zeros of ``v_m`` in x.  For ``m = 2`` the maximum, zero
    and minimum are ``x_plus = (N+a)/4 - a``, ``x_N = (N+a)/2 - a`` and
    ``x_minus = 3(N+a)/4 - a``; ``x_prime = (N+a)/(6m) - a`` bounds the
    region left of the first extremum that stays free of critical points."""

    N: float
    a: float
    m: int
    extrema: tuple
    zeros: tuple
    x_prime: float

    @property
    def x_plus(self) -> float:
        return self.extrema[0]

    @property
    def x_minus(self) -> float:
        return self.extrema[1] if len(self.extrema) > 1 else float("nan")

    @property
    def x_N(self) -> float:
        return self.zeros[0] if self.zeros else float("nan")

    def to_dict(self) -> dict:
        return {"N": self.N, "a": self.a, "m": self.m, "extrema": list(self.extrema),
                "zeros": list(self.zeros), "x_prime": self.x_prime, "x_plus": self.x_plus,
                "x_minus": self.x_minus, "x_N": self.x_N}


def landmarks(N: float, a: float = 0.0, m: int = 2) -> Landmarks:
    if a < 0:
        raise AsymptoticsError("a must be nonnegative")
    ell = N + a
    extrema = tuple((2 * i - 1) * ell / (2 * m) - a for i in range(1, m + 1))
    zeros = tuple(i * ell / m - a for i in range(1, m))
    return Landmarks(N=N, a=a, m=m, extrema=extrema, zeros=zeros, x_prime=ell / (6 * m) - a)


def unit_amplitude_scale(field: ScalarField, reference: RectangleReference) -> float:
    """Least-squares factor ``s`` minimizing ``|s u - v_m|`` over the grid
    nodes."""
    P = field.grid.nodes
    u = field.grid.from_lattice(field.values)
    v = reference(P[:, 0], P[:, 1])
    den = float(u @ u)
    if den == 0:
        raise AsymptoticsError("zero field")
    return float(u @ v) / den


@dataclasses.dataclass(frozen=True)
class SmallXReport:
    N: float
    sup: float
    ratio: float
    scale: float
    applicable: bool = True

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def small_x_bound_check(field, N: float, m: int = 1, a: float = 0.0) -> SmallXReport:
    """``sup_{x <= 3 log N} |u| / (log N / N)`` after scaling ``u`` to unit
    amplitude against ``v_m``.  Closed-form references (no grid) are not
    applicable and return a flagged report."""
    if not hasattr(field, "grid"):
        return SmallXReport(N=N, sup=float("nan"), ratio=float("nan"), scale=float("nan"),
                            applicable=False)
    s = unit_amplitude_scale(field, RectangleReference(m=m, N=N, a=a))
    P = field.grid.nodes
    u = s * field.grid.from_lattice(field.values)
    sel = P[:, 0] <= 3 * math.log(N)
    sup = float(np.abs(u[sel]).max()) if sel.any() else 0.0
    return SmallXReport(N=N, sup=sup, ratio=sup / (math.log(N) / N), scale=s)
