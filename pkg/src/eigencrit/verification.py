"""Named verification suites with pass/fail checks.

Each suite solves the domains it needs once (solutions are cached for the
life of the process, so suites sharing domains share the work) and returns
a `SuiteResult` listing its individual checks.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import time

import numpy as np

from .asymptotics import (StripReference, estimate_A0, fit_a, landmarks, model_eigenvalue,
                          nodal_center, small_x_bound_check, sup_error_window,
                          verify_strip_uniqueness)
from .contours import extract_level_curve, is_simple_polyline
from .degree import (DegreeError, circle, gradient_field, loop_index_sum, region_degree_T,
                     vector_field_T, winding_number)
from .discretization import assemble_dirichlet_laplacian, build_grid
from .eigensolver import normalize_mode, rectangle_spectrum_oracle, solve_lowest
from .fields import ScalarField, boundary_saddle_check, directional_field, find_critical_points
from .geometry import DomainSpec, egg_heights, make_family

H = 1.0 / 64
TOL = 1e-10  # eigensolver residual used by the suites
SWEEP = (8, 16, 32)
SEED = 20240601
CAP_PHI = {"kind": "parabolic", "c": 0.5}  # phi(y) = y (1 - y) / 2
CAP_PHI_MAX = 0.125


def _build(name: str, N: float):
    if name == "egg":
        # two half-ellipses of lengths 0.4 N and 0.6 N: convex, not symmetric
        return make_family(DomainSpec(family="custom_height_functions",
                                      heights=egg_heights(0.4 * N, 0.6 * N)))
    if name == "cap":
        return make_family(DomainSpec(family="perturbed_rectangle", N=N, phi=CAP_PHI))
    return make_family(DomainSpec(family=name, N=N))


class Pipeline:
    """Domain, grid, operator and lowest modes of one case, with lazily
    computed fields and nodal data."""

    def __init__(self, name: str, N: float, h: float, m: int, tol: float):
        self.name, self.N, self.h = name, N, h
        self.domain = _build(name, N)
        self.grid = build_grid(self.domain, h)
        self.op = assemble_dirichlet_laplacian(self.grid)
        self.modes = solve_lowest(self.op, m, tol=tol)
        self._fields = {}
        self._cps = {}
        self._curves = None

    def field(self, k: int = 2) -> ScalarField:
        if k not in self._fields:
            nm = normalize_mode(self.modes[k - 1], self.domain)
            self._fields[k] = ScalarField(self.grid, nm.values)
        return self._fields[k]

    def critical_points(self, k: int = 2):
        if k not in self._cps:
            self._cps[k] = find_critical_points(self.field(k))
        return self._cps[k]

    @property
    def nodal_curves(self):
        if self._curves is None:
            self._curves = extract_level_curve(self.field(2))
        return self._curves

    @property
    def center(self) -> float:
        return self.nodal_curves[0].mean_x


@functools.lru_cache(maxsize=None)
def pipeline(name: str, N: float, h: float = H, m: int = 2, tol: float = TOL) -> Pipeline:
    return Pipeline(name, N, h, m, tol)


def clear_cache() -> None:
    pipeline.cache_clear()


# --------------------------------------------------------------------------


@dataclasses.dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclasses.dataclass
class SuiteResult:
    name: str
    checks: list
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def table(self) -> str:
        w = max([len(c.name) for c in self.checks] + [5])
        lines = [f"suite {self.name}"]
        for c in self.checks:
            lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.name:<{w}}  {c.detail}")
        lines.append(f"  {'PASS' if self.passed else 'FAIL'}  {self.name} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks, "
                     f"{self.seconds:.1f} s)")
        return "\n".join(lines)


def _fmt(x, digits=4):
    return f"{x:.{digits}g}"


# --------------------------------------------------------------------------
# suites


def rectangle_exact() -> list[Check]:
    t0 = time.perf_counter()
    N = 4
    p = pipeline("rectangle", N, H, 3)
    lam = np.array([md.eigenvalue for md in p.modes])
    disc = rectangle_spectrum_oracle(N, H, 3)
    cont = np.array([1.0625, 1.25, 1.5625]) * math.pi ** 2
    rel_d = np.abs(lam - disc) / disc
    rel_c = np.abs(lam - cont) / cont
    checks = [Check("discrete closed form", bool(rel_d.max() <= 1e-8),
                    f"max rel err {_fmt(rel_d.max())} (<= 1e-8)"),
              Check("continuum values", bool(rel_c.max() <= 5e-3),
                    f"max rel err {_fmt(rel_c.max())} (<= 5e-3)")]
    cps = p.critical_points(2)
    want = np.array([[1.0, 0.5], [3.0, 0.5]])
    got = np.array([[c.x, c.y] for c in cps])
    ok = len(cps) == 2 and np.all(np.linalg.norm(got - want, axis=1) <= 2 * H)
    checks.append(Check("mode-2 critical points", bool(ok),
                        f"{len(cps)} points at {np.round(got, 5).tolist()}"))
    curves = p.nodal_curves
    dev = float(np.abs(curves[0].points[:, 0] - 2.0).max()) if curves else float("inf")
    checks.append(Check("nodal curve x = 2", len(curves) == 1 and dev <= H,
                        f"{len(curves)} curve(s), max |x - 2| = {_fmt(dev)}"))
    dt = time.perf_counter() - t0
    checks.append(Check("runtime", dt < 30.0, f"{dt:.2f} s (< 30 s)"))
    return checks


TWO_CRITICAL = [(fam, N) for fam in ("ellipse", "stadium") for N in SWEEP]


def thm_two_critical() -> list[Check]:
    checks = []
    for fam in ("ellipse", "stadium"):
        absx = []
        for N in SWEEP:
            cps = pipeline(fam, N).critical_points(2)
            kinds = sorted(c.kind for c in cps)
            ok = len(cps) == 2 and kinds == ["max", "min"] and not cps.unresolved
            dets = [float(np.linalg.det(c.hessian)) for c in cps]
            checks.append(Check(f"{fam} N={N}: two critical points", ok,
                                f"{len(cps)} points {kinds}, det H {[_fmt(d) for d in dets]}, "
                                f"{len(cps.unresolved)} unresolved"))
            absx.append(min(abs(c.x) for c in cps) if cps else float("nan"))
        inc = all(b > a for a, b in zip(absx, absx[1:]))
        checks.append(Check(f"{fam}: |x| grows with N", inc,
                            "|x| = " + ", ".join(_fmt(v) for v in absx)))
    return checks


WIDTH_FLOOR = 1e-9


def nodal_width() -> list[Check]:
    checks = []
    for fam in ("ellipse", "stadium", "egg"):
        wN = []
        for N in SWEEP:
            curves = pipeline(fam, N).nodal_curves
            c = curves[0]
            ok = len(curves) == 1 and not c.closed and c.hits == 2
            checks.append(Check(f"{fam} N={N}: one open nodal curve", ok,
                                f"{len(curves)} curve(s), hits {c.hits}, width {_fmt(c.width)}"))
            wN.append(c.width * N)
        widths = [w / N for w, N in zip(wN, SWEEP)]
        if max(widths) <= WIDTH_FLOOR:
            checks.append(Check(f"{fam}: width*N bounded", True,
                                f"widths at roundoff level ({_fmt(max(widths))})"))
        else:
            ok = max(wN) <= 2 * wN[0]
            checks.append(Check(f"{fam}: width*N bounded", ok,
                                "width*N = " + ", ".join(_fmt(v) for v in wN)
                                + f" (<= {_fmt(2 * wN[0])})"))
    return checks


def _random_interior(p: Pipeline, rng, count: int, clearance: float):
    dom = p.domain
    pts = []
    while len(pts) < count:
        x = rng.uniform(dom.a, dom.b)
        y = rng.uniform(0.0, 1.0)
        lo, hi = float(dom.f1(x)), float(dom.f2(x))
        if lo + clearance < y < hi - clearance:
            pts.append((x, y))
    return np.array(pts)


def degree_one() -> list[Check]:
    checks = []
    rng = np.random.default_rng(SEED)
    for fam, N in TWO_CRITICAL:
        p = pipeline(fam, N)
        f = p.field(2)
        res = {}
        for side in ("right", "left"):
            try:
                res[side] = region_degree_T(f, side, p.center)
            except DegreeError as exc:
                res[side] = exc
        ok = all(not isinstance(r, Exception) and r.winding == 1 for r in res.values())
        checks.append(Check(f"{fam} N={N}: deg T = 1 on both sides", ok,
                            ", ".join(f"{s} {r.winding if not isinstance(r, Exception) else r}"
                                      for s, r in res.items())))
        # T . grad u = -K |grad u|^3 at random points (curvature from its own formula)
        pts = _random_interior(p, rng, 100, 2 * p.h)
        T = vector_field_T(f, pts[:, 0], pts[:, 1])
        G = gradient_field(f, pts[:, 0], pts[:, 1])
        _, ux, uy, uxx, uxy, uyy = f.derivatives(pts[:, 0], pts[:, 1])
        g = np.hypot(ux, uy)
        K = -(uyy * ux ** 2 - 2 * uxy * ux * uy + uxx * uy ** 2) / g ** 3
        lhs = np.einsum("ij,ij->i", T, G)
        rhs = -K * g ** 3
        rel = np.abs(lhs - rhs) / np.maximum(np.linalg.norm(T, axis=1) * g, 1e-300)
        checks.append(Check(f"{fam} N={N}: T identity", bool(rel.max() <= 1e-6),
                            f"max rel err {_fmt(rel.max())} over 100 points"))
    return checks


def strip_limit() -> list[Check]:
    checks = []
    errs = []
    for N in SWEEP:
        p = pipeline("ellipse", N)
        f, c = p.field(2), p.center
        est = estimate_A0(f, 2.0, c)
        errs.append(sup_error_window(f, StripReference(est.A0), 2.0, c))
    for order in (0, 1, 2):
        seq = [e[order] for e in errs]
        ok = all(b < a for a, b in zip(seq, seq[1:]))
        checks.append(Check(f"sup error order {order} decreasing", ok,
                            ", ".join(_fmt(v) for v in seq)))
    p = pipeline("ellipse", 32)
    rep = verify_strip_uniqueness(p.field(2), (-2.0, 2.0), 5, tol=1e-2, center=p.center,
                                  rel_tol=0.1)
    checks.append(Check("strip uniqueness at N=32", rep.passed,
                        f"c1 {_fmt(rep.c1)}, |d1| {_fmt(abs(rep.d1))} (<= 1e-2), "
                        f"max|A_j|/max|A_1| {_fmt(rep.ratio)} (<= 0.1)"))
    return checks


def _cap_fit():
    table = {}
    for N in SWEEP:
        p = pipeline("cap", N, H, 4)
        for md in p.modes[:3]:
            table[(md.index, N)] = md.eigenvalue
    return fit_a(table, CAP_PHI_MAX, H)


def rn_expansion() -> list[Check]:
    fit = _cap_fit()
    checks = [Check("a in [0, max phi]", 0.0 <= fit.a <= CAP_PHI_MAX,
                    f"a = {_fmt(fit.a, 8)}, boundary hit {fit.boundary_hit}")]
    r8, r32 = fit.max_residual(8), fit.max_residual(32)
    checks.append(Check("residual N=32 vs N=8", r8 >= 4 * r32,
                        f"{_fmt(r8)} / {_fmt(r32)} = {_fmt(r8 / r32)} (>= 4)"))
    a_true = 0.0731
    syn = {(m, N): float(model_eigenvalue(m, N, a_true)) for m in (1, 2, 3) for N in SWEEP}
    rec = fit_a(syn, CAP_PHI_MAX)
    checks.append(Check("synthetic recovery", abs(rec.a - a_true) <= 1e-8,
                        f"|a - a_true| = {_fmt(abs(rec.a - a_true))} (<= 1e-8)"))
    ratios = {}
    for N in (16, 32):
        p = pipeline("cap", N, H, 4)
        ratios[N] = small_x_bound_check(p.field(1), N, m=1, a=fit.a).ratio
    checks.append(Check("small-x ratio bounded", ratios[32] <= 2 * ratios[16],
                        f"ratio N=16 {_fmt(ratios[16])}, N=32 {_fmt(ratios[32])} "
                        f"(<= 2x N=16)"))
    return checks


def m_critical() -> list[Check]:
    N = 16
    a = _cap_fit().a
    p = pipeline("cap", N, H, 4)
    checks = []
    for m in (2, 3, 4):
        cps = p.critical_points(m)
        lm = landmarks(N, a, m)
        kinds = [c.kind for c in cps]
        alternating = all(k in ("max", "min") for k in kinds) and all(
            k1 != k2 for k1, k2 in zip(kinds, kinds[1:]))
        xs = np.array([c.x for c in cps])
        checks.append(Check(f"m={m}: exactly m nondegenerate points",
                            len(cps) == m and alternating and not cps.unresolved,
                            f"{len(cps)} points {kinds}"))
        checks.append(Check(f"m={m}: none left of x'", bool(np.all(xs >= lm.x_prime)),
                            f"min x {_fmt(xs.min()) if len(xs) else '-'} vs x' {_fmt(lm.x_prime)}"))
        if len(cps) == m:
            dev = np.abs(np.sort(xs) - np.array(lm.extrema))
            ok = bool(dev.max() <= 4 * H)
            detail = f"max |x - landmark| = {_fmt(dev.max())} (<= 4h)"
        else:
            ok, detail = False, "count mismatch"
        checks.append(Check(f"m={m}: landmark positions", ok, detail))
    return checks


def directional() -> list[Check]:
    p = pipeline("ellipse", 16)
    f, c = p.field(2), p.center
    checks = []
    bad = []
    for k in range(16):
        theta = math.pi * k / 16
        curves = extract_level_curve(directional_field(f, theta), side="right", cut=c + 0.5)
        ok = (len(curves) == 1 and not curves[0].closed and curves[0].hits == 2
              and is_simple_polyline(curves[0].points))
        if not ok:
            bad.append(f"theta={theta:.3f}: {len(curves)} curve(s) "
                       f"{[cc.hits for cc in curves]} hits")
    checks.append(Check("N_theta single curve, two hits (16 angles)", not bad,
                        "; ".join(bad) or "all 16 angles"))
    cps = p.critical_points(2)
    pts = [(q.x, q.y) for q in cps]
    idx = [q.index or 0 for q in cps]
    rng = np.random.default_rng(SEED)
    dom = p.domain
    F = (lambda x, y: gradient_field(f, x, y))
    done, mismatches, enclosing, attempts = 0, [], 0, 0
    while done < 20 and attempts < 500:
        attempts += 1
        # alternate loops around a critical point with loops anywhere
        if done % 2 == 0 and pts:
            q = np.array(pts[rng.integers(len(pts))]) + rng.normal(scale=0.05, size=2)
            r = rng.uniform(0.1, 0.35)
        else:
            q = np.array([rng.uniform(dom.a, dom.b), rng.uniform(0.0, 1.0)])
            r = rng.uniform(0.05, 0.45)
        loop = circle(q, r, 128)
        lo, hi = dom.f1(loop[:, 0]), dom.f2(loop[:, 0])
        inside = (loop[:, 0] > dom.a) & (loop[:, 0] < dom.b)
        if not np.all(inside) or np.any(loop[:, 1] < lo + 4 * p.h) or np.any(loop[:, 1] > hi - 4 * p.h):
            continue
        try:
            rep = winding_number(F, loop)
        except DegreeError:
            continue
        expect = loop_index_sum(pts, idx, loop)
        enclosing += expect != 0
        if rep.winding != expect:
            mismatches.append(f"center {np.round(q, 3).tolist()} r {r:.3f}: "
                              f"{rep.winding} vs {expect}")
        done += 1
    checks.append(Check("Poincare-Hopf on random loops", done == 20 and not mismatches,
                        f"{done} loops ({enclosing} enclosing critical points), "
                        f"{len(mismatches)} mismatches {mismatches[:3]}"))
    return checks


def boundary_saddles() -> list[Check]:
    checks = []
    for fam, N in TWO_CRITICAL:
        p = pipeline(fam, N)
        try:
            reps = boundary_saddle_check(p.field(2), p.nodal_curves[0])
        except Exception as exc:
            checks.append(Check(f"{fam} N={N}: boundary saddles", False, str(exc)))
            continue
        ok = all(r.det < 0 for r in reps) and reps[0].uxy * reps[1].uxy < 0
        checks.append(Check(f"{fam} N={N}: boundary saddles", ok,
                            "det " + ", ".join(_fmt(r.det) for r in reps)
                            + "; u_xy " + ", ".join(_fmt(r.uxy) for r in reps)))
    return checks


SUITES = {
    "rectangle-exact": rectangle_exact,
    "thm-two-critical": thm_two_critical,
    "nodal-width": nodal_width,
    "degree-one": degree_one,
    "strip-limit": strip_limit,
    "rn-expansion": rn_expansion,
    "m-critical": m_critical,
    "directional": directional,
    "boundary-saddles": boundary_saddles,
}


def run_suite(name: str) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    t0 = time.perf_counter()
    try:
        checks = SUITES[name]()
    except Exception as exc:  # a crash is a failed check, not a traceback
        checks = [Check("suite raised", False, f"{type(exc).__name__}: {exc}")]
    return SuiteResult(name=name, checks=checks, seconds=time.perf_counter() - t0)
