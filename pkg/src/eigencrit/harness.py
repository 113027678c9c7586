"""Configuration-driven experiment runs and their persisted reports.

A run sweeps every domain of the configuration over the requested lengths
``N`` and grid spacings ``h``, computes the lowest modes, and applies the
selected analyses to the mode of index ``mode``.  Each (domain, N, h) cell
becomes one record; a cell that raises is recorded as failed and the sweep
goes on.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (StripReference, check_growth_bounds, estimate_A0, fit_a,
                          model_eigenvalue, sup_error_window, verify_strip_uniqueness)
from .contours import extract_level_curve
from .degree import region_degree_T
from .discretization import assemble_dirichlet_laplacian, build_grid
from .eigensolver import normalize_mode, solve_lowest
from .fields import ScalarField, boundary_saddle_check, directional_field, find_critical_points
from .geometry import FAMILIES, DomainError, DomainSpec, make_family

SUPPORTED_H = (1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128)
ANALYSES = ("critical_points", "nodal", "degree", "strip", "fit_a", "directional",
            "boundary_saddles")
CSV_VERSION = 1
CSV_COLUMNS = {
    "eigenvalues": ["domain", "N", "h", "k", "eigenvalue", "residual", "simple"],
    "critical_points": ["domain", "N", "h", "x", "y", "value", "kind", "index", "grad_norm",
                        "det_hessian"],
    "nodal": ["domain", "N", "h", "curve", "closed", "hits", "width", "width_times_N",
              "center"],
    "degree": ["domain", "N", "h", "side", "winding", "raw", "min_norm", "eps"],
    "fit": ["family", "m", "N", "lambda", "lambda_model", "residual", "a_hat"],
}


class ConfigError(ValueError):
    pass


def thread_count(requested: int | None = None) -> int:
    """``requested``, else ``EIGENCRIT_THREADS``, else the CPU count."""
    if requested is not None:
        n = int(requested)
    else:
        env = os.environ.get("EIGENCRIT_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    if n < 1:
        raise ConfigError("thread count must be positive")
    return n


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """What to run.

    ``domains`` are `DomainSpec` dictionaries; an entry without ``N`` (and
    without ellipse axes or custom heights) is swept over ``N``.  ``mode``
    is the index of the analysed eigenfunction and ``m`` the number of
    eigenpairs computed.
    """

    domains: tuple
    N: tuple = (8,)
    h: tuple = (1 / 64,)
    m: int = 2
    mode: int = 2
    tol: float = 1e-8
    analyses: tuple = ("critical_points", "nodal")
    angles: int = 16
    output: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "domains" not in data or not data["domains"]:
            raise ConfigError("config needs at least one domain")
        an = data.get("analyses", cls.analyses)
        if isinstance(an, dict):
            an = [k for k, v in an.items() if v]
        cfg = cls(domains=tuple(dict(d) for d in data["domains"]),
                  N=tuple(_as_list(data.get("N", cls.N))),
                  h=tuple(float(x) for x in _as_list(data.get("h", cls.h))),
                  m=int(data.get("m", cls.m)),
                  mode=int(data["mode"]) if "mode" in data else min(2, int(data.get("m", cls.m))),
                  tol=float(data.get("tol", cls.tol)), analyses=tuple(an),
                  angles=int(data.get("angles", cls.angles)), output=data.get("output"))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def validate(self) -> None:
        for d in self.domains:
            fam = d.get("family")
            if fam not in FAMILIES:
                raise ConfigError(f"unknown family {fam!r}; expected one of {FAMILIES}")
        for h in self.h:
            if not any(abs(h - s) < 1e-15 for s in SUPPORTED_H):
                raise ConfigError(f"h = {h} is not one of {SUPPORTED_H}")
        bad = set(self.analyses) - set(ANALYSES)
        if bad:
            raise ConfigError(f"unknown analyses {sorted(bad)}")
        if not 1 <= self.mode <= self.m:
            raise ConfigError("mode must lie in [1, m]")
        if "fit_a" in self.analyses and self.m < 3:
            raise ConfigError("fit_a needs m >= 3")
        for spec in self.cells_specs():
            try:
                DomainSpec.from_dict(spec)
            except (DomainError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid domain {spec}: {exc}") from None

    def cells_specs(self):
        for d in self.domains:
            fixed = "N" in d or d.get("axes") is not None or d.get("heights") is not None
            if fixed:
                yield dict(d)
            else:
                for N in self.N:
                    yield {**d, "N": N}

    def cells(self):
        return [(spec, h) for spec in self.cells_specs() for h in self.h]

    def to_dict(self) -> dict:
        return {"domains": [dict(d) for d in self.domains], "N": list(self.N), "h": list(self.h),
                "m": self.m, "mode": self.mode, "tol": self.tol,
                "analyses": sorted(self.analyses), "angles": self.angles, "output": self.output}

    def hash(self) -> str:
        """SHA-256 of the canonical JSON of every field but ``output``."""
        d = self.to_dict()
        d.pop("output")
        return hashlib.sha256(_canonical(d).encode()).hexdigest()


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def _clean(obj):
    """JSON-ready copy: numpy scalars and arrays to Python, NaN to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if not math.isfinite(f) else f
    return obj


def _canonical(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"))


@dataclasses.dataclass
class ResultBundle:
    config: dict
    config_hash: str
    version: str
    records: list
    fits: list
    timings: dict = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        """Deterministic content; wall-clock ``timings`` are kept apart."""
        return {"version": self.version, "config_hash": self.config_hash,
                "csv_version": CSV_VERSION, "config": self.config, "records": self.records,
                "fits": self.fits}

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "ResultBundle":
        return cls(config=data["config"], config_hash=data["config_hash"],
                   version=data["version"], records=data["records"], fits=data.get("fits", []),
                   timings=data.get("timings", {}))

    @classmethod
    def load(cls, path) -> "ResultBundle":
        with open(path) as fh:
            bundle = cls.from_dict(json.load(fh))
        tpath = Path(path).with_name("timings.json")
        if tpath.exists():
            with open(tpath) as fh:
                bundle.timings = json.load(fh)
        return bundle

    @property
    def failures(self) -> list:
        return [r for r in self.records if r["status"] != "ok"]


# --------------------------------------------------------------------------
# one cell


def _label(spec: dict) -> str:
    return DomainSpec.from_dict(spec).label()


def analyze_cell(spec: dict, h: float, cfg: ExperimentConfig) -> dict:
    """Solve and analyse one (domain, h) cell; returns the record."""
    dom = make_family(spec)
    grid = build_grid(dom, h)
    op = assemble_dirichlet_laplacian(grid)
    modes = solve_lowest(op, cfg.m, tol=cfg.tol)
    rec = {"domain": spec, "label": _label(spec), "N": dom.params.get("N", dom.N), "h": h,
           "L": dom.L, "eccentricity": dom.ecc, "unknowns": grid.n,
           "eigenvalues": [md.eigenvalue for md in modes],
           "residuals": [md.residual for md in modes],
           "simple": [md.simple for md in modes]}
    nm = normalize_mode(modes[cfg.mode - 1], dom)
    field = ScalarField(grid, nm.values)
    an = set(cfg.analyses)
    center = None
    curves = None
    if an & {"nodal", "degree", "strip", "directional", "boundary_saddles"}:
        curves = extract_level_curve(field)
        center = curves[0].mean_x if curves else None
        rec["center"] = center
    if "critical_points" in an:
        cps = find_critical_points(field)
        rec["critical_points"] = [c.to_dict() for c in cps]
        rec["unresolved"] = cps.unresolved
    if "nodal" in an:
        rec["nodal"] = [c.to_dict() for c in curves]
    if "degree" in an:
        rec["degree"] = {side: region_degree_T(field, side, center).to_dict()
                         for side in ("right", "left")}
    if "strip" in an:
        est = estimate_A0(field, 2.0, center)
        ref = StripReference(est.A0)
        rec["strip"] = {"A0": est.to_dict(),
                        "sup_error": sup_error_window(field, ref, 2.0, center),
                        "uniqueness": verify_strip_uniqueness(field, (-2.0, 2.0), 5, 1e-2,
                                                              center=center,
                                                              rel_tol=0.1).to_dict(),
                        "growth": check_growth_bounds(field, center).to_dict()}
    if "directional" in an:
        out = []
        for k in range(cfg.angles):
            theta = math.pi * k / cfg.angles
            ft = directional_field(field, theta)
            cs = extract_level_curve(ft, side="right", cut=center + 0.5)
            out.append({"theta": theta, "curves": len(cs),
                        "hits": [c.hits for c in cs], "ends": [list(c.ends) for c in cs]})
        rec["directional"] = out
    if "boundary_saddles" in an:
        rec["boundary_saddles"] = [{"point": r.point, "det": r.det, "uxy": r.uxy}
                                   for r in boundary_saddle_check(field, curves[0])]
    return rec


def _run_cell(args):
    idx, spec, h, cfg, chash = args
    t0 = time.perf_counter()
    try:
        rec = analyze_cell(spec, h, cfg)
        rec["status"] = "ok"
    except Exception as exc:  # failures are data
        rec = {"domain": spec, "label": _safe_label(spec), "N": spec.get("N"), "h": h,
               "status": "failed", "error": f"{type(exc).__name__}: {exc}"}
    rec["config_hash"] = chash
    return idx, rec, time.perf_counter() - t0


def _safe_label(spec):
    try:
        return _label(spec)
    except Exception:
        return str(spec.get("family"))


def _fits(records: list, cfg: ExperimentConfig) -> list:
    """One eigenvalue fit per (domain entry, h) over its successful N."""
    groups: dict = {}
    for r in records:
        if r["status"] != "ok":
            continue
        d = {k: v for k, v in r["domain"].items() if k != "N"}
        groups.setdefault((_canonical(d), r["h"]), []).append(r)
    out = []
    for (key, h), recs in sorted(groups.items()):
        d = json.loads(key)
        try:
            dom = make_family({**d, "N": recs[0]["N"]})
        except Exception as exc:
            out.append({"family": d.get("family"), "h": h, "error": str(exc)})
            continue
        phi_max = float(dom.params.get("phi_max", 0.0))
        table = {(k + 1, r["N"]): r["eigenvalues"][k] for r in recs for k in range(3)}
        try:
            fit = fit_a(table, phi_max, h)
        except Exception as exc:
            out.append({"family": d.get("family"), "h": h, "error": str(exc)})
            continue
        family = _safe_label({**d, "N": 0}).replace("-N0", "")
        rows = [{"family": family, "m": m, "N": N,
                 "lambda": table[(m, N)], "lambda_model": float(model_eigenvalue(m, N, fit.a, h)),
                 "residual": res, "a_hat": fit.a}
                for (m, N), res in sorted(fit.residuals.items())]
        out.append({"family": d.get("family"), "domain": d, "h": h, **fit.to_dict(),
                    "rows": rows})
    return out


def run_experiment(config: ExperimentConfig | dict, threads: int | None = None) -> ResultBundle:
    """Run every cell of ``config``.  Records come back in cell order
    whatever the thread count, so the JSON is reproducible."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    chash = cfg.hash()
    jobs = [(i, spec, h, cfg, chash) for i, (spec, h) in enumerate(cfg.cells())]
    n = min(thread_count(threads), max(len(jobs), 1))
    t0 = time.perf_counter()
    if n == 1:
        results = [_run_cell(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(_run_cell, jobs))
    results.sort(key=lambda t: t[0])
    records = [_clean(r) for _, r, _ in results]
    fits = _clean(_fits(records, cfg)) if "fit_a" in cfg.analyses else []
    timings = {"total_seconds": time.perf_counter() - t0, "threads": n,
               "cells": [{"label": r["label"], "h": r["h"], "seconds": t} for _, r, t in results]}
    return ResultBundle(config=_clean(cfg.to_dict()), config_hash=chash, version=__version__,
                        records=records, fits=fits, timings=timings)


# --------------------------------------------------------------------------
# reports


def _rows(bundle: ResultBundle):
    tables = {k: [] for k in CSV_COLUMNS}
    curves = []
    for r in bundle.records:
        if r.get("status") != "ok":
            continue
        base = {"domain": r["label"], "N": r["N"], "h": r["h"]}
        for k, (lam, res, simple) in enumerate(zip(r["eigenvalues"], r["residuals"], r["simple"])):
            tables["eigenvalues"].append({**base, "k": k + 1, "eigenvalue": lam, "residual": res,
                                          "simple": simple})
        for c in r.get("critical_points", []):
            H = np.asarray(c["hessian"], float)
            tables["critical_points"].append({**base, **{k: c[k] for k in
                                                         ("x", "y", "value", "kind", "index",
                                                          "grad_norm")},
                                              "det_hessian": float(np.linalg.det(H))})
        for i, c in enumerate(r.get("nodal", [])):
            tables["nodal"].append({**base, "curve": i, "closed": c["closed"],
                                    "hits": 0 if c["closed"] else len(c["ends"]),
                                    "width": c["width"], "width_times_N": c["width"] * r["N"],
                                    "center": r.get("center")})
            curves.append((f"{r['label']}_h{round(1 / r['h'])}_curve{i}", c["points"]))
        for side, d in r.get("degree", {}).items():
            tables["degree"].append({**base, "side": side, **{k: d[k] for k in
                                                               ("winding", "raw", "min_norm",
                                                                "eps")}})
    for f in bundle.fits:
        tables["fit"].extend(f.get("rows", []))
    return tables, curves


def _safe_name(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in s)


def emit_report(bundle: ResultBundle, out_dir, formats=("json", "csv")) -> list[Path]:
    """Write ``results.json``, ``timings.json``, the CSV tables and one CSV
    polyline per nodal curve under ``contours/``.  Returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    written = []
    if "json" in formats:
        p = out / "results.json"
        p.write_text(bundle.to_json() + "\n")
        written.append(p)
        p = out / "timings.json"
        p.write_text(json.dumps(_clean(bundle.timings), sort_keys=True, indent=1) + "\n")
        written.append(p)
    if "csv" in formats:
        tables, curves = _rows(bundle)
        for name, cols in CSV_COLUMNS.items():
            p = out / f"{name}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
                w.writeheader()
                for row in tables[name]:
                    w.writerow({k: _fmt(row.get(k)) for k in cols})
            written.append(p)
        cdir = out / "contours"
        cdir.mkdir(exist_ok=True)
        for name, pts in curves:
            p = cdir / f"{_safe_name(name)}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x", "y"])
                w.writerows([[_fmt(x), _fmt(y)] for x, y in pts])
            written.append(p)
    return written


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v
