"""Monte-Carlo convergence experiments for the extended graph Laplacians.

A *cell* is one ``(seed, n)`` pair: one sample is drawn, a graph is built for
every ``(h, lam)`` and all requested kinds are evaluated at the unmasked
evaluation points against the oracle limits. Cells run independently and the
report is sorted canonically, so output does not depend on worker count.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import manifold as mf
from .functions import get_function
from .graph_core import IsolatedVertexError
from .io import fmt
from .kernel import get_kernel, moments as kernel_moments
from .neighborhood import KINDS, EmptyNeighborhoodError, apply_laplacian, build_graph
from .oracle import LimitSpec, limit_at

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "CellFailure",
    "ConvergenceReport",
    "bandwidth_schedule",
    "boundary_mask",
    "eval_grid",
    "run_convergence",
    "estimate_rate",
    "resolve_workers",
    "ROW_COLUMNS",
    "AGG_COLUMNS",
    "RATE_COLUMNS",
    "DEFAULT_SCHEDULE_C",
]

ROW_COLUMNS = ("seed", "n", "h", "lambda", "kind", "point_id", "estimate", "limit", "abs_err", "rel_err")
AGG_COLUMNS = ("n", "h", "lambda", "kind", "median_abs_err", "mean_abs_err", "cells_failed")
RATE_COLUMNS = ("lambda", "kind", "slope", "intercept", "r2")

DEFAULT_SCHEDULE_C = 1.5
THREADS_ENV = "LAPLACE_LIMITS_THREADS"


@dataclass
class ExperimentConfig:
    model: str
    function: str
    ns: List[int]
    lambdas: List[float] = field(default_factory=lambda: [0.0])
    kinds: List[str] = field(default_factory=lambda: ["rw"])
    kernel: str = "cubic_taper"
    h_list: Optional[List[float]] = None
    schedule_c: Optional[float] = None
    eval_rule: str = "grid"
    eval_count: int = 25
    boundary_margin_factor: float = 2.0
    seeds: List[int] = field(default_factory=lambda: [0])

    def __post_init__(self):
        if (self.h_list is None) == (self.schedule_c is None):
            raise ValueError("give exactly one of h_list or schedule_c")
        if any(int(n) != n or n < 10 for n in self.ns):
            raise ValueError("all sample sizes must be integers >= 10")
        if self.h_list is not None and any(not h > 0 for h in self.h_list):
            raise ValueError("all bandwidths must be positive")
        if self.schedule_c is not None and not self.schedule_c > 0:
            raise ValueError("schedule constant must be positive")
        if not self.boundary_margin_factor >= 0:
            raise ValueError("boundary margin factor must be >= 0")
        bad = [k for k in self.kinds if k not in KINDS]
        if bad:
            raise ValueError(f"unknown kinds {bad}; expected a subset of {list(KINDS)}")
        if self.eval_rule not in ("grid", "sample"):
            raise ValueError("eval rule must be 'grid' or 'sample'")
        if not self.seeds or not self.ns or not self.lambdas or not self.kinds:
            raise ValueError("seeds, ns, lambdas and kinds must be non-empty")
        # resolve names early so bad configs fail before any work
        mf.get_model(self.model)
        get_kernel(self.kernel)
        get_function(self.function)

    def bandwidths(self, n: int, m: int) -> List[float]:
        if self.h_list is not None:
            return [float(h) for h in self.h_list]
        return [bandwidth_schedule(n, m, self.schedule_c)]


@dataclass(frozen=True)
class ReportRow:
    seed: int
    n: int
    h: float
    lam: float
    kind: str
    point_id: int
    estimate: float
    limit: float
    abs_err: float
    rel_err: float

    def key(self):
        return (self.seed, self.n, self.h, self.lam, self.kind, self.point_id)

    def as_csv(self):
        return [self.seed, self.n, fmt(self.h), fmt(self.lam), self.kind, self.point_id,
                fmt(self.estimate), fmt(self.limit), fmt(self.abs_err), fmt(self.rel_err)]


@dataclass(frozen=True)
class CellFailure:
    seed: int
    n: int
    h: float
    lam: float
    reason: str


@dataclass
class ConvergenceReport:
    config: ExperimentConfig
    rows: List[ReportRow]
    failures: List[CellFailure]
    eval_points: np.ndarray

    def select(self, lam=None, kind=None, seed=None, n=None) -> List[ReportRow]:
        return [
            r for r in self.rows
            if (lam is None or r.lam == lam) and (kind is None or r.kind == kind)
            and (seed is None or r.seed == seed) and (n is None or r.n == n)
        ]

    def aggregates(self) -> List[tuple]:
        """``(n, h, lam, kind, median_abs_err, mean_abs_err, cells_failed)`` per group."""
        groups: Dict[tuple, List[float]] = {}
        for r in self.rows:
            groups.setdefault((r.n, r.h, r.lam, r.kind), []).append(r.abs_err)
        failed: Dict[tuple, int] = {}
        for fl in self.failures:
            for kind in self.config.kinds:
                key = (fl.n, fl.h, fl.lam, kind)
                failed[key] = failed.get(key, 0) + 1
                groups.setdefault(key, [])
        out = []
        for key in sorted(groups):
            errs = np.array(groups[key], dtype=float)
            med = float(np.median(errs)) if errs.size else math.nan
            mean = float(np.mean(errs)) if errs.size else math.nan
            out.append(key + (med, mean, failed.get(key, 0)))
        return out

    def rates(self) -> List[tuple]:
        out = []
        for lam in sorted(set(float(l) for l in self.config.lambdas)):
            for kind in sorted(set(self.config.kinds)):
                try:
                    slope, intercept, r2 = estimate_rate(self, lam, kind)
                except ValueError:
                    continue
                out.append((lam, kind, slope, intercept, r2))
        return out

    def write(self, output_dir) -> Dict[str, Path]:
        """Write ``rows.csv``, ``aggregates.csv``, ``rates.csv`` and ``meta.json``."""
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {k: out / f"{k}.csv" for k in ("rows", "aggregates", "rates")}
        with open(paths["rows"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ROW_COLUMNS)
            for r in self.rows:
                w.writerow(r.as_csv())
        with open(paths["aggregates"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AGG_COLUMNS)
            for n, h, lam, kind, med, mean, nf in self.aggregates():
                w.writerow([n, fmt(h), fmt(lam), kind, fmt(med), fmt(mean), nf])
        with open(paths["rates"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RATE_COLUMNS)
            for lam, kind, slope, icpt, r2 in self.rates():
                w.writerow([fmt(lam), kind, fmt(slope), fmt(icpt), fmt(r2)])
        meta = {
            "config": asdict(self.config),
            "failures": [asdict(f) for f in self.failures],
            "eval_points": self.eval_points.tolist(),
        }
        paths["meta"] = out / "meta.json"
        with open(paths["meta"], "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return paths


def bandwidth_schedule(n: int, m: int, c: float) -> float:
    """``c (ln n / n)^(1/(m+4))``."""
    if n < 2:
        raise ValueError("schedule needs n >= 2")
    if not c > 0:
        raise ValueError("schedule constant must be positive")
    return c * (math.log(n) / n) ** (1.0 / (m + 4))


def boundary_mask(model: mf.ManifoldModel, h: float, beta: float, points, support_radius: float = 1.0):
    """True where the point is farther than ``beta * h * R_k`` from the boundary."""
    return np.asarray(model.boundary_distance(np.atleast_2d(points))) > beta * h * support_radius


def eval_grid(model: mf.ManifoldModel) -> np.ndarray:
    """Fixed interior evaluation points for the built-in models."""
    if model.name == "box2_uniform":
        g = np.linspace(-1.5, 1.5, 5)
    elif model.name == "gauss2":
        g = np.linspace(-1.0, 1.0, 5)
    elif model.geometry == "sphere":
        th = np.array([math.pi / 4, math.pi / 2, 3 * math.pi / 4])
        ph = 2 * math.pi * np.arange(8) / 8
        T, P = np.meshgrid(th, ph, indexing="ij")
        return np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    else:
        raise ValueError(f"no evaluation grid for model {model.name!r}")
    X, Y = np.meshgrid(g, g, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=-1)


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "0") or 0)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _rel(err: float, ref: float) -> float:
    return err / abs(ref) if ref != 0 else (0.0 if err == 0 else math.inf)


def _run_cell(cfg: ExperimentConfig, seed: int, n: int, eval_pts: np.ndarray, limits: dict):
    model = mf.get_model(cfg.model)
    kernel = get_kernel(cfg.kernel)
    f = get_function(cfg.function)
    m = model.intrinsic_dim
    # independent stream per (seed, n)
    pts = mf.sample(model, n, [int(seed), int(n)])
    f_samples = f(pts)
    rows, failures = [], []
    if cfg.eval_rule == "sample":
        local_eval = pts[: min(cfg.eval_count, n)]
    else:
        local_eval = eval_pts
    f_eval = f(local_eval)
    for h in cfg.bandwidths(n, m):
        mask = boundary_mask(model, h, cfg.boundary_margin_factor, local_eval, kernel.support_radius)
        for lam in cfg.lambdas:
            lam = float(lam)
            try:
                g = build_graph(pts, kernel, h, lam, m)
                cell_rows = []
                for kind in cfg.kinds:
                    for pid in np.flatnonzero(mask):
                        x = local_eval[pid]
                        est = apply_laplacian(g, kind, x, f_samples, f_eval[pid])
                        lim = limits[(lam, kind)](x) if cfg.eval_rule == "sample" else limits[(lam, kind, int(pid))]
                        err = abs(est - lim)
                        cell_rows.append(ReportRow(int(seed), int(n), float(h), lam, kind, int(pid),
                                                   float(est), float(lim), err, _rel(err, lim)))
                rows.extend(cell_rows)
            except (IsolatedVertexError, EmptyNeighborhoodError) as exc:
                failures.append(CellFailure(int(seed), int(n), float(h), lam, str(exc)))
    return rows, failures


def run_convergence(cfg: ExperimentConfig, workers: Optional[int] = None) -> ConvergenceReport:
    model = mf.get_model(cfg.model)
    kernel = get_kernel(cfg.kernel)
    f = get_function(cfg.function)
    mom = kernel_moments(kernel, model.intrinsic_dim)
    specs = {float(lam): LimitSpec(lam=float(lam), moments=mom, model=model) for lam in cfg.lambdas}

    limits: dict = {}
    if cfg.eval_rule == "grid":
        eval_pts = eval_grid(model)
        for lam, spec in specs.items():
            for kind in cfg.kinds:
                for pid, x in enumerate(eval_pts):
                    limits[(lam, kind, pid)] = limit_at(spec, kind, f, x)
    else:
        eval_pts = np.empty((0, model.ambient_dim))
        for lam, spec in specs.items():
            for kind in cfg.kinds:
                limits[(lam, kind)] = (lambda s, k: lambda x: limit_at(s, k, f, x))(spec, kind)

    cells = [(int(seed), int(n)) for seed in cfg.seeds for n in cfg.ns]
    nw = min(resolve_workers(workers), len(cells))
    if nw <= 1:
        results = [_run_cell(cfg, s, n, eval_pts, limits) for s, n in cells]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(lambda c: _run_cell(cfg, c[0], c[1], eval_pts, limits), cells))
    rows = sorted((r for res in results for r in res[0]), key=ReportRow.key)
    failures = sorted((fl for res in results for fl in res[1]),
                      key=lambda fl: (fl.seed, fl.n, fl.h, fl.lam))
    return ConvergenceReport(config=cfg, rows=rows, failures=failures, eval_points=eval_pts)


def estimate_rate(report, lam: float, kind: str, seed: Optional[int] = None) -> Tuple[float, float, float]:
    """Least-squares fit of ``ln(median abs_err)`` against ``ln n``.

    ``report`` is a :class:`ConvergenceReport` or a mapping ``{n: median_err}``.
    Returns ``(slope, intercept, r2)``.
    """
    if isinstance(report, ConvergenceReport):
        by_n: Dict[int, List[float]] = {}
        for r in report.select(lam=lam, kind=kind, seed=seed):
            by_n.setdefault(r.n, []).append(r.abs_err)
        med = {n: float(np.median(v)) for n, v in by_n.items() if v}
    else:
        med = {int(n): float(e) for n, e in dict(report).items()}
    med = {n: e for n, e in med.items() if e > 0 and math.isfinite(e)}
    if len(med) < 3:
        raise ValueError("need at least three sample sizes with successful cells")
    ns = sorted(med)
    x = np.log(np.array(ns, dtype=float))
    y = np.log(np.array([med[n] for n in ns]))
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
