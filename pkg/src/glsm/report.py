"""Sampling, per-point analysis, verdict aggregation and report emission."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import __version__
from .config import RunConfig
from .errors import GLSMError
from .gauss_weingarten import LocalFrame, compute_gw, identity_residuals, metric_defect, reconstruction_residual
from .golden_structure import verify_golden
from .lightlike_bundles import classify, decompose, decomposition_residuals
from .search import worker_count
from .theorem_verifiers import (
    FAMILIES,
    FAULTS,
    Fault,
    TheoremVerdict,
    build_context,
    classify_golden_submanifold,
    required_class,
    seeded_fields,
    verify,
)

N_PAIRS = 8
SAMPLE_MARGIN = 0.05  # fraction of each axis kept clear of the domain boundary
STATUSES = ("pass", "fail", "indeterminate", "vacuous", "not_applicable")


@dataclass
class Report:
    config: dict
    points: list[dict]
    theorems: list[dict]
    axioms: dict
    meta: dict
    wall_time: float = 0.0
    verdicts: list[TheoremVerdict] = field(default_factory=list, repr=False)

    @property
    def equivalent(self) -> bool:
        return all(t["fail"] == 0 for t in self.theorems)

    @property
    def exit_code(self) -> int:
        return 0 if self.equivalent else 1


def sample_points(cfg: RunConfig) -> np.ndarray:
    n, m = cfg.n_points, cfg.chart_dim
    if n == 0:
        return np.zeros((0, m))
    lo = np.array([a for a, _ in cfg.domain])
    hi = np.array([b for _, b in cfg.domain])
    pad = SAMPLE_MARGIN * (hi - lo)
    lo, hi = lo + pad, hi - pad
    if cfg.strategy == "low-discrepancy":
        unit = qmc.Halton(d=m, scramble=True, seed=cfg.seed).random(n)
    else:
        k = max(1, math.ceil(n ** (1.0 / m) - 1e-9))
        axis = (np.arange(k) + 0.5) / k
        grid = np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1).reshape(-1, m)
        idx = np.unique(np.round(np.linspace(0, len(grid) - 1, n)).astype(int))
        unit = grid[idx]
    return lo + unit * (hi - lo)


def _not_applicable(tid, index, note):
    return [TheoremVerdict(tid, index, k, None, None, 0.0, 0.0, "not_applicable", (note,)) for k in range(N_PAIRS)]


def _field_seed(cfg: RunConfig, index: int) -> int:
    return cfg.seed * 1009 + index


def analyze_point(cfg: RunConfig, amb, imm, u, index: int) -> tuple[dict, list[TheoremVerdict]]:
    """Decompose, classify, extract Gauss-Weingarten data and run the selected verifiers at one point."""
    row: dict = {"index": index, "u": [float(x) for x in u]}
    try:
        d = decompose(amb, imm, u, cfg.seed, cfg.screen_strategy, cfg.tau_rank, cfg.tau_eq)
        cls = classify(d)
        row.update(x=[float(v) for v in d.x], **{"class": str(cls)}, r=d.r, m=d.m, k=d.k)
        row["decomposition_residual"] = max(decomposition_residuals(d).values())
        frame = LocalFrame(amb, imm, d, cfg.h_fd)
        gw = compute_gw(frame)
        row["identities"] = identity_residuals(gw)
        fields = seeded_fields(d.m, _field_seed(cfg, index), d.u, N_PAIRS)
        recon, defect = 0.0, 0.0
        for k in range(N_PAIRS):
            W, U, V = fields[k], fields[(k + 1) % N_PAIRS], fields[(k + 2) % N_PAIRS]
            recon = max(recon, reconstruction_residual(frame, gw, W, U))
            lhs, rhs = metric_defect(frame, W, U, V, gw)
            defect = max(defect, abs(lhs - rhs))
        row["reconstruction"] = recon
        row["metric_defect"] = defect
        verdicts: list[TheoremVerdict] = []
        if amb.golden is None:
            row["golden_class"] = None
            for tid in cfg.theorems:
                verdicts += _not_applicable(tid, index, "no golden structure in the ambient")
            return row, verdicts
        gc = classify_golden_submanifold(d, amb.golden, cfg.tau_eq)
        row["golden_class"] = gc.tag
        row["golden_residual_rt"] = gc.residual_rt
        row["golden_residual_t"] = gc.residual_t
        row["golden_notes"] = list(gc.notes)
        ctx = build_context(frame, amb.golden, index, _field_seed(cfg, index), cfg.tau_eq, gw=gw)
        for tid in cfg.theorems:
            verdicts += verify(ctx, tid, gc, N_PAIRS, cfg.assume_class)
        return row, verdicts
    except GLSMError as e:
        row["error"] = f"{type(e).__name__}: {e}"
        return row, []


def _summary(values) -> dict:
    vals = [float(v) for v in values]
    if not vals:
        return {"max": 0.0, "median": 0.0}
    return {"max": max(vals), "median": float(np.median(vals))}


def _table(theorems, verdicts) -> list[dict]:
    rows = []
    for tid in theorems:
        vs = [v for v in verdicts if v.theorem_id == tid]
        counts = {s: sum(v.status == s for v in vs) for s in STATUSES}
        decided = [v for v in vs if v.status in ("pass", "fail", "indeterminate")]
        rows.append(
            {
                "id": tid,
                **counts,
                "max_residual_lhs": max((v.lhs_residual for v in decided), default=0.0),
                "max_residual_rhs": max((v.rhs_residual for v in decided), default=0.0),
            }
        )
    return rows


def run_analysis(cfg: RunConfig) -> Report:
    t0 = time.perf_counter()
    amb, imm = cfg.ambient(), cfg.immersion()
    pts = sample_points(cfg)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda i: analyze_point(cfg, amb, imm, pts[i], i), range(len(pts))))
    points = [r for r, _ in results]
    verdicts = [v for _, vs in results for v in vs]
    ok = [p for p in points if "error" not in p]
    axioms: dict = {
        "decomposition": _summary(p["decomposition_residual"] for p in ok),
        "reconstruction": _summary(p["reconstruction"] for p in ok),
        "metric_defect": _summary(p["metric_defect"] for p in ok),
        "identities": {key: _summary(p["identities"][key] for p in ok) for key in (ok[0]["identities"] if ok else {})},
    }
    if amb.golden is not None:
        axioms["golden"] = verify_golden(amb.golden, amb.form(np.zeros(amb.dim))).as_dict()
    meta = {
        "tool": "glsm",
        "version": __version__,
        "name": cfg.name,
        "provenance": list(cfg.notes),
        "n_pairs": N_PAIRS,
        "errors": sum("error" in p for p in points),
    }
    return Report(
        config=cfg.as_dict(),
        points=points,
        theorems=_table(cfg.theorems, verdicts),
        axioms=axioms,
        meta=meta,
        wall_time=time.perf_counter() - t0,
        verdicts=verdicts,
    )


# emission


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.10g}")  # drop last-bit noise so the bytes are stable
    return x


def report_dict(r: Report) -> dict:
    """The JSON document; wall time is left out so reruns are byte-identical."""
    return _clean({"config": r.config, "points": r.points, "theorems": r.theorems, "axioms": r.axioms, "meta": r.meta})


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.2e}"
    return "" if v is None else str(v)


def emit_report(r: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_dict(r), indent=2, sort_keys=True) + "\n"
    if fmt not in ("md", "markdown"):
        raise ValueError(f"unknown format {fmt!r}")
    doc = report_dict(r)
    out = [f"# glsm report: {doc['meta'].get('name') or 'unnamed'}", ""]
    for note in doc["meta"]["provenance"]:
        out.append(f"- {note}")
    if doc["meta"]["provenance"]:
        out.append("")
    out += ["## Theorems", "", "| id | pass | fail | indeterminate | vacuous | not_applicable | max lhs | max rhs |"]
    out.append("|---|---|---|---|---|---|---|---|")
    for t in doc["theorems"]:
        out.append(
            f"| {t['id']} | {t['pass']} | {t['fail']} | {t['indeterminate']} | {t['vacuous']} | "
            f"{t['not_applicable']} | {_fmt(t['max_residual_lhs'])} | {_fmt(t['max_residual_rhs'])} |"
        )
    out += ["", "## Points", "", "| # | u | class | golden class | decomposition | reconstruction | note |", "|---|---|---|---|---|---|---|"]
    for p in doc["points"]:
        u = ", ".join(f"{x:.4g}" for x in p["u"])
        out.append(
            f"| {p['index']} | ({u}) | {p.get('class', '')} | {_fmt(p.get('golden_class'))} | "
            f"{_fmt(p.get('decomposition_residual'))} | {_fmt(p.get('reconstruction'))} | {p.get('error', '')} |"
        )
    out += ["", "## Residual summary", "", "| quantity | max | median |", "|---|---|---|"]
    ax = doc["axioms"]
    for key in ("decomposition", "reconstruction", "metric_defect"):
        out.append(f"| {key} | {_fmt(ax[key]['max'])} | {_fmt(ax[key]['median'])} |")
    for key, s in ax["identities"].items():
        out.append(f"| {key} | {_fmt(s['max'])} | {_fmt(s['median'])} |")
    if "golden" in ax:
        g = ax["golden"]
        out.append(f"| golden P^2 = P + I | {_fmt(g['r20'])} | |")
        out.append(f"| golden self-adjointness | {_fmt(g['r21'])} | |")
        out.append(f"| golden g(PX, PY) identity | {_fmt(g['r23'])} | |")
    out += ["", f"glsm {doc['meta']['version']}, wall time {r.wall_time:.2f} s", ""]
    return "\n".join(out)


# negative controls


def run_fault_controls(cfg: RunConfig, n_points: int | None = None) -> list[dict]:
    """Every fault of every family at the sampled points; a control works when it breaks an equivalence."""
    amb, imm = cfg.ambient(), cfg.immersion()
    if amb.golden is None:
        raise GLSMError("fault controls need a golden structure")
    pts = sample_points(cfg if n_points is None else cfg.with_overrides(n_points=n_points))

    def per_point(i):
        d = decompose(amb, imm, pts[i], cfg.seed, cfg.screen_strategy, cfg.tau_rank, cfg.tau_eq)
        frame = LocalFrame(amb, imm, d, cfg.h_fd)
        gw = compute_gw(frame)
        gc = classify_golden_submanifold(d, amb.golden, cfg.tau_eq)
        target = cfg.assume_class or gc.tag
        out = {}
        for fam, kinds in FAULTS.items():
            tids = [t for t in FAMILIES[fam] if required_class(t) == target]
            for kind in kinds:
                ctx = build_context(frame, amb.golden, i, _field_seed(cfg, i), cfg.tau_eq, Fault(kind, fam), gw)
                out[(fam, kind)] = [v for t in tids for v in verify(ctx, t, gc, N_PAIRS, cfg.assume_class)]
        return out

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        per = list(pool.map(per_point, range(len(pts))))
    rows = []
    for fam, kinds in FAULTS.items():
        for kind in kinds:
            vs = [v for p in per for v in p[(fam, kind)]]
            counts = {s: sum(v.status == s for v in vs) for s in STATUSES}
            rows.append({"family": fam, "fault": kind, **counts, "broken": counts["fail"] > 0})
    return rows
