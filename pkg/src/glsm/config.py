"""Run configuration: TOML documents describing an ambient space, an immersion and a run plan.

Grammar (all tables optional except ``[ambient]`` and ``[immersion]``)::

    [ambient]
    dim = 3
    metric = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]   # or: signature = [p, q]
                                                  # or: metric_expr = [["1", "0"], ["0", "sin(x1)^2"]]
    golden = [[...]]          # P matrix; or product = [[...]] (F); or product_split = [p, q]

    [immersion]
    chart_dim = 2
    components = ["u1", "u1*cos(u2)", "u1*sin(u2)"]
    domain = [[0.5, 2.0], [-3.0, 3.0]]

    [sampling]   n_points = 16, seed = 42, strategy = "grid" | "low-discrepancy"
    [numeric]    h_fd = 1e-5, tau_rank = 1e-8, tau_eq = 1e-6
    [theorems]   select = "all" | ["s3.thm.metric-connection", ...]
    [screen]     strategy = "golden" | "random"
    [diagnostic] assume_class = "RadicalTransversal" | "Transversal"
    [meta]       name = "...", notes = ["..."]
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, replace

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParseError, ValidationError
from .expression import Expression
from .geometry_engine import AmbientManifold, ConstantMetric, ExpressionMetric, Immersion
from .golden_structure import (
    GoldenStructure,
    ProductStructure,
    golden_from_product,
    product_structure_from_split,
    verify_golden,
)
from .linalg_core import BilinearForm, TAU_EQ, TAU_RANK
from .theorem_verifiers import RADICAL_TRANSVERSAL, THEOREM_IDS, TRANSVERSAL

STRATEGIES = ("grid", "low-discrepancy")
SCREEN_STRATEGIES = ("golden", "random")


@dataclass(frozen=True)
class RunConfig:
    dim: int
    chart_dim: int
    components: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    metric: tuple | None = None  # constant gram, nested tuples
    metric_expr: tuple | None = None
    golden: tuple | None = None  # P matrix, nested tuples
    n_points: int = 16
    seed: int = 42
    strategy: str = "grid"
    h_fd: float = 1e-5
    tau_rank: float = TAU_RANK
    tau_eq: float = TAU_EQ
    theorems: tuple[str, ...] = THEOREM_IDS
    screen_strategy: str = "golden"
    assume_class: str | None = None
    name: str | None = None
    notes: tuple[str, ...] = field(default=())

    def ambient(self) -> AmbientManifold:
        if self.metric_expr is not None:
            metric = ExpressionMetric([list(r) for r in self.metric_expr])
        else:
            metric = ConstantMetric(np.array(self.metric, dtype=float))
        golden = GoldenStructure(np.array(self.golden, dtype=float)) if self.golden is not None else None
        return AmbientManifold(metric, golden)

    def immersion(self) -> Immersion:
        return Immersion(list(self.components), self.chart_dim, self.domain)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "theorems" in kw:
            kw["theorems"] = _expand_theorems(kw["theorems"], [])
        return replace(self, **kw)

    def as_dict(self) -> dict:
        amb: dict = {"dim": self.dim}
        if self.metric_expr is not None:
            amb["metric_expr"] = [list(r) for r in self.metric_expr]
        else:
            amb["metric"] = [list(r) for r in self.metric]
        if self.golden is not None:
            amb["golden"] = [list(r) for r in self.golden]
        doc = {
            "ambient": amb,
            "immersion": {
                "chart_dim": self.chart_dim,
                "components": list(self.components),
                "domain": [list(b) for b in self.domain],
            },
            "sampling": {"n_points": self.n_points, "seed": self.seed, "strategy": self.strategy},
            "numeric": {"h_fd": self.h_fd, "tau_rank": self.tau_rank, "tau_eq": self.tau_eq},
            "theorems": {"select": "all" if tuple(self.theorems) == THEOREM_IDS else list(self.theorems)},
            "screen": {"strategy": self.screen_strategy},
        }
        if self.assume_class:
            doc["diagnostic"] = {"assume_class": self.assume_class}
        if self.name or self.notes:
            doc["meta"] = {k: v for k, v in (("name", self.name), ("notes", list(self.notes))) if v}
        return doc


def to_toml(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.as_dict())


def _line_of(text: str, table: str, key: str | None = None) -> int | None:
    current = None
    header = re.compile(r"\s*\[([^\]]+)\]\s*(#.*)?$")
    for no, line in enumerate(text.splitlines(), 1):
        m = header.match(line)
        if m:
            current = m.group(1).strip()
            if key is None and current == table:
                return no
            continue
        if current == table and key is not None and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return no
    return None


def _where(text, table, key=None) -> str:
    line = _line_of(text, table, key)
    name = f"{table}.{key}" if key else table
    return f"{name} (line {line})" if line else name


def _matrix(value, n, label, diags):
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError):
        diags.append(f"{label} must be a numeric matrix")
        return None
    if a.shape != (n, n):
        diags.append(f"{label} has shape {a.shape}, ambient.dim requires ({n}, {n})")
        return None
    return a


def _expand_theorems(sel, diags, where="theorems.select") -> tuple[str, ...]:
    if sel == "all" or sel is None:
        return THEOREM_IDS
    if isinstance(sel, str):
        sel = [s.strip() for s in sel.split(",") if s.strip()]
    bad = [s for s in sel if s not in THEOREM_IDS]
    if bad:
        diags.append(f"{where}: unknown theorem id(s) {bad}")
        return ()
    return tuple(sel)


def parse_config(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        line = getattr(e, "lineno", None)
        col = getattr(e, "colno", None)
        raise ParseError(str(e).split(" (at line")[0], col, line) from None

    diags: list[str] = []
    amb = doc.get("ambient")
    imm = doc.get("immersion")
    if not isinstance(amb, dict):
        diags.append("missing [ambient] table")
    if not isinstance(imm, dict):
        diags.append("missing [immersion] table")
    if diags:
        raise ValidationError(diags)

    n = amb.get("dim")
    if not isinstance(n, int) or n < 1:
        raise ValidationError([f"{_where(text, 'ambient', 'dim')} must be a positive integer"])

    metric = metric_expr = None
    if "metric" in amb:
        metric = _matrix(amb["metric"], n, _where(text, "ambient", "metric"), diags)
    elif "signature" in amb:
        sig = amb["signature"]
        if not (isinstance(sig, list) and len(sig) == 2 and all(isinstance(x, int) and x >= 0 for x in sig)):
            diags.append(f"{_where(text, 'ambient', 'signature')} must be [p, q] with p, q >= 0")
        elif sum(sig) != n:
            diags.append(f"{_where(text, 'ambient', 'signature')} sums to {sum(sig)} but ambient.dim is {n}")
        else:
            metric = np.diag([1.0] * sig[0] + [-1.0] * sig[1])
    elif "metric_expr" in amb:
        rows = amb["metric_expr"]
        if not (isinstance(rows, list) and len(rows) == n and all(isinstance(r, list) and len(r) == n for r in rows)):
            diags.append(f"{_where(text, 'ambient', 'metric_expr')} must be a {n}x{n} array of strings")
        else:
            line = _line_of(text, "ambient", "metric_expr")
            for r in rows:
                for e in r:
                    try:
                        Expression(str(e), "x")
                    except ParseError as pe:
                        raise ParseError(f"ambient.metric_expr entry {e!r}: {pe.message}", pe.position, line) from None
            metric_expr = tuple(tuple(str(e) for e in r) for r in rows)
    else:
        diags.append(f"{_where(text, 'ambient')} needs one of metric, signature, metric_expr")

    if metric is not None:
        if abs(np.linalg.det(metric)) <= TAU_RANK**n:
            diags.append(f"{_where(text, 'ambient', 'metric')} is degenerate")
        elif np.max(np.abs(metric - metric.T)) > 1e-12:
            diags.append(f"{_where(text, 'ambient', 'metric')} is not symmetric")

    golden = None
    gkeys = [k for k in ("golden", "product", "product_split") if k in amb]
    if len(gkeys) > 1:
        diags.append(f"ambient: give at most one of golden, product, product_split (found {gkeys})")
    elif gkeys:
        key = gkeys[0]
        if metric_expr is not None:
            diags.append(f"{_where(text, 'ambient', key)}: a golden structure needs a constant metric")
        elif key == "product_split":
            sp = amb[key]
            if not (isinstance(sp, list) and len(sp) == 2 and sum(sp) == n):
                diags.append(f"{_where(text, 'ambient', key)} must be [p, q] with p + q = ambient.dim ({n})")
            else:
                golden = golden_from_product(product_structure_from_split(*sp)).p_matrix
        else:
            mat = _matrix(amb[key], n, _where(text, "ambient", key), diags)
            if mat is not None:
                golden = mat if key == "golden" else golden_from_product(ProductStructure(mat)).p_matrix
        if golden is not None and metric is not None:
            rep = verify_golden(GoldenStructure(golden), BilinearForm(metric))
            if not rep.passed:
                diags.append(
                    f"{_where(text, 'ambient', key)} fails the golden axioms against the metric "
                    f"(r20={rep.r20:.2e}, r21={rep.r21:.2e}, r23={rep.r23:.2e})"
                )

    m = imm.get("chart_dim")
    comps = imm.get("components")
    dom = imm.get("domain")
    if not isinstance(m, int) or m < 1:
        diags.append(f"{_where(text, 'immersion', 'chart_dim')} must be a positive integer")
        m = None
    if not isinstance(comps, list) or not all(isinstance(c, (str, int, float)) for c in comps):
        diags.append(f"{_where(text, 'immersion', 'components')} must be a list of expressions")
        comps = None
    elif len(comps) != n:
        diags.append(
            f"{_where(text, 'immersion', 'components')} has {len(comps)} entries but "
            f"{_where(text, 'ambient', 'dim')} is {n}"
        )
    if comps is not None:
        line = _line_of(text, "immersion", "components")
        for c in comps:
            try:
                e = Expression(str(c), "u")
            except ParseError as pe:
                raise ParseError(f"immersion.components entry {str(c)!r}: {pe.message}", pe.position, line) from None
            if m is not None:
                bad = sorted(v for v in e.variables if int(v[1:]) > m)
                if bad:
                    diags.append(f"{_where(text, 'immersion', 'components')}: {c!r} uses {bad} beyond chart_dim {m}")
    domain = None
    if not (isinstance(dom, list) and all(isinstance(b, list) and len(b) == 2 for b in dom)):
        diags.append(f"{_where(text, 'immersion', 'domain')} must be a list of [lo, hi] pairs")
    elif m is not None and len(dom) != m:
        diags.append(f"{_where(text, 'immersion', 'domain')} has {len(dom)} axes but chart_dim is {m}")
    else:
        domain = tuple((float(a), float(b)) for a, b in dom)
        empty = [i + 1 for i, (a, b) in enumerate(domain) if not a < b]
        if empty:
            diags.append(f"{_where(text, 'immersion', 'domain')} is empty along axis {empty}")
    if m is not None and n is not None and m > n:
        diags.append(f"immersion.chart_dim ({m}) exceeds ambient.dim ({n})")

    samp = doc.get("sampling", {})
    n_points = samp.get("n_points", 16)
    seed = samp.get("seed", 42)
    strategy = samp.get("strategy", "grid")
    if not isinstance(n_points, int) or n_points < 0:
        diags.append(f"{_where(text, 'sampling', 'n_points')} must be a non-negative integer")
    if not isinstance(seed, int):
        diags.append(f"{_where(text, 'sampling', 'seed')} must be an integer")
    if strategy not in STRATEGIES:
        diags.append(f"{_where(text, 'sampling', 'strategy')} must be one of {list(STRATEGIES)}")

    num = doc.get("numeric", {})
    vals = {}
    for key, default in (("h_fd", 1e-5), ("tau_rank", TAU_RANK), ("tau_eq", TAU_EQ)):
        v = num.get(key, default)
        if not isinstance(v, (int, float)) or not v > 0:
            diags.append(f"{_where(text, 'numeric', key)} must be a positive number")
        vals[key] = float(v) if isinstance(v, (int, float)) else default

    theorems = _expand_theorems(doc.get("theorems", {}).get("select", "all"), diags, _where(text, "theorems", "select"))
    screen = doc.get("screen", {}).get("strategy", "golden")
    if screen not in SCREEN_STRATEGIES:
        diags.append(f"{_where(text, 'screen', 'strategy')} must be one of {list(SCREEN_STRATEGIES)}")
    assume = doc.get("diagnostic", {}).get("assume_class")
    if assume is not None and assume not in (RADICAL_TRANSVERSAL, TRANSVERSAL):
        diags.append(f"{_where(text, 'diagnostic', 'assume_class')} must be {RADICAL_TRANSVERSAL} or {TRANSVERSAL}")
    meta = doc.get("meta", {})

    if diags:
        raise ValidationError(diags)
    return RunConfig(
        dim=n,
        chart_dim=m,
        components=tuple(str(c) for c in comps),
        domain=domain,
        metric=None if metric is None else tuple(tuple(float(x) for x in r) for r in metric),
        metric_expr=metric_expr,
        golden=None if golden is None else tuple(tuple(float(x) for x in r) for r in golden),
        n_points=n_points,
        seed=seed,
        strategy=strategy,
        h_fd=vals["h_fd"],
        tau_rank=vals["tau_rank"],
        tau_eq=vals["tau_eq"],
        theorems=theorems,
        screen_strategy=screen,
        assume_class=assume,
        name=meta.get("name"),
        notes=tuple(meta.get("notes", ())),
    )
