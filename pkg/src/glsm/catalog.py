"""Built-in examples, each re-verified before it is offered."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .config import RunConfig, parse_config, to_toml
from .golden_structure import SQRT5
from .lightlike_bundles import classify, decompose, decomposition_residuals
from .linalg_core import TAU_EQ
from .search import near_miss
from .theorem_verifiers import NEITHER, RADICAL_TRANSVERSAL, TRANSVERSAL, classify_golden_submanifold


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    config: RunConfig
    geometric_class: str  # expected classify() tag
    golden_class: str | None  # expected golden tag, None without a golden structure
    notes: tuple[str, ...] = ()


def _light_cone() -> str:
    return """
[ambient]
dim = 3
metric = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]

[immersion]
chart_dim = 2
components = ["u1", "u1*cos(u2)", "u1*sin(u2)"]
domain = [[0.5, 2.0], [-3.0, 3.0]]

[meta]
name = "light-cone"
notes = ["future light cone of Minkowski 3-space; radical spanned by the position vector"]
"""


def _conformal_light_cone() -> str:
    return """
[ambient]
dim = 3
metric_expr = [["-exp(x2)", "0", "0"], ["0", "exp(x2)", "0"], ["0", "0", "exp(x2)"]]

[immersion]
chart_dim = 2
components = ["u1", "u1*cos(u2)", "u1*sin(u2)"]
domain = [[0.5, 1.5], [-3.0, 3.0]]

[meta]
name = "conformal-light-cone"
notes = ["the same cone in a conformally flat metric; null directions and hence the radical are unchanged"]
"""


def _null_plane() -> str:
    return """
[ambient]
dim = 4
signature = [2, 2]

[immersion]
chart_dim = 2
components = ["u1", "u2", "u1", "u2"]
domain = [[-1.0, 1.0], [-1.0, 1.0]]

[meta]
name = "null-plane-r22"
notes = ["totally null 2-plane x3 = x1, x4 = x2 in R^4 of signature (2, 2)"]
"""


def _paraboloid() -> str:
    return """
[ambient]
dim = 3
signature = [3, 0]

[immersion]
chart_dim = 2
components = ["u1", "u2", "u1^2 + u2^2"]
domain = [[-1.0, 1.0], [-1.0, 1.0]]

[meta]
name = "paraboloid"
notes = ["Riemannian control: nondegenerate, no radical"]
"""


def _golden_light_cone() -> str:
    p = 0.5 * (np.eye(3) + SQRT5 * np.diag([1.0, -1.0, -1.0]))
    rows = ", ".join("[" + ", ".join(repr(float(x)) for x in row) + "]" for row in p)
    return f"""
[ambient]
dim = 3
metric = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
golden = [{rows}]

[immersion]
chart_dim = 2
components = ["u1", "u1*cos(u2)", "u1*sin(u2)"]
domain = [[0.5, 2.0], [-3.0, 3.0]]

[meta]
name = "golden-light-cone"
notes = ["light cone with the golden structure of F = diag(1, -1, -1); 1-lightlike, so never of either golden class"]
"""


def _proxy(cls: str, name: str) -> RunConfig:
    cfg = near_miss(cls, 8, (4, 4), 2, seed=0, budget=1000)
    return replace(
        cfg,
        name=name,
        assume_class=cls,
        notes=cfg.notes
        + (
            f"closest {cls} candidate found by the search; classified {NEITHER}",
            f"theorem checks run with the {cls} hypothesis assumed (diagnostic.assume_class)",
        ),
    )


_SPECS = (
    ("light-cone", "Minkowski light cone (coisotropic, no golden structure)", "CoIsotropic", None),
    ("conformal-light-cone", "light cone in a curved, conformally flat ambient", "CoIsotropic", None),
    ("null-plane-r22", "totally null plane in R^4_(2,2)", "TotallyLightlike", None),
    ("paraboloid", "Riemannian paraboloid (nondegenerate control)", "NonDegenerate", None),
    ("golden-light-cone", "light cone with a golden structure (1-lightlike obstruction)", "CoIsotropic", NEITHER),
    ("radical-transversal-r2", "closest radical-transversal candidate, r = 2, dim 8", "RLightlike", NEITHER),
    ("transversal-r2", "closest transversal candidate with nontrivial mu, r = 2, dim 8", "RLightlike", NEITHER),
)

_TEXT = {
    "light-cone": _light_cone,
    "conformal-light-cone": _conformal_light_cone,
    "null-plane-r22": _null_plane,
    "paraboloid": _paraboloid,
    "golden-light-cone": _golden_light_cone,
}


class CatalogError(Exception):
    pass


def _build(name: str) -> RunConfig:
    if name in _TEXT:
        return parse_config(_TEXT[name]())
    if name == "radical-transversal-r2":
        return _proxy(RADICAL_TRANSVERSAL, name)
    if name == "transversal-r2":
        return _proxy(TRANSVERSAL, name)
    raise KeyError(name)


def verify_entry(entry: CatalogEntry) -> list[str]:
    """Problems found when re-checking ``entry`` at its chart centre (empty when it holds)."""
    cfg = entry.config
    amb, imm = cfg.ambient(), cfg.immersion()
    u = np.array([0.5 * (a + b) for a, b in cfg.domain])
    d = decompose(amb, imm, u, cfg.seed, cfg.screen_strategy, cfg.tau_rank, cfg.tau_eq)
    problems = []
    tag = classify(d).tag
    if tag != entry.geometric_class:
        problems.append(f"classified {tag}, recorded {entry.geometric_class}")
    worst = max(decomposition_residuals(d).values())
    if worst >= TAU_EQ:
        problems.append(f"decomposition residual {worst:.2e}")
    if entry.golden_class is not None:
        if amb.golden is None:
            problems.append("recorded golden class but no golden structure")
        else:
            gc = classify_golden_submanifold(d, amb.golden, cfg.tau_eq)
            if gc.tag != entry.golden_class:
                problems.append(f"golden class {gc.tag}, recorded {entry.golden_class}")
            elif gc.tag != NEITHER and gc.residual >= TAU_EQ:
                problems.append(f"classification residual {gc.residual:.2e}")
    return problems


@lru_cache(maxsize=None)
def entry(name: str) -> CatalogEntry:
    for n, desc, geo, gold in _SPECS:
        if n == name:
            cfg = _build(n)
            e = CatalogEntry(n, desc, cfg, geo, gold, cfg.notes)
            problems = verify_entry(e)
            if problems:
                raise CatalogError(f"catalog entry {name!r} failed re-verification: {'; '.join(problems)}")
            return e
    raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(names())}")


def names() -> list[str]:
    return [n for n, *_ in _SPECS]


def describe() -> list[tuple[str, str]]:
    return [(n, desc) for n, desc, *_ in _SPECS]


def show(name: str) -> str:
    return to_toml(entry(name).config)
