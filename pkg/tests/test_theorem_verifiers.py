from dataclasses import replace

import numpy as np
import pytest

from conftest import one_lightlike_instance, random_involution
from glsm.catalog import entry
from glsm.errors import ClassMismatch
from glsm.gauss_weingarten import LocalFrame
from glsm.geometry_engine import AmbientManifold, Immersion
from glsm.golden_structure import GoldenStructure, golden_from_product
from glsm.lightlike_bundles import decompose
from glsm.report import run_analysis, run_fault_controls
from glsm.theorem_verifiers import (
    FAMILIES,
    FAULTS,
    NEITHER,
    RADICAL_TRANSVERSAL,
    THEOREM_IDS,
    TRANSVERSAL,
    build_context,
    classify_golden_submanifold,
    pairing_obstruction_check,
    required_class,
    side_state,
    verify_integrability,
)


def test_side_state_bands():
    assert side_state(4.9e-6, 1e-6) is True
    assert side_state(5.1e-5, 1e-6) is False
    assert side_state(2e-5, 1e-6) is None


def test_theorem_bookkeeping():
    assert len(THEOREM_IDS) == 15
    assert sorted(t for ts in FAMILIES.values() for t in ts) == sorted(
        t for t in THEOREM_IDS if "no-1-lightlike" not in t
    )
    assert all(len(k) == 3 for k in FAULTS.values())
    assert required_class("s3.thm.screen-integrable") == RADICAL_TRANSVERSAL
    assert required_class("s4.prop.mu-invariant") == TRANSVERSAL
    assert required_class("s4.prop.no-1-lightlike") is None


def test_nondegenerate_surface_is_neither():
    rng = np.random.default_rng(2)
    G, f = random_involution(rng, 3, p=3)
    amb = AmbientManifold(G, golden_from_product(f))
    imm = Immersion(["u1", "u2", "u1^2 + u2^2"], 2, [(-1, 1), (-1, 1)])
    gc = classify_golden_submanifold(decompose(amb, imm, [0.1, 0.2]), amb.golden)
    assert gc.tag == NEITHER
    assert any("nondegenerate" in n for n in gc.notes)


def test_one_lightlike_candidates_are_neither_with_obstruction(rng):
    for n in (3, 4, 5, 6):
        amb, d = one_lightlike_instance(rng, n)
        gc = classify_golden_submanifold(d, amb.golden)
        ob = pairing_obstruction_check(d, amb.golden)
        assert d.r == 1 and gc.tag == NEITHER
        assert ob.explains()
        assert abs(ob.forced[0, 0]) < 1e-12
        assert any("pairing obstruction" in note for note in gc.notes)


def test_random_non_golden_operator_has_no_forced_zero(rng):
    amb, d = one_lightlike_instance(rng, 5)
    fake = GoldenStructure(rng.standard_normal((5, 5)))
    ob = pairing_obstruction_check(d, fake)
    assert not ob.explains()
    assert classify_golden_submanifold(d, fake).tag == NEITHER


def test_r2_proxy_pairing_matrix_is_hollow():
    cfg = entry("radical-transversal-r2").config
    amb, imm = cfg.ambient(), cfg.immersion()
    d = decompose(amb, imm, [0.5 * (a + b) for a, b in cfg.domain], cfg.seed)
    ob = pairing_obstruction_check(d, amb.golden)
    assert ob.pairing.shape == (2, 2)
    assert ob.identity_residual < 1e-12
    # null xi and P^2 = P + I force the diagonal of g(P xi_i, P xi_i) - g(P xi_i, xi_i) to vanish
    assert np.max(np.abs(np.diag(ob.forced))) < 1e-12


def test_theorems_not_applicable_without_golden_structure():
    rep = run_analysis(entry("light-cone").config.with_overrides(n_points=4))
    assert all(t["not_applicable"] == 4 * 8 for t in rep.theorems)
    assert {p["class"] for p in rep.points} == {"CoIsotropic"}
    assert rep.exit_code == 0


def test_golden_cone_one_lightlike_propositions_hold():
    rep = run_analysis(entry("golden-light-cone").config.with_overrides(n_points=4))
    rows = {t["id"]: t for t in rep.theorems}
    for tid in ("s3.prop.no-1-lightlike", "s4.prop.no-1-lightlike"):
        assert rows[tid]["pass"] == 32 and rows[tid]["fail"] == 0
    assert rows["s3.thm.screen-integrable"]["not_applicable"] == 32


def test_rank_one_distributions_are_vacuous():
    cfg = replace(entry("golden-light-cone").config, assume_class=RADICAL_TRANSVERSAL)
    amb, imm = cfg.ambient(), cfg.immersion()
    d = decompose(amb, imm, [1.25, 0.3])
    ctx = build_context(LocalFrame(amb, imm, d), amb.golden)
    gc = classify_golden_submanifold(d, amb.golden)
    vs = verify_integrability(ctx, gc, 8, RADICAL_TRANSVERSAL)
    assert vs and all(v.status == "vacuous" for v in vs)
    assert all("rank" in v.notes[0] for v in vs)


def test_family_needs_a_matching_class():
    cfg = entry("golden-light-cone").config
    amb, imm = cfg.ambient(), cfg.immersion()
    d = decompose(amb, imm, [1.25, 0.3])
    ctx = build_context(LocalFrame(amb, imm, d), amb.golden)
    with pytest.raises(ClassMismatch):
        verify_integrability(ctx, classify_golden_submanifold(d, amb.golden))


@pytest.mark.parametrize("name, prefix", [("radical-transversal-r2", "s3"), ("transversal-r2", "s4")])
def test_proxy_biconditionals_agree(name, prefix):
    rep = run_analysis(entry(name).config.with_overrides(n_points=4))
    for t in rep.theorems:
        if t["id"].startswith(prefix) and "no-1-lightlike" not in t["id"]:
            assert t["fail"] == 0 and t["indeterminate"] == 0, t
            assert t["pass"] + t["vacuous"] == 32, t
        elif "no-1-lightlike" in t["id"]:
            assert t["vacuous"] == 32
        else:
            assert t["not_applicable"] == 32


@pytest.mark.parametrize("name", ["radical-transversal-r2", "transversal-r2"])
def test_fault_controls_break_equivalence(name):
    rows = run_fault_controls(entry(name).config, n_points=4)
    assert len(rows) == 15
    for row in rows:
        assert row["broken"], row
