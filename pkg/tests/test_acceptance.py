"""Acceptance suite: one test per criterion, tolerances and budgets pinned below."""

import functools
import os
import subprocess
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import exact_rank, one_lightlike_instance, random_involution, rref_nullspace
from glsm.catalog import entry, names
from glsm.errors import NotFound
from glsm.gauss_weingarten import screen_independence
from glsm.golden_structure import (
    PHI,
    PHI_CONJ,
    ProductStructure,
    golden_from_product,
    product_from_golden,
    verify_golden,
)
from glsm.lightlike_bundles import decompose
from glsm.linalg_core import TAU_EQ, BilinearForm, Subspace, radical, subspace_distance
from glsm.report import run_analysis, run_fault_controls, sample_points
from glsm.search import search_example
from glsm.theorem_verifiers import (
    NEITHER,
    RADICAL_TRANSVERSAL,
    TRANSVERSAL,
    classify_golden_submanifold,
    pairing_obstruction_check,
)

GOLDEN_TOL = 1e-10
EIGEN_TOL = 1e-9
ROUND_TRIP_TOL = 1e-12
TYPO_R20_MIN = 0.5
RADICAL_TOL = 1e-10
H_FD = 1e-5
FD_BUDGET = 100 * H_FD**2  # central-difference truncation allowance for reconstruction
RECON_TOL = 1e-10 + FD_BUDGET
IDENTITY_TOL = 5 * TAU_EQ
SCREEN_TOL = 2 * TAU_EQ
SEARCH_BUDGET = 100_000
REVERIFY_TOL = 1e-8
SCREEN_SEEDS = (0, 1, 2, 3, 4)
IDENTITY_KEYS = ("hs_shape_Z", "ds_shape_Z", "hl_shape_star", "hstar_shape_N", "hl_radical_skew", "shape_star_radical")


def _within(seconds, t0):
    elapsed = time.perf_counter() - t0
    assert elapsed < seconds, f"runtime {elapsed:.2f} s exceeds {seconds} s"


def test_criterion_1_golden_axiom_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    dims = set()
    for i in range(100):
        n = 2 + i % 7
        dims.add(n)
        G, f = random_involution(rng, n)
        assert np.max(np.abs(f.f_matrix @ f.f_matrix - np.eye(n))) < 1e-12
        g = golden_from_product(f)
        rep = verify_golden(g, BilinearForm(G), GOLDEN_TOL)
        assert max(rep.r20, rep.r21, rep.r23) <= GOLDEN_TOL, rep.as_dict()
        lam = np.linalg.eigvals(g.p_matrix)
        assert np.all(np.minimum(np.abs(lam - PHI), np.abs(lam - PHI_CONJ)) < EIGEN_TOL)
        assert np.max(np.abs(product_from_golden(g).f_matrix - f.f_matrix)) < ROUND_TRIP_TOL
        assert np.max(np.abs(golden_from_product(product_from_golden(g)).p_matrix - g.p_matrix)) < ROUND_TRIP_TOL
    assert dims == set(range(2, 9))
    _within(1.0, t0)


def test_criterion_2_sqrt2_coefficient_regression():
    f = ProductStructure(np.diag([1.0, -1.0]))
    rep = verify_golden(golden_from_product(f, coefficient=1 / np.sqrt(2)), BilinearForm(np.eye(2)))
    assert rep.r20 > TYPO_R20_MIN
    assert not rep.passed


def test_criterion_3_radical_against_rational_elimination():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    nontrivial = 0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        a = rng.integers(-2, 3, size=(int(rng.integers(1, n + 1)), n))
        g = a.T @ np.diag(rng.choice([-1, 1], size=a.shape[0])) @ a
        b = rng.integers(-2, 3, size=(n, k))
        while exact_rank(b.T.tolist()) < k:
            b = rng.integers(-2, 3, size=(n, k))
        exact = rref_nullspace((b.T @ g @ b).tolist())
        got = radical(BilinearForm(g.astype(float)), Subspace(b.astype(float)))
        assert got.rank == len(exact)
        if exact:
            want = Subspace(b @ np.array([[float(x) for x in v] for v in exact]).T)
            assert subspace_distance(got, want) < RADICAL_TOL
            nontrivial += 1
    assert nontrivial > 0
    _within(1.0, t0)


def test_criterion_4_gauss_weingarten_reconstruction():
    t0 = time.perf_counter()
    for name in names():
        cfg = replace(entry(name).config, theorems=())
        assert cfg.n_points == 16 and cfg.h_fd == H_FD
        rep = run_analysis(cfg)
        assert rep.meta["errors"] == 0 and rep.meta["n_pairs"] == 8
        ax = rep.axioms
        assert ax["reconstruction"]["max"] < RECON_TOL, (name, ax["reconstruction"])
        for key in IDENTITY_KEYS:
            assert ax["identities"][key]["max"] < IDENTITY_TOL, (name, key, ax["identities"][key])
        assert ax["metric_defect"]["max"] < IDENTITY_TOL, (name, ax["metric_defect"])
    _within(10.0, t0)


def test_criterion_5_screen_independence():
    t0 = time.perf_counter()
    for name in ("light-cone", "null-plane-r22"):
        cfg = entry(name).config
        amb, imm = cfg.ambient(), cfg.immersion()
        for u in sample_points(cfg):
            si = screen_independence(amb, imm, u, SCREEN_SEEDS, cfg.h_fd)
            assert si.invariant < SCREEN_TOL, (name, u, si)
    _within(5.0, t0)


def test_criterion_6_one_lightlike_impossibility():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    for i in range(200):
        amb, d = one_lightlike_instance(rng, 3 + i % 4)
        assert d.r == 1
        assert classify_golden_submanifold(d, amb.golden).tag == NEITHER
        ob = pairing_obstruction_check(d, amb.golden)
        assert ob.explains(), ob
    _within(5.0, t0)


@functools.lru_cache(maxsize=None)
def _oracle(cls):
    """Search outcome for ``cls``: (config or None, NotFound note, best residual, seconds)."""
    t0 = time.perf_counter()
    try:
        cfg = search_example(cls, 8, (4, 4), 2, seed=0, budget=SEARCH_BUDGET)
        return cfg, "", 0.0, time.perf_counter() - t0
    except NotFound as e:
        return None, e.note, e.best_residual, time.perf_counter() - t0


def test_criterion_7_search_oracle_instances():
    missing = []
    elapsed = 0.0
    for cls in (RADICAL_TRANSVERSAL, TRANSVERSAL):
        cfg, note, best, secs = _oracle(cls)
        elapsed += secs
        if cfg is None:
            missing.append(f"{cls}: best residual {best:.3e} ({note})")
            continue
        again = search_example(cls, 8, (4, 4), 2, seed=0, budget=SEARCH_BUDGET)
        assert again == cfg
        amb, imm = cfg.ambient(), cfg.immersion()
        d = decompose(amb, imm, np.zeros(cfg.chart_dim), cfg.seed)
        gc = classify_golden_submanifold(d, amb.golden, REVERIFY_TOL)
        assert gc.tag == cls and gc.residual < REVERIFY_TOL
        if cls == TRANSVERSAL:
            assert d.mu.rank >= 1
    if missing:
        pytest.fail("no instance within budget; " + "; ".join(missing))
    assert elapsed < 60.0


def test_criterion_8_theorem_biconditionals():
    t0 = time.perf_counter()
    missing = [cls for cls in (RADICAL_TRANSVERSAL, TRANSVERSAL) if _oracle(cls)[0] is None]
    if missing:
        # evidence gathered on the closest candidates with the class hypothesis assumed
        evidence = []
        for name in ("radical-transversal-r2", "transversal-r2"):
            cfg = entry(name).config
            rep = run_analysis(cfg)
            bad = sum(t["fail"] + t["indeterminate"] for t in rep.theorems)
            broken = sum(row["broken"] for row in run_fault_controls(cfg))
            evidence.append(f"{name}: {bad} disagreements, {broken}/15 fault controls broken")
        pytest.fail(f"oracle instances unavailable for {', '.join(missing)}; proxies: " + "; ".join(evidence))
    for cls, prefix in ((RADICAL_TRANSVERSAL, "s3"), (TRANSVERSAL, "s4")):
        cfg = _oracle(cls)[0]
        rep = run_analysis(cfg)
        for t in rep.theorems:
            if t["id"].startswith(prefix):
                assert t["fail"] == 0 and t["indeterminate"] == 0, t
        rows = run_fault_controls(cfg)
        assert all(row["broken"] for row in rows), rows
    _within(120.0, t0)


def test_criterion_9_analyze_is_byte_deterministic(tmp_path):
    t0 = time.perf_counter()
    outs = []
    for i, threads in enumerate(("1", "4")):
        out = tmp_path / f"run{i}.json"
        env = dict(os.environ, GLSM_THREADS=threads)
        cmd = [sys.executable, "-m", "glsm.cli", "analyze", "--catalog", "golden-light-cone", "--seed", "5", "--out", str(out)]
        res = subprocess.run(cmd, env=env, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    _within(5.0, t0)
