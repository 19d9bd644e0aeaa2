import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rref_nullspace
from glsm.geometry_engine import AmbientManifold, Immersion
from glsm.golden_structure import golden_from_product, product_structure_from_split
from glsm.lightlike_bundles import classify, decompose, decomposition_residuals, extend, project
from glsm.linalg_core import Subspace, subspace_distance

MINKOWSKI3 = AmbientManifold(np.diag([-1.0, 1.0, 1.0]))
CONE = Immersion(["u1", "u1*cos(u2)", "u1*sin(u2)"], 2, [(0.5, 2.0), (-3.0, 3.0)])
SPLIT4 = AmbientManifold(np.diag([1.0, 1.0, -1.0, -1.0]))
NULL_PLANE = Immersion(["u1", "u2", "u1", "u2"], 2, [(-1.0, 1.0), (-1.0, 1.0)])


def _ok(d, tol=1e-10):
    res = decomposition_residuals(d)
    assert max(res.values()) < tol, res


def test_light_cone_decomposition():
    d = decompose(MINKOWSKI3, CONE, [1.0, 0.0])
    assert (d.r, d.m, d.k) == (1, 2, 1)
    assert (d.screen.rank, d.screen_perp.rank, d.ltr.rank) == (1, 0, 1)
    # radical is the position direction (1, 1, 0)
    assert subspace_distance(d.rad, Subspace(np.array([[1.0], [1.0], [0.0]]))) < 1e-10
    _ok(d)
    assert str(classify(d)) == "CoIsotropic"


def test_euclidean_graph_is_nondegenerate():
    imm = Immersion(["u1", "u2", "u1^2 + u2^2"], 2, [(-1.0, 1.0), (-1.0, 1.0)])
    d = decompose(AmbientManifold(np.eye(3)), imm, [0.3, -0.2])
    assert d.r == 0 and classify(d).tag == "NonDegenerate"
    _ok(d)


def test_null_plane_decomposition_against_exact_solve():
    d = decompose(SPLIT4, NULL_PLANE, [0.1, 0.2])
    assert (d.r, d.m, d.k) == (2, 2, 2)
    assert d.screen.rank == 0 and d.screen_perp.rank == 0 and d.ltr.rank == 2
    assert classify(d).tag == "TotallyLightlike"
    _ok(d)
    # exact oracle: vectors g-orthogonal to both spanning vectors (1,0,1,0), (0,1,0,1)
    perp = rref_nullspace([[1, 0, -1, 0], [0, 1, 0, -1]])
    want = Subspace(np.array([[float(x) for x in v] for v in perp]).T)
    assert subspace_distance(d.rad, want) < 1e-10


def test_classify_cases():
    plane = decompose(SPLIT4, NULL_PLANE, [0.0, 0.0])
    assert classify(plane, 2, 2).tag == "TotallyLightlike"
    cone = decompose(MINKOWSKI3, CONE, [1.0, 0.5])
    assert classify(cone, 2, 1).tag == "CoIsotropic"
    # null 3-plane in Minkowski R^5: r=1 < min(m=3, k=2)
    a = np.array([[1.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
    d = decompose(AmbientManifold(np.diag([-1.0, 1, 1, 1, 1])), Immersion.linear(a, [(-1, 1)] * 3), [0, 0, 0])
    assert classify(d).tag == "RLightlike" and str(classify(d)) == "RLightlike(1)"
    _ok(d)
    # null line in Minkowski R^3: r=m=1 < k=2
    line = decompose(MINKOWSKI3, Immersion.linear(np.array([[1.0], [1.0], [0.0]]), [(-1, 1)]), [0.0])
    assert classify(line).tag == "Isotropic"
    _ok(line)


def test_project_examples():
    a = np.array([[1.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
    d = decompose(AmbientManifold(np.diag([-1.0, 1, 1, 1, 1])), Immersion.linear(a, [(-1, 1)] * 3), [0, 0, 0])
    s = d.slices()
    scr = d.frame[:, s["screen"]][:, 0]
    tan, ltr, sp = project(d, d.form, scr)
    assert np.allclose(tan, scr, atol=1e-12) and np.allclose(ltr, 0, atol=1e-12) and np.allclose(sp, 0, atol=1e-12)
    n1 = d.frame[:, s["ltr"]][:, 0]
    tan, ltr, sp = project(d, d.form, n1)
    assert np.allclose(tan, 0, atol=1e-12) and np.allclose(ltr, n1, atol=1e-12)
    xi = d.frame[:, s["rad"]][:, 0]
    z = d.frame[:, s["sperp"]] @ np.array([-1.2])
    tan, ltr, sp = project(d, d.form, xi + n1 + z)
    assert np.max(np.abs(tan - xi)) < 1e-10
    assert np.max(np.abs(ltr - n1)) < 1e-10
    assert np.max(np.abs(sp - z)) < 1e-10


def test_golden_screens_on_golden_cone():
    p = golden_from_product(product_structure_from_split(1, 2))
    amb = AmbientManifold(np.diag([-1.0, 1.0, 1.0]), p)
    d = decompose(amb, CONE, [1.0, 0.3])
    _ok(d)
    assert d.mu is not None and d.mu.rank == 0  # screen_perp is empty


def test_extend_matches_center_and_varies_smoothly():
    d0 = decompose(MINKOWSKI3, CONE, [1.0, 0.2])
    same = extend(d0, MINKOWSKI3, CONE, [1.0, 0.2])
    assert np.allclose(same.frame, d0.frame, atol=1e-12)
    near = extend(d0, MINKOWSKI3, CONE, [1.0 + 1e-5, 0.2 + 1e-5])
    assert np.max(np.abs(near.frame - d0.frame)) < 1e-4
    _ok(near)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.6, 1.9), st.floats(-2.9, 2.9))
def test_decomposition_invariants_for_any_seed(seed, s, t):
    d = decompose(MINKOWSKI3, CONE, [s, t], seed=seed, screen_strategy="random")
    _ok(d, 1e-9)
    assert d.r + d.screen.rank + d.ltr.rank + d.screen_perp.rank == d.n
