from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from glsm.geometry_engine import AmbientManifold, Immersion
from glsm.golden_structure import ProductStructure, golden_from_product
from glsm.lightlike_bundles import decompose


def rref_nullspace(rows):
    """Exact nullspace of an integer/Fraction matrix by Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in rows]
    n_rows, n_cols = len(a), len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        lead = a[r][c]
        a[r] = [x / lead for x in a[r]]
        for i in range(n_rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][f]
        basis.append(v)
    return basis


def exact_rank(rows) -> int:
    cols = len(rows[0]) if rows else 0
    return cols - len(rref_nullspace(rows))


def metric_split(p: int, q: int) -> np.ndarray:
    return np.diag([1.0] * p + [-1.0] * q)


def random_involution(rng, n: int, scale: float = 0.5, p: int | None = None):
    """Seeded metric-self-adjoint involution ``F = L D L^-1`` with ``L`` a metric isometry.

    The generator is scaled by 1/sqrt(n) so boosts stay moderate; residuals are
    absolute and a boost of norm 1e3 loses 1e-10 to rounding alone.
    """
    if p is None:
        p = int(rng.integers(0, n + 1))
    G = metric_split(p, n - p)
    a = rng.standard_normal((n, n))
    lam = expm(scale / np.sqrt(n) * G @ (a - a.T))
    fp = int(rng.integers(0, n + 1))
    D = metric_split(fp, n - fp)
    F = lam @ D @ (G @ lam.T @ G)
    return G, ProductStructure(F)


def one_lightlike_instance(rng, n: int):
    """Golden ambient of dim ``n`` and a linear submanifold with a rank-1 radical, decomposed at 0."""
    G, f = random_involution(rng, n, p=int(rng.integers(1, n)))
    amb = AmbientManifold(G, golden_from_product(f))
    p = int(np.sum(np.diag(G) > 0))
    a, b = rng.standard_normal(p), rng.standard_normal(n - p)
    xi = np.concatenate([a / np.linalg.norm(a), b / np.linalg.norm(b)])
    m = int(rng.integers(1, n))
    # the rest of the tangent space is a random subspace of xi^perp
    perp = np.linalg.svd((G @ xi)[None, :])[2][1:].T
    cols = [xi] + [perp @ rng.standard_normal(n - 1) for _ in range(m - 1)]
    imm = Immersion.linear(np.column_stack(cols))
    return amb, decompose(amb, imm, np.zeros(m))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
