"""Golden structures P with P^2 = P + I and their almost-product partners F with F^2 = I.

The two are related affinely: ``P = (I + sqrt5 F) / 2`` and ``F = (2P - I) / sqrt5``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg_core import BilinearForm, Subspace, TAU_LIN

SQRT5 = np.sqrt(5.0)
PHI = (1.0 + SQRT5) / 2.0
PHI_CONJ = 1.0 - PHI  # the other root of x^2 = x + 1


@dataclass(frozen=True, init=False)
class GoldenStructure:
    p_matrix: np.ndarray

    def __init__(self, p_matrix):
        p = np.atleast_2d(np.array(p_matrix, dtype=float))
        if p.shape[0] != p.shape[1]:
            raise DimensionMismatch(f"golden structure must be square, got {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "p_matrix", p)

    @property
    def dim(self) -> int:
        return self.p_matrix.shape[0]

    def __call__(self, v):
        return self.p_matrix @ np.asarray(v)


@dataclass(frozen=True, init=False)
class ProductStructure:
    f_matrix: np.ndarray

    def __init__(self, f_matrix):
        f = np.atleast_2d(np.array(f_matrix, dtype=float))
        if f.shape[0] != f.shape[1]:
            raise DimensionMismatch(f"product structure must be square, got {f.shape}")
        f.setflags(write=False)
        object.__setattr__(self, "f_matrix", f)

    @property
    def dim(self) -> int:
        return self.f_matrix.shape[0]


@dataclass(frozen=True)
class AxiomReport:
    r20: float  # ||P^2 - P - I||
    r21: float  # ||G P - P^T G||
    r23: float  # ||P^T G P - G P - G||
    bound23: float
    tol: float = TAU_LIN

    @property
    def passed(self) -> bool:
        return max(self.r20, self.r21, self.r23) <= self.tol

    @property
    def consistent(self) -> bool:
        """r23 never exceeds what r20 and r21 allow (it follows from the other two)."""
        return self.r23 <= self.bound23 + 1e-12

    def as_dict(self) -> dict:
        return {"r20": self.r20, "r21": self.r21, "r23": self.r23, "passed": self.passed}


def product_structure_from_split(p: int, q: int) -> ProductStructure:
    if p < 0 or q < 0 or p + q < 1:
        raise DimensionMismatch(f"need p, q >= 0 and p + q >= 1, got ({p}, {q})")
    return ProductStructure(np.diag([1.0] * p + [-1.0] * q))


def golden_from_product(f: ProductStructure, coefficient: float = 0.5) -> GoldenStructure:
    """``coefficient * (I + sqrt5 F)``; only the default 1/2 gives a golden structure."""
    n = f.dim
    return GoldenStructure(coefficient * (np.eye(n) + SQRT5 * f.f_matrix))


def product_from_golden(g: GoldenStructure) -> ProductStructure:
    return ProductStructure((2.0 * g.p_matrix - np.eye(g.dim)) / SQRT5)


def verify_golden(g: GoldenStructure, form: BilinearForm, tol: float = TAU_LIN) -> AxiomReport:
    if g.dim != form.dim:
        raise DimensionMismatch(f"golden structure is {g.dim}-dimensional, form is {form.dim}")
    p, gm = g.p_matrix, form.gram
    n = g.dim
    e20 = p @ p - p - np.eye(n)
    e21 = gm @ p - p.T @ gm
    e23 = p.T @ gm @ p - gm @ p - gm
    # P^T G P - G P - G = (P^T G - G P) P + G (P^2 - P - I)
    bound = np.linalg.norm(e21) * np.linalg.norm(p) + np.linalg.norm(gm) * np.linalg.norm(e20)
    return AxiomReport(
        r20=float(np.linalg.norm(e20)),
        r21=float(np.linalg.norm(e21)),
        r23=float(np.linalg.norm(e23)),
        bound23=float(bound),
        tol=tol,
    )


def golden_eigensplit(g: GoldenStructure) -> tuple[Subspace, Subspace]:
    """Eigenspaces for phi and 1 - phi, via the spectral projectors.

    Since P^2 = P + I, ``(P - (1-phi) I) / sqrt5`` projects onto the phi-eigenspace
    along the other one, so the split needs no eigensolver.
    """
    n = g.dim
    pi_phi = (g.p_matrix - PHI_CONJ * np.eye(n)) / SQRT5
    pi_conj = np.eye(n) - pi_phi
    return _range(pi_phi), _range(pi_conj)


def _range(a: np.ndarray) -> Subspace:
    n = a.shape[0]
    u, s, _ = np.linalg.svd(a)
    k = int(np.sum(s > 0.5)) if s.size else 0  # projector singular values cluster away from 0
    return Subspace(u[:, :k], n)
