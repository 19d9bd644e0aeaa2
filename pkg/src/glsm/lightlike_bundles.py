"""Pointwise lightlike decomposition of the ambient tangent space along a submanifold.

Frame order used everywhere downstream: ``[rad (r) | screen (m-r) | ltr (r) | screen_perp (k-r)]``.
The first ``m`` columns span the tangent space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FrameSingular, GLSMError
from .geometry_engine import AmbientManifold, Immersion, pushforward
from .linalg_core import (
    TAU_EQ,
    TAU_RANK,
    BilinearForm,
    Subspace,
    g_orthogonal_complement,
    intersection,
    lightlike_transversal,
    nondegenerate_complement,
    radical,
    subspace_distance,
)


@dataclass(frozen=True)
class SubmanifoldClass:
    tag: str  # RLightlike, CoIsotropic, Isotropic, TotallyLightlike, NonDegenerate
    r: int

    def __str__(self):
        return f"RLightlike({self.r})" if self.tag == "RLightlike" else self.tag


@dataclass(frozen=True)
class BundleDecomposition:
    u: np.ndarray
    x: np.ndarray
    gram: np.ndarray  # ambient metric at x
    jacobian: np.ndarray
    tangent: Subspace
    rad: Subspace
    screen: Subspace
    screen_perp: Subspace
    ltr: Subspace
    mu: Subspace | None = None
    frame: np.ndarray = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return self.tangent.rank

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    @property
    def r(self) -> int:
        return self.rad.rank

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def form(self) -> BilinearForm:
        return BilinearForm(self.gram)

    def slices(self) -> dict[str, slice]:
        m, r = self.m, self.r
        return {
            "rad": slice(0, r),
            "screen": slice(r, m),
            "tan": slice(0, m),
            "ltr": slice(m, m + r),
            "sperp": slice(m + r, self.n),
        }

    def coords(self, v) -> np.ndarray:
        """Coordinates of ambient vector(s) ``v`` in the decomposition frame."""
        return np.linalg.solve(self.frame, np.asarray(v, dtype=float))

    def frame_gram(self) -> np.ndarray:
        return self.frame.T @ self.gram @ self.frame

    def chart_coeffs(self, tangent_coords) -> np.ndarray:
        """Chart components of a tangent vector given in the ``[rad | screen]`` frame."""
        v = self.frame[:, : self.m] @ np.asarray(tangent_coords, dtype=float)
        return np.linalg.lstsq(self.jacobian, v, rcond=None)[0]


def _assemble(u, x, gram, jac, rad, screen, sperp, ltr, golden) -> BundleDecomposition:
    n = gram.shape[0]
    frame = np.hstack([rad.basis, screen.basis, ltr.basis, sperp.basis])
    if frame.shape[1] != n or np.linalg.matrix_rank(frame) < n:
        raise FrameSingular(f"decomposition frame has rank {np.linalg.matrix_rank(frame)} < {n}")
    mu = None
    if golden is not None:
        mu = mu_subspace(BilinearForm(gram), golden.p_matrix, screen, sperp)
    return BundleDecomposition(
        u=np.asarray(u, dtype=float),
        x=np.asarray(x, dtype=float),
        gram=gram,
        jacobian=jac,
        tangent=Subspace(jac),
        rad=rad,
        screen=screen,
        screen_perp=sperp,
        ltr=ltr,
        mu=mu,
        frame=frame,
    )


def mu_subspace(form: BilinearForm, p: np.ndarray, screen: Subspace, sperp: Subspace) -> Subspace:
    """Complement of ``P(screen)`` inside ``screen_perp``: all z in screen_perp with g(z, P s) = 0."""
    n = form.dim
    if sperp.rank == 0:
        return Subspace.zero(n)
    if screen.rank == 0:
        return sperp
    within = g_orthogonal_complement(form, Subspace(p @ screen.basis, n))
    return intersection(sperp, within)


def golden_preference(form: BilinearForm, p: np.ndarray, rad: Subspace) -> Subspace | None:
    """Vectors orthogonal to ``P(rad)``; used to pick golden-adapted screens."""
    if rad.rank == 0:
        return None
    return g_orthogonal_complement(form, Subspace(p @ rad.basis, form.dim))


def decompose(
    amb: AmbientManifold,
    imm: Immersion,
    u,
    seed: int = 0,
    screen_strategy: str = "golden",
    tau_rank: float = TAU_RANK,
    tau_eq: float = TAU_EQ,
) -> BundleDecomposition:
    """Radical, screen, screen transversal and lightlike transversal at chart point ``u``.

    ``screen_strategy="golden"`` (only meaningful when the ambient carries a
    golden structure) takes the screens orthogonal to ``P(rad)`` whenever that
    yields valid complements; otherwise screens are seeded-random.
    """
    u = np.asarray(u, dtype=float)
    x = imm(u)
    jac = pushforward(imm, u)
    gram = amb.gram(x)
    form = BilinearForm(gram)
    tangent = Subspace(jac)
    rad = radical(form, tangent, tau_rank)
    prefer = None
    if screen_strategy == "golden" and amb.golden is not None:
        prefer = golden_preference(form, amb.golden.p_matrix, rad)
    screen = nondegenerate_complement(form, rad, tangent, seed, tau_rank, prefer)
    tperp = g_orthogonal_complement(form, tangent, tau_rank)
    rad_perp = radical(form, tperp, tau_rank)
    if rad_perp.rank != rad.rank or subspace_distance(rad_perp, rad) > max(tau_eq, 1e3 * tau_rank):
        raise GLSMError(
            f"radical of the tangent space (rank {rad.rank}) and of its orthogonal (rank {rad_perp.rank}) disagree"
        )
    sperp = nondegenerate_complement(form, rad, tperp, seed + 1, tau_rank, prefer)
    ltr = lightlike_transversal(form, rad, screen, sperp, tau_rank)
    return _assemble(u, x, gram, jac, rad, screen, sperp, ltr, amb.golden)


def _project_onto(basis: np.ndarray, sub_basis: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return basis
    q, _ = np.linalg.qr(sub_basis)
    return q @ (q.T @ basis)


def extend(center: BundleDecomposition, amb: AmbientManifold, imm: Immersion, u, tau_rank: float = TAU_RANK) -> BundleDecomposition:
    """Decomposition at a nearby point ``u`` that varies smoothly with the center's.

    Radical vectors are the Euclidean projections of the center's onto the new
    radical; screen vectors are projected onto the new tangent space, screen
    transversal vectors onto the new orthogonal of the tangent space, and the
    lightlike transversal is rebuilt from these (it is unique given the rest).
    """
    u = np.asarray(u, dtype=float)
    x = imm(u)
    jac = pushforward(imm, u)
    gram = amb.gram(x)
    form = BilinearForm(gram)
    tangent = Subspace(jac)
    n = gram.shape[0]
    rad_new = radical(form, tangent, tau_rank)
    if rad_new.rank != center.r:
        raise GLSMError(f"radical rank changes from {center.r} to {rad_new.rank} near u={center.u.tolist()}")
    rad = Subspace(_project_onto(center.rad.basis, rad_new.basis) if center.r else np.zeros((n, 0)), n)
    screen = Subspace(_project_onto(center.screen.basis, jac) if center.screen.rank else np.zeros((n, 0)), n)
    tperp = g_orthogonal_complement(form, tangent, tau_rank)
    sperp = Subspace(
        _project_onto(center.screen_perp.basis, tperp.basis) if center.screen_perp.rank else np.zeros((n, 0)), n
    )
    ltr = lightlike_transversal(form, rad, screen, sperp, tau_rank)
    return _assemble(u, x, gram, jac, rad, screen, sperp, ltr, amb.golden)


def classify(d: BundleDecomposition, m: int | None = None, k: int | None = None) -> SubmanifoldClass:
    m = d.m if m is None else m
    k = d.k if k is None else k
    r = d.r
    if r == 0:
        cls = SubmanifoldClass("NonDegenerate", 0)
    elif r < min(m, k):
        cls = SubmanifoldClass("RLightlike", r)
    elif r == k and r < m:
        cls = SubmanifoldClass("CoIsotropic", r)
    elif r == m and r < k:
        cls = SubmanifoldClass("Isotropic", r)
    else:
        cls = SubmanifoldClass("TotallyLightlike", r)
    if cls.tag in ("Isotropic", "TotallyLightlike"):
        assert d.screen.rank == 0
    if cls.tag in ("CoIsotropic", "TotallyLightlike"):
        assert d.screen_perp.rank == 0
    return cls


def project(d: BundleDecomposition, form: BilinearForm | None, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split ambient ``v`` as tangent + ltr + screen_perp parts (each an ambient vector)."""
    c = d.coords(v)
    s = d.slices()
    e = d.frame
    return e[:, s["tan"]] @ c[s["tan"]], e[:, s["ltr"]] @ c[s["ltr"]], e[:, s["sperp"]] @ c[s["sperp"]]


def decomposition_residuals(d: BundleDecomposition) -> dict[str, float]:
    """Largest violation of each pairing/orthogonality rule of the decomposition."""
    g = d.frame_gram()
    s = d.slices()
    r = d.r

    def blk(a, b):
        x = g[s[a], s[b]]
        return float(np.max(np.abs(x))) if x.size else 0.0

    pair = g[s["ltr"], s["rad"]] - np.eye(r) if r else np.zeros((0, 0))
    return {
        "ltr_rad_pairing": float(np.max(np.abs(pair))) if r else 0.0,
        "ltr_ltr": blk("ltr", "ltr"),
        "rad_tan": blk("rad", "tan"),
        "screen_sperp": blk("screen", "sperp"),
        "rad_sperp": blk("rad", "sperp"),
        "ltr_screen": blk("ltr", "screen"),
        "ltr_sperp": blk("ltr", "sperp"),
    }

