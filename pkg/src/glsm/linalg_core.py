"""Dense linear algebra over indefinite and degenerate symmetric bilinear forms.

Everything here is a pure function of its inputs. Subspaces are stored as
column bases with Euclidean-normalized columns (null vectors admit no metric
normalization); the one exception is the lightlike transversal, whose columns
are scaled by the pairing condition ``g(N_i, xi_j) = delta_ij``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateScreen, DimensionMismatch, SingularPairing

TAU_RANK = 1e-8
TAU_EQ = 1e-6  # finite-difference derived data
TAU_LIN = 1e-10  # pure linear-algebra data
MAX_SCREEN_RETRIES = 32


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class BilinearForm:
    """Symmetric bilinear form on R^dim, possibly degenerate."""

    __slots__ = ("gram",)

    def __init__(self, gram):
        g = np.atleast_2d(np.asarray(gram, dtype=float))
        if g.shape[0] != g.shape[1]:
            raise DimensionMismatch(f"gram matrix must be square, got {g.shape}")
        self.gram = _frozen(0.5 * (g + g.T))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def __call__(self, a, b):
        return np.asarray(a).T @ self.gram @ np.asarray(b)

    def restrict(self, sub: "Subspace") -> "BilinearForm":
        if sub.ambient_dim != self.dim:
            raise DimensionMismatch(f"subspace lives in R^{sub.ambient_dim}, form in R^{self.dim}")
        return BilinearForm(sub.basis.T @ self.gram @ sub.basis)

    def __repr__(self):
        return f"BilinearForm(dim={self.dim})"


@dataclass(frozen=True, init=False)
class Subspace:
    """Linear subspace of R^ambient_dim given by a column basis."""

    ambient_dim: int
    basis: np.ndarray

    def __init__(self, basis, ambient_dim: int | None = None):
        b = np.asarray(basis, dtype=float)
        if b.size == 0:
            if ambient_dim is None:
                ambient_dim = b.shape[0] if b.ndim == 2 else 0
            b = np.zeros((ambient_dim, 0))
        elif b.ndim == 1:
            b = b[:, None]
        if ambient_dim is not None and b.shape[0] != ambient_dim:
            raise DimensionMismatch(f"basis has {b.shape[0]} rows, expected {ambient_dim}")
        object.__setattr__(self, "ambient_dim", int(b.shape[0]))
        object.__setattr__(self, "basis", _frozen(b))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)), n)

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(np.eye(n), n)

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def orthonormal(self) -> np.ndarray:
        q = self.__dict__.get("_q")
        if q is None:
            q = np.zeros((self.ambient_dim, 0)) if self.rank == 0 else np.linalg.qr(self.basis)[0]
            q.setflags(write=False)
            object.__setattr__(self, "_q", q)
        return q

    def projector(self) -> np.ndarray:
        q = self.orthonormal()
        return q @ q.T

    def contains(self, v, tol: float = TAU_LIN) -> bool:
        v = np.atleast_2d(np.asarray(v, dtype=float).T).T
        resid = v - self.projector() @ v
        scale = max(1.0, float(np.linalg.norm(v)))
        return float(np.linalg.norm(resid)) <= tol * scale

    def normalized(self) -> "Subspace":
        if self.rank == 0:
            return self
        return Subspace(self.basis / np.linalg.norm(self.basis, axis=0), self.ambient_dim)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(np.hstack([self.basis, other.basis]), self.ambient_dim)

    def __repr__(self):
        return f"Subspace(rank={self.rank}, ambient_dim={self.ambient_dim})"


def column_rank(a: np.ndarray, tau_rank: float = TAU_RANK) -> int:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tau_rank * s[0]))


def null_space(a: np.ndarray, tau_rank: float = TAU_RANK, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of ker(a) with singular values below ``tau_rank * scale`` treated as zero."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n)
    u, s, vt = np.linalg.svd(a)
    ref = s[0] if scale is None else max(scale, s[0] if s.size else 0.0)
    rank = int(np.sum(s > tau_rank * ref)) if ref > 0 else 0
    return vt[rank:].T.copy()


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Sine of the largest principal angle; 1.0 when the ranks differ."""
    if a.rank != b.rank:
        return 1.0
    if a.rank == 0:
        return 0.0
    qa, qb = a.orthonormal(), b.orthonormal()
    return float(np.linalg.norm(qa - qb @ (qb.T @ qa), 2))


def containment_residual(a: Subspace, b: Subspace) -> float:
    """Largest sine between a vector of ``a`` and the subspace ``b`` (0 when a is inside b)."""
    if a.rank == 0:
        return 0.0
    if b.rank == 0:
        return 1.0
    qa, qb = a.orthonormal(), b.orthonormal()
    return float(np.linalg.norm(qa - qb @ (qb.T @ qa), 2))


def intersection(a: Subspace, b: Subspace, tau_rank: float = TAU_RANK) -> Subspace:
    n = a.ambient_dim
    if a.rank == 0 or b.rank == 0:
        return Subspace.zero(n)
    qa, qb = a.orthonormal(), b.orthonormal()
    ker = null_space(np.hstack([qa, -qb]), tau_rank)
    if ker.shape[1] == 0:
        return Subspace.zero(n)
    vecs = qa @ ker[: qa.shape[1]]
    q = np.linalg.svd(vecs, full_matrices=False)[0][:, : column_rank(vecs, tau_rank)]
    return Subspace(q, n)


def signature(form: BilinearForm, tau_rank: float = TAU_RANK, scale: float | None = None) -> tuple[int, int, int]:
    """Counts of positive, negative and zero eigenvalues.

    An eigenvalue is zero when ``|lam| <= tau_rank * scale``; ``scale`` defaults
    to the largest eigenvalue magnitude.
    """
    if form.dim == 0:
        return (0, 0, 0)
    lam = np.linalg.eigvalsh(form.gram)
    ref = float(np.max(np.abs(lam))) if scale is None else float(scale)
    zero = np.abs(lam) <= tau_rank * ref
    return int(np.sum((lam > 0) & ~zero)), int(np.sum((lam < 0) & ~zero)), int(np.sum(zero))


def g_orthogonal_complement(form: BilinearForm, sub: Subspace, tau_rank: float = TAU_RANK) -> Subspace:
    """All vectors ``v`` with ``g(v, s) = 0`` for every ``s`` in ``sub``."""
    n = form.dim
    if sub.rank == 0:
        return Subspace.whole(n)
    a = sub.orthonormal().T @ form.gram
    return Subspace(null_space(a, tau_rank), n)


def _pivoted_basis(kernel: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Canonical basis of span(kernel): greedy by overlap with ``directions``.

    Each step picks the direction with the largest projection onto what is
    left of the kernel and takes that projection (positive overlap) as the
    next basis vector.
    """
    k = kernel.copy()
    dirs = directions / np.maximum(np.linalg.norm(directions, axis=0), 1e-300)
    out = []
    for _ in range(kernel.shape[1]):
        proj = k @ (k.T @ dirs)
        norms = np.linalg.norm(proj, axis=0)
        j = int(np.argmax(norms))
        v = proj[:, j] / norms[j]
        out.append(v)
        k = k - np.outer(v, v @ k)
        k = np.linalg.svd(k, full_matrices=False)[0][:, : k.shape[1] - 1] if k.shape[1] > 1 else k[:, :0]
    return np.column_stack(out) if out else kernel[:, :0]


def radical(form: BilinearForm, sub: Subspace, tau_rank: float = TAU_RANK) -> Subspace:
    """Radical of ``form`` restricted to ``sub``: vectors of sub orthogonal to all of sub.

    Zero eigenvalues of the restricted Gram matrix (on an orthonormal basis of
    ``sub``) are judged against ``tau_rank * max(max|lam|, ||G||_2)``. The
    basis is ordered by descending overlap with the columns of ``sub.basis``.
    """
    if sub.ambient_dim != form.dim:
        raise DimensionMismatch(f"form is {form.dim}-dimensional, subspace lives in R^{sub.ambient_dim}")
    n = form.dim
    if sub.rank == 0:
        return Subspace.zero(n)
    q = sub.orthonormal()
    lam, vec = np.linalg.eigh(q.T @ form.gram @ q)
    scale = max(float(np.max(np.abs(lam))), float(np.linalg.norm(form.gram, 2)))
    zero = np.abs(lam) <= tau_rank * scale
    if not np.any(zero):
        return Subspace.zero(n)
    kernel = q @ vec[:, zero]
    return Subspace(_pivoted_basis(kernel, sub.basis), n)


def _euclidean_complement(rad: Subspace, within: Subspace, tau_rank: float) -> np.ndarray:
    qw = within.orthonormal()
    if rad.rank == 0:
        return qw
    qr_ = rad.orthonormal()
    rest = qw - qr_ @ (qr_.T @ qw)
    u, s, _ = np.linalg.svd(rest, full_matrices=False)
    return u[:, : within.rank - rad.rank]


def _nondegenerate(form: BilinearForm, basis: np.ndarray, tau_rank: float) -> bool:
    k = basis.shape[1]
    if k == 0:
        return True
    return abs(np.linalg.det(basis.T @ form.gram @ basis)) > tau_rank**k


def nondegenerate_complement(
    form: BilinearForm,
    rad: Subspace,
    within: Subspace,
    seed: int = 0,
    tau_rank: float = TAU_RANK,
    prefer: Subspace | None = None,
) -> Subspace:
    """Select a form-nondegenerate complement ``S`` of ``rad`` inside ``within``.

    The complement is drawn at random (seeded) among graphs over the Euclidean
    complement of ``rad``; since ``rad`` is orthogonal to all of ``within``, any
    such graph carries the same restricted Gram matrix. ``prefer`` restricts the
    choice to ``within ∩ prefer`` when that intersection is itself a valid
    complement (used for golden-adapted screens).
    """
    n = form.dim
    target = within.rank - rad.rank
    if target < 0:
        raise DimensionMismatch("radical larger than the enclosing subspace")
    if rad.rank == 0:
        return within.normalized()
    if target == 0:
        return Subspace.zero(n)

    if prefer is not None:
        cand = intersection(within, prefer, tau_rank)
        if cand.rank == target and column_rank(np.hstack([rad.basis, cand.basis]), tau_rank) == within.rank:
            if _nondegenerate(form, cand.orthonormal(), tau_rank):
                return cand.normalized()

    base = _euclidean_complement(rad, within, tau_rank)
    qr_ = rad.orthonormal()
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SCREEN_RETRIES):
        tilt = rng.uniform(-1.0, 1.0, size=(rad.rank, target))
        s = base + qr_ @ tilt
        rot, _ = np.linalg.qr(rng.normal(size=(target, target)))
        s = s @ rot
        s = s / np.linalg.norm(s, axis=0)
        full = np.hstack([rad.basis, s])
        if column_rank(full, tau_rank) == within.rank and _nondegenerate(form, s, tau_rank):
            return Subspace(s, n)
    raise DegenerateScreen(
        f"no nondegenerate complement of a rank-{rad.rank} radical in a rank-{within.rank} "
        f"subspace after {MAX_SCREEN_RETRIES} draws"
    )


def lightlike_transversal(
    form: BilinearForm,
    rad_basis: Subspace,
    screen: Subspace,
    screen_perp: Subspace,
    tau_rank: float = TAU_RANK,
) -> Subspace:
    """Null vectors ``N_i`` dual to the radical basis.

    Works inside ``V``, the form-orthogonal complement of screen + screen_perp
    (dimension 2r). Candidates spanning a Euclidean complement of the radical in
    ``V`` are rescaled so that ``g(V_i, xi_j) = delta_ij``, then corrected by
    ``-1/2 sum_j g(V_i, V_j) xi_j`` which kills every ``g(N_i, N_j)``.
    """
    n = form.dim
    r = rad_basis.rank
    if r == 0:
        return Subspace.zero(n)
    v = g_orthogonal_complement(form, screen + screen_perp, tau_rank)
    if v.rank != 2 * r:
        raise SingularPairing(f"complement of screen and screen_perp has rank {v.rank}, expected {2 * r}")
    cand = _euclidean_complement(Subspace(rad_basis.basis, n), v, tau_rank)
    xi = rad_basis.basis
    pairing = cand.T @ form.gram @ xi
    s = np.linalg.svd(pairing, compute_uv=False)
    if s[-1] <= tau_rank * max(1.0, float(np.linalg.norm(form.gram, 2))):
        raise SingularPairing(f"pairing matrix singular (smallest singular value {s[-1]:.3e})")
    vc = cand @ np.linalg.inv(pairing).T
    gv = vc.T @ form.gram @ vc
    nvec = vc - 0.5 * xi @ (0.5 * (gv + gv.T))
    return Subspace(nvec, n)
