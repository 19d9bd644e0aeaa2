"""Charts, immersions, ambient metrics and the derivative operators built on them.

Jacobians of immersion components and metric entries come from forward-mode
AD on the parsed expressions. Derivatives of fields along the submanifold use
central finite differences over the chart with step ``h_fd``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, RankDeficient, SingularMetric, StepUnderflow
from .expression import Expression
from .golden_structure import GoldenStructure, verify_golden
from .linalg_core import BilinearForm, TAU_RANK, column_rank

H_FD = 1e-5


def _expr(e, allowed="ux") -> Expression:
    return e if isinstance(e, Expression) else Expression(str(e), allowed)


class Immersion:
    """Map from an axis-aligned chart box into ambient coordinates."""

    def __init__(self, components: Sequence, chart_dim: int, domain: Sequence[tuple[float, float]]):
        self.components = tuple(_expr(c, "u") for c in components)
        self.chart_dim = int(chart_dim)
        self.domain = tuple((float(a), float(b)) for a, b in domain)
        if len(self.domain) != self.chart_dim:
            raise DimensionMismatch(f"domain has {len(self.domain)} axes, chart_dim is {self.chart_dim}")
        for comp in self.components:
            bad = [v for v in comp.variables if int(v[1:]) > self.chart_dim]
            if bad:
                raise DimensionMismatch(f"component {comp.text!r} uses {sorted(bad)} beyond chart_dim {self.chart_dim}")

    @classmethod
    def linear(cls, matrix, domain=None, offset=None) -> "Immersion":
        """u -> offset + matrix @ u, written out as expressions."""
        a = np.asarray(matrix, dtype=float)
        n, m = a.shape
        b = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
        comps = []
        for i in range(n):
            terms = [f"{float(a[i, j])!r}*u{j + 1}" for j in range(m) if a[i, j] != 0.0]
            if b[i] != 0.0 or not terms:
                terms.append(repr(float(b[i])))
            comps.append(" + ".join(terms))
        return cls(comps, m, domain or [(-1.0, 1.0)] * m)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    def __call__(self, u) -> np.ndarray:
        return np.array([c.eval_at(u) for c in self.components])

    def jacobian(self, u) -> np.ndarray:
        return np.array([c.eval_grad(u)[1] for c in self.components])

    def inside(self, u, margin: float = 0.0) -> bool:
        return all(lo + margin <= x <= hi - margin for x, (lo, hi) in zip(u, self.domain))


class ConstantMetric:
    def __init__(self, gram):
        g = np.asarray(gram, dtype=float)
        self.gram = 0.5 * (g + g.T)
        self.dim = g.shape[0]
        if abs(np.linalg.det(self.gram)) <= TAU_RANK**self.dim:
            raise SingularMetric("constant metric is degenerate")

    def at(self, x) -> np.ndarray:
        return self.gram

    def derivative(self, x) -> np.ndarray:
        """``d[l, i, j] = d g_ij / d x_l``."""
        return np.zeros((self.dim,) * 3)


class ExpressionMetric:
    def __init__(self, entries):
        n = len(entries)
        self.dim = n
        self.entries = [[_expr(entries[i][j], "x") for j in range(n)] for i in range(n)]

    def at(self, x) -> np.ndarray:
        g = np.array([[e.eval_at(x, "x") for e in row] for row in self.entries])
        return 0.5 * (g + g.T)

    def derivative(self, x) -> np.ndarray:
        n = self.dim
        d = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                d[:, i, j] = self.entries[i][j].eval_grad(x, "x")[1]
        return 0.5 * (d + d.transpose(0, 2, 1))


class AmbientManifold:
    def __init__(self, metric, golden: GoldenStructure | None = None):
        if not isinstance(metric, (ConstantMetric, ExpressionMetric)):
            metric = ConstantMetric(metric)
        self.metric = metric
        self.golden = golden
        if golden is not None:
            if not isinstance(metric, ConstantMetric):
                raise DimensionMismatch("a golden structure needs a constant metric")
            if golden.dim != metric.dim:
                raise DimensionMismatch(f"golden structure is {golden.dim}-dimensional, metric {metric.dim}")
            rep = verify_golden(golden, BilinearForm(metric.gram))
            if not rep.passed:
                raise SingularMetric(f"golden structure fails its axioms: {rep.as_dict()}")

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def flat(self) -> bool:
        return isinstance(self.metric, ConstantMetric)

    def gram(self, x) -> np.ndarray:
        g = self.metric.at(x)
        if abs(np.linalg.det(g)) <= TAU_RANK**self.dim:
            raise SingularMetric(f"metric degenerate at {np.round(x, 6).tolist()}")
        return g

    def form(self, x) -> BilinearForm:
        return BilinearForm(self.gram(x))


def pushforward(imm: Immersion, u, check: bool = False, h_fd: float = H_FD) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    j = imm.jacobian(u)
    if check:
        fd = np.column_stack(
            [(imm(u + h_fd * e) - imm(u - h_fd * e)) / (2 * h_fd) for e in np.eye(imm.chart_dim)]
        )
        err = float(np.max(np.abs(fd - j))) if j.size else 0.0
        if err > 1e-6 * max(1.0, float(np.max(np.abs(j)))):
            raise AssertionError(f"AD and FD Jacobians disagree by {err:.3e}")
    if column_rank(j) < imm.chart_dim:
        raise RankDeficient(f"Jacobian rank below {imm.chart_dim} at u={u.tolist()}")
    return j


def induced_metric(amb: AmbientManifold, imm: Immersion, u) -> BilinearForm:
    j = pushforward(imm, u)
    return BilinearForm(j.T @ amb.gram(imm(u)) @ j)


def christoffel(amb: AmbientManifold, x) -> np.ndarray:
    """``gamma[k, i, j]`` = Gamma^k_ij of the Levi-Civita connection."""
    n = amb.dim
    if amb.flat:
        amb.gram(x)
        return np.zeros((n, n, n))
    g = amb.gram(x)
    d = amb.metric.derivative(x)  # d[l, i, j] = d_l g_ij
    ginv = np.linalg.inv(g)
    # lower[l, i, j] = 1/2 (d_i g_lj + d_j g_il - d_l g_ij)
    lower = 0.5 * (d.transpose(1, 0, 2) + d.transpose(2, 1, 0) - d)
    gamma = np.einsum("kl,lij->kij", ginv, lower)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


# vector fields in chart coefficients


class ChartField:
    """Tangent field ``u -> sum_a c^a(u) d/du_a``; subclasses give coefficients and their Jacobian."""

    def coeffs(self, u) -> np.ndarray:
        raise NotImplementedError

    def jac(self, u) -> np.ndarray:
        """``J[a, b] = d c^a / d u_b``."""
        raise NotImplementedError


class ExpressionField(ChartField):
    def __init__(self, exprs: Sequence):
        self.exprs = tuple(_expr(e, "u") for e in exprs)

    def coeffs(self, u):
        return np.array([e.eval_at(u) for e in self.exprs])

    def jac(self, u):
        return np.array([e.eval_grad(u)[1] for e in self.exprs])


class PolynomialField(ChartField):
    """Coefficients ``c^a(u) = a0 + A u + 1/2 u^T B_a u`` with exact derivatives."""

    def __init__(self, const, lin, quad):
        self.const = np.asarray(const, dtype=float)
        self.lin = np.asarray(lin, dtype=float)
        q = np.asarray(quad, dtype=float)
        self.quad = 0.5 * (q + q.transpose(0, 2, 1))

    @classmethod
    def random(cls, m: int, rng: np.random.Generator, center=None, scale: float = 0.5, out_dim: int | None = None) -> "PolynomialField":
        k = m if out_dim is None else out_dim
        const = rng.uniform(-1.0, 1.0, k)
        if k:
            const[rng.integers(k)] += 1.0 if const[0] >= 0 else -1.0  # keep the field away from zero
        lin = scale * rng.uniform(-1.0, 1.0, (k, m))
        quad = scale * rng.uniform(-1.0, 1.0, (k, m, m))
        f = cls(const, lin, quad)
        if center is not None:
            f = f.recentered(center)
        return f

    def recentered(self, c) -> "PolynomialField":
        """Same shape expressed around chart point ``c`` (so coefficients stay O(1) there)."""
        c = np.asarray(c, dtype=float)
        const = self.const - self.lin @ c + 0.5 * np.einsum("aij,i,j->a", self.quad, c, c)
        lin = self.lin - np.einsum("aij,j->ai", self.quad, c)
        return PolynomialField(const, lin, self.quad)

    def coeffs(self, u):
        u = np.asarray(u, dtype=float)
        return self.const + self.lin @ u + 0.5 * np.einsum("aij,i,j->a", self.quad, u, u)

    def jac(self, u):
        u = np.asarray(u, dtype=float)
        return self.lin + np.einsum("aij,j->ai", self.quad, u)


class CoordinateField(ChartField):
    def __init__(self, index: int, m: int):
        self.index, self.m = index, m

    def coeffs(self, u):
        return np.eye(self.m)[self.index]

    def jac(self, u):
        return np.zeros((self.m, self.m))


def lie_bracket(w_field: ChartField, u_field: ChartField, u) -> np.ndarray:
    """``[W, U]^i = W(U^i) - U(W^i)``."""
    return u_field.jac(u) @ w_field.coeffs(u) - w_field.jac(u) @ u_field.coeffs(u)


def _check_stencil(imm: Immersion, u, step) -> None:
    u = np.asarray(u, dtype=float)
    if not (imm.inside(u + step) and imm.inside(u - step)):
        raise StepUnderflow(f"finite-difference stencil leaves the chart domain at u={u.tolist()}")


def chart_derivative(fn: Callable, imm: Immersion, u, direction, h_fd: float = H_FD) -> np.ndarray:
    """Central difference of ``fn`` along the chart direction ``direction`` (not normalized)."""
    u = np.asarray(u, dtype=float)
    step = h_fd * np.asarray(direction, dtype=float)
    _check_stencil(imm, u, step)
    return (np.asarray(fn(u + step)) - np.asarray(fn(u - step))) / (2 * h_fd)


def covariant_derivative_along(
    amb: AmbientManifold, imm: Immersion, field: Callable, w_coeffs, u, h_fd: float = H_FD
) -> np.ndarray:
    """``nabla_W V`` for an ambient-valued field ``V(u)`` along the immersion."""
    u = np.asarray(u, dtype=float)
    dv = chart_derivative(field, imm, u, w_coeffs, h_fd)
    if amb.flat:
        return dv
    gamma = christoffel(amb, imm(u))
    w_amb = imm.jacobian(u) @ np.asarray(w_coeffs, dtype=float)
    return dv + np.einsum("kij,i,j->k", gamma, w_amb, np.asarray(field(u)))


def ambient_covariant_derivative(
    amb: AmbientManifold, imm: Immersion, w_field: ChartField, u_field: ChartField, u, h_fd: float = H_FD
) -> np.ndarray:
    """``nabla_W U`` in the ambient, for tangent fields given in chart coefficients."""

    def u_amb(p):
        return imm.jacobian(p) @ u_field.coeffs(p)

    return covariant_derivative_along(amb, imm, u_amb, w_field.coeffs(u), u, h_fd)
