"""Second fundamental forms, shape operators and transversal connections at a point.

Two independent routes are provided:

* frame route -- :func:`compute_gw` differentiates the whole decomposition
  frame along the chart axes and reads every object off the connection
  matrices ``C[a] = E^-1 nabla_{e_a} E`` (``e_a`` the tangent frame vectors);
* field route -- :func:`gauss_split`, :func:`weingarten_ltr`, ... differentiate
  a single field along an arbitrary direction and project the result.

The identity battery compares objects across and within these routes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import StepUnderflow
from .geometry_engine import (
    H_FD,
    AmbientManifold,
    ChartField,
    Immersion,
    chart_derivative,
    christoffel,
    covariant_derivative_along,
)
from .lightlike_bundles import BundleDecomposition, decompose, extend
from .linalg_core import TAU_EQ


class LocalFrame:
    """Smooth extension of a decomposition to a chart neighbourhood of its point."""

    def __init__(self, amb: AmbientManifold, imm: Immersion, d: BundleDecomposition, h_fd: float = H_FD):
        self.amb, self.imm, self.d, self.h_fd = amb, imm, d, h_fd
        self._cache: dict[bytes, np.ndarray] = {}

    @classmethod
    def at(cls, amb, imm, u, seed=0, screen_strategy="golden", h_fd=H_FD) -> "LocalFrame":
        return cls(amb, imm, decompose(amb, imm, u, seed, screen_strategy), h_fd)

    def frame_at(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if np.array_equal(p, self.d.u):
            return self.d.frame
        key = p.tobytes()
        if key not in self._cache:
            self._cache[key] = self._frame_near(p)
        return self._cache[key]

    def _frame_near(self, p) -> np.ndarray:
        return extend(self.d, self.amb, self.imm, p).frame

    def column(self, j: int):
        return lambda p: self.frame_at(p)[:, j]

    def chart(self, tangent_coords) -> np.ndarray:
        return self.d.chart_coeffs(tangent_coords)

    def derivative(self, fn, w_chart) -> np.ndarray:
        """Ambient covariant derivative of an ambient-valued ``fn(u)`` along chart vector ``w_chart``."""
        return covariant_derivative_along(self.amb, self.imm, fn, w_chart, self.d.u, self.h_fd)


class ReseededFrame(LocalFrame):
    """Fault-injection variant: every stencil point is decomposed afresh with its own random screen."""

    def __init__(self, base: LocalFrame, seed: int):
        super().__init__(base.amb, base.imm, base.d, base.h_fd)
        self.seed = seed

    def _frame_near(self, p) -> np.ndarray:
        self.seed += 1
        d = decompose(self.amb, self.imm, p, self.seed, screen_strategy="random")
        e = d.frame.copy()
        s = d.slices()
        if d.r:
            # an unrelated radical basis too; ltr follows with the dual mixing so pairings stay intact
            rng = np.random.default_rng(self.seed)
            a = np.eye(d.r) + 0.3 * rng.standard_normal((d.r, d.r))
            e[:, s["rad"]] = e[:, s["rad"]] @ a
            e[:, s["ltr"]] = e[:, s["ltr"]] @ np.linalg.inv(a).T
        return e


def _coeffs(w, u) -> np.ndarray:
    return w.coeffs(u) if isinstance(w, ChartField) else np.asarray(w, dtype=float)


@dataclass(frozen=True)
class GaussWeingartenData:
    """Every connection-level object at one point, in decomposition-frame coordinates.

    Index conventions (``a, b`` tangent frame indices, ``i`` ltr/radical, ``c``
    screen transversal, ``s`` screen):

    * ``h_l[a, b, i]``, ``h_s[a, b, c]``
    * ``shape_N[i][:, a]`` and ``shape_Z[c][:, a]`` -- tangent coordinates of ``A W``
    * ``conn_l[a][:, i]``, ``d_s[a][:, i]`` -- parts of ``nabla_{e_a} N_i``
    * ``conn_s[a][:, c]``, ``d_l[a][:, c]`` -- parts of ``nabla_{e_a} Z_c``
    * ``screen_conn[a][:, s]``, ``h_star[a, s, i]`` -- parts of ``nabla_{e_a} S_s``
    * ``shape_star[i][:, a]`` (screen coordinates), ``conn_star_t[a][:, i]``
    """

    d: BundleDecomposition
    C: np.ndarray = field(repr=False)  # (m, n, n)

    @property
    def _s(self):
        return self.d.slices()

    @cached_property
    def h_l(self):
        s = self._s
        return self.C[:, s["ltr"], s["tan"]].transpose(0, 2, 1)

    @cached_property
    def h_s(self):
        s = self._s
        return self.C[:, s["sperp"], s["tan"]].transpose(0, 2, 1)

    @cached_property
    def shape_N(self):
        s = self._s
        return np.stack([-self.C[:, s["tan"], col].T for col in range(s["ltr"].start, s["ltr"].stop)]) if self.d.r else np.zeros((0, self.d.m, self.d.m))

    @cached_property
    def shape_Z(self):
        s = self._s
        cols = range(s["sperp"].start, s["sperp"].stop)
        return np.stack([-self.C[:, s["tan"], col].T for col in cols]) if len(cols) else np.zeros((0, self.d.m, self.d.m))

    @cached_property
    def conn_l(self):
        s = self._s
        return self.C[:, s["ltr"], s["ltr"]]

    @cached_property
    def d_s(self):
        s = self._s
        return self.C[:, s["sperp"], s["ltr"]]

    @cached_property
    def conn_s(self):
        s = self._s
        return self.C[:, s["sperp"], s["sperp"]]

    @cached_property
    def d_l(self):
        s = self._s
        return self.C[:, s["ltr"], s["sperp"]]

    @cached_property
    def screen_conn(self):
        s = self._s
        return self.C[:, s["screen"], s["screen"]]

    @cached_property
    def h_star(self):
        s = self._s
        return self.C[:, s["rad"], s["screen"]].transpose(0, 2, 1)

    @cached_property
    def shape_star(self):
        s = self._s
        if not self.d.r:
            return np.zeros((0, self.d.m - self.d.r, self.d.m))
        return np.stack([-self.C[:, s["screen"], i].T for i in range(self.d.r)])

    @cached_property
    def conn_star_t(self):
        s = self._s
        return self.C[:, s["rad"], s["rad"]]

    # ambient-vector views, all evaluated on frame vectors

    def vec(self, part: str, coords) -> np.ndarray:
        return self.d.frame[:, self._s[part]] @ np.asarray(coords)

    def nabla(self, a: int, col: int) -> np.ndarray:
        """``nabla_{e_a}`` of frame column ``col``, as an ambient vector."""
        return self.d.frame @ self.C[a][:, col]


def compute_gw(frame: LocalFrame) -> GaussWeingartenData:
    """Connection matrices of the frame along every tangent frame vector."""
    d = frame.d
    m, n = d.m, d.n
    u = d.u
    h = frame.h_fd
    eye = np.eye(m)
    dframe = []
    for j in range(m):
        step = h * eye[j]
        lo = frame.imm.inside(u - step)
        hi = frame.imm.inside(u + step)
        if not (lo and hi):
            raise StepUnderflow(f"finite-difference stencil leaves the chart domain at u={u.tolist()}")
        dframe.append((frame.frame_at(u + step) - frame.frame_at(u - step)) / (2 * h))
    dframe = np.stack(dframe)  # (m_chart, n, n)
    gamma = None if frame.amb.flat else christoffel(frame.amb, d.x)
    einv = np.linalg.inv(d.frame)
    C = np.empty((m, n, n))
    for a in range(m):
        w = d.chart_coeffs(eye[a])
        nab = np.einsum("j,jkl->kl", w, dframe)
        if gamma is not None:
            nab = nab + np.einsum("kij,i,jl->kl", gamma, d.jacobian @ w, d.frame)
        C[a] = einv @ nab
    return GaussWeingartenData(d, C)


# field route


def gauss_split(frame: LocalFrame, W, U: ChartField):
    """``nabla_W U`` split as (tangent frame coords, h^l coords, h^s coords)."""
    d = frame.d
    imm = frame.imm

    def u_amb(p):
        return imm.jacobian(p) @ U.coeffs(p)

    c = d.coords(frame.derivative(u_amb, _coeffs(W, d.u)))
    s = d.slices()
    return c[s["tan"]], c[s["ltr"]], c[s["sperp"]]


def ambient_nabla(frame: LocalFrame, W, U: ChartField) -> np.ndarray:
    imm = frame.imm
    return frame.derivative(lambda p: imm.jacobian(p) @ U.coeffs(p), _coeffs(W, frame.d.u))


def weingarten_ltr(frame: LocalFrame, W, i: int):
    """``nabla_W N_i = -A_N W + nabla^l_W N + D^s(W, N)``; returns ``(A_N W, nabla^l, D^s)`` coords."""
    d = frame.d
    s = d.slices()
    c = d.coords(frame.derivative(frame.column(s["ltr"].start + i), _coeffs(W, d.u)))
    return -c[s["tan"]], c[s["ltr"]], c[s["sperp"]]


def weingarten_screen_transversal(frame: LocalFrame, W, b: int):
    """``nabla_W Z_b = -A_Z W + nabla^s_W Z + D^l(W, Z)``; returns ``(A_Z W, nabla^s, D^l)`` coords."""
    d = frame.d
    s = d.slices()
    c = d.coords(frame.derivative(frame.column(s["sperp"].start + b), _coeffs(W, d.u)))
    return -c[s["tan"]], c[s["sperp"]], c[s["ltr"]]


def screen_split(frame: LocalFrame, W, kind: str, idx: int):
    """Split the induced derivative of a screen (``kind="screen"``) or radical frame field.

    Screen field: returns ``(nabla* coords, h* coords)``.
    Radical field: returns ``(A*_xi W screen coords, nabla*t coords)``.
    """
    d = frame.d
    s = d.slices()
    col = s["screen"].start + idx if kind == "screen" else s["rad"].start + idx
    c = d.coords(frame.derivative(frame.column(col), _coeffs(W, d.u)))
    if kind == "screen":
        return c[s["screen"]], c[s["rad"]]
    return -c[s["screen"]], c[s["rad"]]


def metric_defect(frame: LocalFrame, W: ChartField, U: ChartField, V: ChartField, gw: GaussWeingartenData | None = None):
    """``(nabla_W g)(U, V)``: returns ``(lhs, rhs)``.

    ``lhs`` is computed from fields by finite differences,
    ``W g(U,V) - g(nabla_W U, V) - g(U, nabla_W V)`` with the induced connection
    taken as the tangent part of the ambient derivative. ``rhs`` is
    ``g(h^l(W,U), V) + g(h^l(W,V), U)`` from the frame route.
    """
    d = frame.d
    amb, imm = frame.amb, frame.imm
    u0 = d.u
    w = W.coeffs(u0)

    def guv(p):
        j = imm.jacobian(p)
        return np.atleast_1d((j @ U.coeffs(p)) @ amb.gram(imm(p)) @ (j @ V.coeffs(p)))

    dg = float(chart_derivative(guv, imm, u0, w, frame.h_fd)[0])
    U0 = d.jacobian @ U.coeffs(u0)
    V0 = d.jacobian @ V.coeffs(u0)
    s = d.slices()
    tu = d.frame[:, s["tan"]] @ gauss_split(frame, W, U)[0]
    tv = d.frame[:, s["tan"]] @ gauss_split(frame, W, V)[0]
    lhs = dg - tu @ d.gram @ V0 - U0 @ d.gram @ tv
    gw = gw or compute_gw(frame)
    wc = tangent_coords(d, w)
    uc, vc = tangent_coords(d, U.coeffs(u0)), tangent_coords(d, V.coeffs(u0))
    hu = gw.vec("ltr", np.einsum("a,b,abi->i", wc, uc, gw.h_l))
    hv = gw.vec("ltr", np.einsum("a,b,abi->i", wc, vc, gw.h_l))
    rhs = hu @ d.gram @ V0 + hv @ d.gram @ U0
    return float(lhs), float(rhs)


def tangent_coords(d: BundleDecomposition, chart_vec) -> np.ndarray:
    """Tangent frame coordinates of a chart vector."""
    return d.coords(d.jacobian @ np.asarray(chart_vec, dtype=float))[: d.m]


def bilinear(arr: np.ndarray, wc, uc) -> np.ndarray:
    return np.einsum("a,b,ab...->...", wc, uc, arr)


# identity battery on the frame route


def identity_residuals(gw: GaussWeingartenData) -> dict[str, float]:
    """Largest violation of each pointwise identity, over all frame vectors."""
    d = gw.d
    G = d.gram
    E = d.frame
    s = d.slices()
    m, r = d.m, d.r
    ks = d.k - r
    tan = E[:, s["tan"]]
    scr = E[:, s["screen"]]
    xi = E[:, s["rad"]]
    N = E[:, s["ltr"]]
    Z = E[:, s["sperp"]]
    out = {}

    def mx(x):
        x = np.asarray(x)
        return float(np.max(np.abs(x))) if x.size else 0.0

    # symmetry of the second fundamental forms
    out["h_l_symmetric"] = mx(gw.h_l - gw.h_l.transpose(1, 0, 2))
    out["h_s_symmetric"] = mx(gw.h_s - gw.h_s.transpose(1, 0, 2))

    # g(h^s(W,U), Z) + g(U, D^l(W,Z)) = g(A_Z W, U)
    e12 = []
    for c in range(ks):
        for a in range(m):
            azw = tan @ gw.shape_Z[c][:, a]
            dl = N @ gw.d_l[a][:, c]
            for b in range(m):
                hs = Z @ gw.h_s[a, b]
                e12.append(hs @ G @ Z[:, c] + tan[:, b] @ G @ dl - azw @ G @ tan[:, b])
    out["hs_shape_Z"] = mx(e12)

    # g(D^s(W,N), Z) = g(N, A_Z W)
    e13 = []
    for i in range(r):
        for c in range(ks):
            for a in range(m):
                ds = Z @ gw.d_s[a][:, i]
                e13.append(ds @ G @ Z[:, c] - N[:, i] @ G @ (tan @ gw.shape_Z[c][:, a]))
    out["ds_shape_Z"] = mx(e13)

    # g(h^l(W, S), xi) = g(A*_xi W, S) for screen S
    e16 = []
    for i in range(r):
        for a in range(m):
            ast = scr @ gw.shape_star[i][:, a]
            for sb in range(m - r):
                hl = N @ gw.h_l[a, r + sb]
                e16.append(hl @ G @ xi[:, i] - ast @ G @ scr[:, sb])
    out["hl_shape_star"] = mx(e16)

    # g(h*(W, S), N) = g(A_N W, S) for screen S
    e17 = []
    lit17 = []
    for i in range(r):
        for a in range(m):
            anw = tan @ gw.shape_N[i][:, a]
            for sb in range(m - r):
                hst = xi @ gw.h_star[a, sb]
                e17.append(hst @ G @ N[:, i] - anw @ G @ scr[:, sb])
                lit17.append(Z @ gw.h_s[a, r + sb] @ G @ N[:, i] - anw @ G @ scr[:, sb])
    out["hstar_shape_N"] = mx(e17)
    out["hs_shape_N"] = mx(lit17)  # h^s in place of h*: not expected to vanish, reported for contrast

    # g(h^l(W, xi), xi) = 0 for every radical xi, and A*_xi xi = 0
    e18a, e18b = [], []
    for a in range(m):
        B = np.array([[(N @ gw.h_l[a, i]) @ G @ xi[:, j] for j in range(r)] for i in range(r)]) if r else np.zeros((0, 0))
        e18a.append(mx(B + B.T))
    for i in range(r):
        e18b.append(gw.shape_star[i][:, i])
    out["hl_radical_skew"] = max(e18a) if e18a else 0.0
    out["shape_star_radical"] = mx(np.concatenate(e18b)) if e18b else 0.0

    return out


def total_h(gw: GaussWeingartenData, wc, uc) -> np.ndarray:
    """``h(W,U) = h^l + h^s`` as an ambient vector."""
    return gw.vec("ltr", bilinear(gw.h_l, wc, uc)) + gw.vec("sperp", bilinear(gw.h_s, wc, uc))


def reconstruction_residual(frame: LocalFrame, gw: GaussWeingartenData, W: ChartField, U: ChartField) -> float:
    """``|nabla_W U - (nabla_W U + h^l + h^s)|`` with h from the frame route and the rest from the field route."""
    d = frame.d
    full = ambient_nabla(frame, W, U)
    tan, _, _ = gauss_split(frame, W, U)
    wc = tangent_coords(d, W.coeffs(d.u))
    uc = tangent_coords(d, U.coeffs(d.u))
    recon = d.frame[:, d.slices()["tan"]] @ tan + total_h(gw, wc, uc)
    return float(np.linalg.norm(full - recon))


DEFAULT_TOL = 5 * TAU_EQ


# dependence on the screen choice


@dataclass(frozen=True)
class ScreenIndependence:
    seeds: tuple[int, ...]
    hl_coefficients: float  # spread of g(h(d_a, d_b), xi_i) across seeds
    normal_pairings: float  # spread of g(h(d_a, d_b), nu) over a fixed basis nu of T^perp
    ambient_vectors: float  # spread of h(d_a, d_b) itself (expected to vary)

    @property
    def invariant(self) -> float:
        return max(self.hl_coefficients, self.normal_pairings)


def screen_independence(amb, imm, u, seeds=(0, 1, 2, 3, 4), h_fd: float = H_FD) -> ScreenIndependence:
    """Compare the transversal part of ``h`` between randomly seeded screens at one point."""
    from .linalg_core import Subspace, g_orthogonal_complement

    u = np.asarray(u, dtype=float)
    hl, nu_pair, vecs = [], [], []
    normals = None
    for seed in seeds:
        d = decompose(amb, imm, u, seed, screen_strategy="random")
        gw = compute_gw(LocalFrame(amb, imm, d, h_fd))
        if normals is None:
            normals = g_orthogonal_complement(d.form, Subspace(d.jacobian)).basis
        tc = [tangent_coords(d, e) for e in np.eye(imm.chart_dim)]
        h = np.array([[total_h(gw, a, b) for b in tc] for a in tc])  # [a, b, ambient]
        xi = d.rad.basis
        hl.append(np.einsum("abk,kl,li->abi", h, d.gram, xi))
        nu_pair.append(np.einsum("abk,kl,lj->abj", h, d.gram, normals))
        vecs.append(h)

    def spread(arrs):
        ref = arrs[0]
        return max((float(np.max(np.abs(a - ref))) if a.size else 0.0) for a in arrs)

    return ScreenIndependence(tuple(seeds), spread(hl), spread(nu_pair), spread(vecs))
