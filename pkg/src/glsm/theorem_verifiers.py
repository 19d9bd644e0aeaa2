"""Golden-class classifiers and two-sided checks of the section 3 and 4 results.

A theorem ``A <=> B`` is checked by computing a residual for each side
independently; a side holds below ``5 tau_eq``, fails above ``50 tau_eq`` and
is indeterminate in between. Propositions of the form "class => property"
use the class hypothesis as their left side.

All projection operators (the tangent splits S/K and L, K1/K2, M1/M2, Q1,
T1/T2) are frame-coordinate selectors applied after a single solve against
the decomposition frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ClassMismatch
from .gauss_weingarten import (
    GaussWeingartenData,
    LocalFrame,
    ReseededFrame,
    compute_gw,
)
from .geometry_engine import ChartField, PolynomialField, chart_derivative, lie_bracket
from .golden_structure import GoldenStructure
from .lightlike_bundles import BundleDecomposition, decompose
from .linalg_core import TAU_EQ, Subspace, containment_residual, subspace_distance

RADICAL_TRANSVERSAL = "RadicalTransversal"
TRANSVERSAL = "Transversal"
NEITHER = "Neither"

THEOREM_IDS = (
    "s3.prop.no-1-lightlike",
    "s3.thm.screen-invariant",
    "s3.prop.structure-eqs",
    "s3.thm.metric-connection",
    "s3.thm.screen-integrable",
    "s3.thm.radical-integrable",
    "s3.thm.radical-foliation",
    "s3.thm.screen-foliation",
    "s4.prop.mu-invariant",
    "s4.prop.no-1-lightlike",
    "s4.eqs.22-24",
    "s4.thm.radical-integrable",
    "s4.thm.screen-foliation",
    "s4.thm.radical-foliation",
    "s4.thm.metric-connection",
)

FAMILIES = {
    "structure": ("s3.prop.structure-eqs", "s4.eqs.22-24"),
    "metric": ("s3.thm.metric-connection", "s4.thm.metric-connection"),
    "integrability": ("s3.thm.screen-integrable", "s3.thm.radical-integrable", "s4.thm.radical-integrable"),
    "foliation": (
        "s3.thm.radical-foliation",
        "s3.thm.screen-foliation",
        "s4.thm.screen-foliation",
        "s4.thm.radical-foliation",
    ),
    "invariance": ("s3.thm.screen-invariant", "s4.prop.mu-invariant"),
}

# three negative controls per family; each must break an equivalence on a clean instance
FAULTS = {
    "structure": ("swap_ltr", "reseed_stencil", "rhs_bias"),
    "metric": ("rhs_bias", "coarse_stencil", "lhs_bias"),
    "integrability": ("reseed_stencil", "mixed_fields", "rhs_bias"),
    "foliation": ("reseed_stencil", "mixed_fields", "rhs_bias"),
    "invariance": ("reseed_screen", "perturb_golden", "rhs_bias"),
}

FAULT_BIAS = 1e-2
COARSE_FACTOR = 1000.0  # step inflation for the coarse_stencil control


def required_class(theorem_id: str) -> str | None:
    if theorem_id.endswith("no-1-lightlike"):
        return None
    return RADICAL_TRANSVERSAL if theorem_id.startswith("s3") else TRANSVERSAL


@dataclass(frozen=True)
class Fault:
    kind: str
    family: str


# classification


@dataclass(frozen=True)
class GoldenClassification:
    tag: str
    residual_rt: float  # max(dist(P rad, ltr), dist(P screen, screen))
    residual_t: float  # max(dist(P rad, ltr), P screen inside screen_perp)
    rad_to_ltr: float
    notes: tuple[str, ...] = ()

    @property
    def residual(self) -> float:
        if self.tag == RADICAL_TRANSVERSAL:
            return self.residual_rt
        if self.tag == TRANSVERSAL:
            return self.residual_t
        return min(self.residual_rt, self.residual_t)


def _image(p: np.ndarray, sub: Subspace) -> Subspace:
    return Subspace(p @ sub.basis, sub.ambient_dim)


@dataclass(frozen=True)
class PairingObstruction:
    """Why ``P(rad)`` cannot be a lightlike transversal.

    ``pairing[i, j] = g(P xi_i, xi_j)`` and ``gram[i, j] = g(P xi_i, P xi_j)``.
    For null ``xi``, ``P^2 = P + I`` and self-adjointness give ``gram = pairing``.
    A lightlike transversal is null, so making ``P xi`` null leaves the pairing
    ``forced = pairing - gram``, which is the zero matrix: singular, while a
    transversal must pair with the radical through a nonsingular matrix.
    """

    pairing: np.ndarray
    gram: np.ndarray
    forced: np.ndarray
    identity_residual: float  # |gram - pairing|, relative to |G| |P xi| |xi|
    smallest_singular: float  # of the forced pairing, same scale

    def explains(self, tol: float = TAU_EQ) -> bool:
        return self.identity_residual < tol and self.smallest_singular < tol


def pairing_obstruction_check(d: BundleDecomposition, P: GoldenStructure) -> PairingObstruction:
    xi = d.rad.basis
    pxi = P.p_matrix @ xi
    pairing = pxi.T @ d.gram @ xi
    gram = pxi.T @ d.gram @ pxi
    forced = pairing - gram
    # natural size of g(P xi, .) entries, so that an accidentally small pairing is not inflated
    scale = max(1e-300, float(np.linalg.norm(d.gram, 2) * np.linalg.norm(pxi) * np.linalg.norm(xi)))
    if d.r == 0:
        return PairingObstruction(pairing, gram, forced, 0.0, 0.0)
    smin = float(np.linalg.svd(forced, compute_uv=False)[-1]) / scale
    return PairingObstruction(pairing, gram, forced, float(np.linalg.norm(forced)) / scale, smin)


def classify_golden_submanifold(d: BundleDecomposition, P: GoldenStructure, tau_eq: float = TAU_EQ) -> GoldenClassification:
    p = P.p_matrix
    notes = []
    if d.r == 0:
        return GoldenClassification(NEITHER, 1.0, 1.0, 1.0, ("nondegenerate submanifold: no radical to map onto ltr",))
    prad = _image(p, d.rad)
    rad_to_ltr = subspace_distance(prad, d.ltr)
    screen_inv = subspace_distance(_image(p, d.screen), d.screen) if d.screen.rank else 0.0
    screen_tr = containment_residual(_image(p, d.screen), d.screen_perp) if d.screen.rank else 0.0
    res_rt = max(rad_to_ltr, screen_inv)
    res_t = max(rad_to_ltr, screen_tr)
    if res_rt < tau_eq:
        tag = RADICAL_TRANSVERSAL
    elif res_t < tau_eq and d.screen.rank:
        tag = TRANSVERSAL
    else:
        tag = NEITHER
    if tag == NEITHER:
        ob = pairing_obstruction_check(d, P)
        if ob.explains(tau_eq):
            notes.append(
                f"pairing obstruction: g(P xi, P xi) = g(P xi, xi) (mismatch {ob.identity_residual:.1e}), so a null P xi "
                f"pairs singularly with rad (smallest singular value {ob.smallest_singular:.1e})"
            )
        notes.append(f"dist(P rad, ltr) = {rad_to_ltr:.3e}")
    return GoldenClassification(tag, res_rt, res_t, rad_to_ltr, tuple(notes))


# verdicts


@dataclass(frozen=True)
class TheoremVerdict:
    theorem_id: str
    point: int
    pair: int
    lhs_holds: bool | None
    rhs_holds: bool | None
    lhs_residual: float
    rhs_residual: float
    status: str  # pass, fail, indeterminate, vacuous, not_applicable
    notes: tuple[str, ...] = ()

    @property
    def equivalent(self) -> bool:
        return self.lhs_holds == self.rhs_holds


def side_state(residual: float, tau_eq: float) -> bool | None:
    if residual < 5 * tau_eq:
        return True
    if residual > 50 * tau_eq:
        return False
    return None


def _verdict(tid, point, pair, lhs, rhs, tau_eq, notes=()):
    lh, rh = side_state(lhs, tau_eq), side_state(rhs, tau_eq)
    if lh is None or rh is None:
        status = "indeterminate"
    else:
        status = "pass" if lh == rh else "fail"
    return TheoremVerdict(tid, point, pair, lh, rh, float(lhs), float(rhs), status, tuple(notes))


def _special(tid, point, pair, status, notes=()):
    return TheoremVerdict(tid, point, pair, None, None, 0.0, 0.0, status, tuple(notes))


# per-point context


class DistField(ChartField):
    """Section ``sum_j f_j(u) e_j(u)`` of a frame block (``rad`` or ``screen``)."""

    def __init__(self, frame: LocalFrame, part: str, coef: PolynomialField):
        self.frame = frame
        self.sl = frame.d.slices()[part]
        self.coef = coef

    def coeffs(self, u):
        u = np.asarray(u, dtype=float)
        e = self.frame.frame_at(u)[:, self.sl]
        jac = self.frame.imm.jacobian(u)
        return np.linalg.lstsq(jac, e @ self.coef.coeffs(u), rcond=None)[0]

    def jac(self, u):
        m = self.frame.d.m
        h = self.frame.h_fd
        cols = [chart_derivative(self.coeffs, self.frame.imm, u, e, h) for e in np.eye(m)]
        return np.column_stack(cols)


@dataclass
class PointContext:
    frame: LocalFrame
    gw: GaussWeingartenData
    P: GoldenStructure
    fields: list  # PolynomialField, chart coefficients
    dist_coefs: dict  # part -> list of PolynomialField
    index: int = 0
    tau_eq: float = TAU_EQ
    fault: Fault | None = None
    gw_rhs: GaussWeingartenData | None = None  # arrays used by right-hand sides
    frame_lhs: LocalFrame | None = None  # frame used by left-hand-side fields

    def __post_init__(self):
        d = self.frame.d
        self.d = d
        self.s = d.slices()
        self.einv = np.linalg.inv(d.frame)
        self.Pf = self.einv @ self.P.p_matrix @ d.frame  # P in frame coordinates
        if self.gw_rhs is None:
            self.gw_rhs = self.gw
        if self.frame_lhs is None:
            self.frame_lhs = self.frame

    # coordinate helpers

    def part(self, c, name):
        out = np.zeros_like(c)
        out[self.s[name]] = c[self.s[name]]
        return out

    def pad_tan(self, tc):
        c = np.zeros(self.d.n)
        c[: self.d.m] = tc
        return c

    def tcoords(self, chart_vec):
        return (self.einv @ (self.d.jacobian @ chart_vec))[: self.d.m]

    def vec(self, c):
        return self.d.frame @ c

    # golden splits of a tangent vector (frame coords in, frame coords out)

    def split_T(self, tc):
        """(P T W, P Q W): images of the screen and radical parts."""
        c = self.pad_tan(tc)
        return self.Pf @ self.part(c, "screen"), self.Pf @ self.part(c, "rad")

    def S_op(self, tc):
        return self.part(self.split_T(tc)[0], "screen")

    def K_op(self, tc):
        return self.part(self.split_T(tc)[0], "sperp")

    def L_op(self, tc, swap=False):
        c = self.part(self.split_T(tc)[1], "ltr")
        if swap and self.d.r >= 2:
            sl = self.s["ltr"]
            block = c[sl].copy()
            c[sl] = block[::-1]
        return c

    # frame-route objects, with tangent frame coords

    def h_l(self, wc, uc, gw=None):
        gw = gw or self.gw_rhs
        c = np.zeros(self.d.n)
        c[self.s["ltr"]] = np.einsum("a,b,abi->i", wc, uc, gw.h_l)
        return c

    def h_s(self, wc, uc, gw=None):
        gw = gw or self.gw_rhs
        c = np.zeros(self.d.n)
        c[self.s["sperp"]] = np.einsum("a,b,abi->i", wc, uc, gw.h_s)
        return c

    def h_star(self, wc, sc):
        """``h*(W, X)`` for tangent ``W`` and screen ``X`` (screen coords)."""
        c = np.zeros(self.d.n)
        c[self.s["rad"]] = np.einsum("a,s,asi->i", wc, sc, self.gw_rhs.h_star)
        return c

    def A_ltr(self, lc, wc):
        """``A_N W`` for ``N`` given by full frame coords ``lc`` (its ltr part is used)."""
        coef = lc[self.s["ltr"]]
        out = np.zeros(self.d.n)
        if coef.size:
            out[: self.d.m] = np.einsum("i,iab,b->a", coef, self.gw_rhs.shape_N, wc)
        return out

    def A_sperp(self, zc, wc):
        coef = zc[self.s["sperp"]]
        out = np.zeros(self.d.n)
        if coef.size:
            out[: self.d.m] = np.einsum("c,cab,b->a", coef, self.gw_rhs.shape_Z, wc)
        return out

    def D_s(self, wc, lc):
        """``D^s(W, N)`` for ``N`` with ltr coords taken from ``lc``."""
        coef = lc[self.s["ltr"]]
        out = np.zeros(self.d.n)
        if coef.size:
            out[self.s["sperp"]] = np.einsum("a,aci,i->c", wc, self.gw_rhs.d_s, coef)
        return out

    def D_l(self, wc, zc):
        coef = zc[self.s["sperp"]]
        out = np.zeros(self.d.n)
        if coef.size:
            out[self.s["ltr"]] = np.einsum("a,aic,c->i", wc, self.gw_rhs.d_l, coef)
        return out

    def nabla_frame(self, wc, col):
        """Frame coords of ``nabla_W e_col`` from the connection matrices."""
        return np.einsum("a,ak->k", wc, self.gw_rhs.C[:, :, col])

    # field-route derivatives

    def amb_field(self, F: ChartField):
        imm = self.frame_lhs.imm
        return lambda p: imm.jacobian(p) @ F.coeffs(p)

    def d_field(self, fn, W: ChartField, frame=None):
        """Frame coords of the ambient derivative of ambient-valued ``fn`` along ``W``."""
        frame = frame or self.frame_lhs
        return self.einv @ frame.derivative(fn, W.coeffs(self.d.u))

    def nabla_induced(self, W: ChartField, U: ChartField):
        """Tangent frame coords of the induced derivative ``nabla_W U``."""
        return self.d_field(self.amb_field(U), W)[: self.d.m]

    def field_pair(self, k):
        f = self.fields
        return f[k % len(f)], f[(k + 1) % len(f)]

    def dist_pair(self, part, k, other=None):
        coefs = self.dist_coefs[part]
        a = DistField(self.frame_lhs, part, coefs[k % len(coefs)])
        b = DistField(self.frame_lhs, other or part, (self.dist_coefs[other or part])[(k + 1) % len(coefs)])
        return a, b

    def tangent_frame_coords_of_field(self, F: ChartField):
        return self.tcoords(F.coeffs(self.d.u))


def _n(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x)) if x.size else 0.0


def _bias(ctx: PointContext, side: str) -> float:
    f = ctx.fault
    if f is None:
        return 0.0
    if (side == "rhs" and f.kind == "rhs_bias") or (side == "lhs" and f.kind == "lhs_bias"):
        return FAULT_BIAS
    return 0.0


def _class_side(ctx: PointContext, cls: GoldenClassification, want: str, assume: bool):
    if assume:
        return 0.0, (f"class hypothesis assumed (actual residual {cls.residual_rt if want == RADICAL_TRANSVERSAL else cls.residual_t:.3e})",)
    res = cls.residual_rt if want == RADICAL_TRANSVERSAL else cls.residual_t
    return res, ()


# individual theorems; each returns (lhs, rhs, notes) or raises _Vacuous


class _Vacuous(Exception):
    pass


def _structure_s3(ctx: PointContext, k: int, cls, assume):
    W, U = ctx.field_pair(k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    swap = ctx.fault is not None and ctx.fault.kind == "swap_ltr"
    frame = ctx.frame_lhs
    imm = frame.imm

    def frame_split(p, which):
        e = frame.frame_at(p)
        c = np.linalg.solve(e, imm.jacobian(p) @ W.coeffs(p))
        m, r = ctx.d.m, ctx.d.r
        pc = np.linalg.solve(e, ctx.P.p_matrix @ e)
        scr = np.zeros_like(c)
        rad = np.zeros_like(c)
        scr[r:m] = c[r:m]
        rad[:r] = c[:r]
        if which == "S":
            out = pc @ scr
            keep = slice(r, m)
        else:
            out = pc @ rad
            keep = slice(m, m + r)
        sel = np.zeros_like(out)
        sel[keep] = out[keep]
        if which == "L" and swap and r >= 2:
            sel[keep] = sel[keep][::-1]
        return e @ sel

    dSW = ctx.d_field(lambda p: frame_split(p, "S"), U)  # nabla_U (SW), frame coords
    dLW = ctx.d_field(lambda p: frame_split(p, "L"), U)
    nUW = ctx.nabla_induced(U, W)
    SW, LW = ctx.S_op(wc), ctx.L_op(wc)
    Ph_l = ctx.Pf @ ctx.h_l(uc, wc)
    Ph_s = ctx.Pf @ ctx.h_s(uc, wc)
    # (nabla_U S) W = A_{LW} U + K2 P h^l(U, W)
    tan_part = ctx.part(dSW, "tan") - ctx.S_op(nUW) - ctx.A_ltr(LW, uc) - ctx.part(Ph_l, "rad")
    # h^s(U, SW) + D^s(U, LW) - P h^s(U, W) = 0
    sperp_part = ctx.h_s(uc, SW[: ctx.d.m]) + ctx.D_s(uc, LW) - ctx.part(Ph_s, "sperp")
    # h^l(U, SW) + nabla^l_U LW - L nabla_U W - K1 P h^l(U, W) = 0
    ltr_part = ctx.h_l(uc, SW[: ctx.d.m]) + ctx.part(dLW, "ltr") - ctx.L_op(nUW) - ctx.part(Ph_l, "ltr")
    lhs, notes = _class_side(ctx, cls, RADICAL_TRANSVERSAL, assume)
    rhs = max(_n(tan_part), _n(sperp_part), _n(ltr_part)) + _bias(ctx, "rhs")
    return lhs, rhs, notes + (f"tangent {_n(tan_part):.2e}, screen transversal {_n(sperp_part):.2e}, ltr {_n(ltr_part):.2e}",)


def _structure_s4(ctx: PointContext, k: int, cls, assume):
    W, U = ctx.field_pair(k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    swap = ctx.fault is not None and ctx.fault.kind == "swap_ltr"
    frame = ctx.frame_lhs
    imm = frame.imm
    m, r = ctx.d.m, ctx.d.r

    def frame_split(p, which):
        e = frame.frame_at(p)
        c = np.linalg.solve(e, imm.jacobian(p) @ W.coeffs(p))
        pc = np.linalg.solve(e, ctx.P.p_matrix @ e)
        src = np.zeros_like(c)
        if which == "K":
            src[r:m] = c[r:m]
            keep = slice(m + r, ctx.d.n)
        else:
            src[:r] = c[:r]
            keep = slice(m, m + r)
        out = pc @ src
        sel = np.zeros_like(out)
        sel[keep] = out[keep]
        if which == "L" and swap and r >= 2:
            sel[keep] = sel[keep][::-1]
        return e @ sel

    dKW = ctx.d_field(lambda p: frame_split(p, "K"), U)
    dLW = ctx.d_field(lambda p: frame_split(p, "L"), U)
    nUW = ctx.nabla_induced(U, W)
    KW, LW = ctx.K_op(wc), ctx.L_op(wc)
    Ph_l = ctx.Pf @ ctx.h_l(uc, wc)
    Ph_s = ctx.Pf @ ctx.h_s(uc, wc)
    # -A_{KW} U - A_{LW} U = K2 P h^l(U, W) + M1 h^s(U, W)
    tan_part = -ctx.A_sperp(KW, uc) - ctx.A_ltr(LW, uc) - ctx.part(Ph_l, "rad") - ctx.part(Ph_s, "tan")
    # nabla^s_U KW + D^s(U, LW) = K nabla_U W + (M2 + C) h^s(U, W)
    sperp_part = ctx.part(dKW, "sperp") + ctx.D_s(uc, LW) - ctx.K_op(nUW) - ctx.part(Ph_s, "sperp")
    # D^l(U, KW) + nabla^l_U LW = L nabla_U W + K1 P h^l(U, W)
    ltr_part = ctx.D_l(uc, KW) + ctx.part(dLW, "ltr") - ctx.L_op(nUW) - ctx.part(Ph_l, "ltr")
    lhs, notes = _class_side(ctx, cls, TRANSVERSAL, assume)
    rhs = max(_n(tan_part), _n(sperp_part), _n(ltr_part)) + _bias(ctx, "rhs")
    return lhs, rhs, notes + (f"tangent {_n(tan_part):.2e}, screen transversal {_n(sperp_part):.2e}, ltr {_n(ltr_part):.2e}",)


def _metric_lhs(ctx: PointContext, k: int) -> float:
    """``|(nabla_W g)(U, V)|`` from fields only (no frame-route data)."""
    f = ctx.fields
    W, U, V = f[k % len(f)], f[(k + 1) % len(f)], f[(k + 2) % len(f)]
    d = ctx.d
    frame = ctx.frame_lhs
    amb, imm = frame.amb, frame.imm

    def guv(p):
        j = imm.jacobian(p)
        return np.atleast_1d((j @ U.coeffs(p)) @ amb.gram(imm(p)) @ (j @ V.coeffs(p)))

    if ctx.fault is not None and ctx.fault.kind == "coarse_stencil":
        # one-sided difference at an inflated step: O(h) error against the fine connection terms
        h = frame.h_fd * COARSE_FACTOR
        w = W.coeffs(d.u)
        dg = float((guv(d.u + h * w) - guv(d.u))[0] / h)
    else:
        dg = float(chart_derivative(guv, imm, d.u, W.coeffs(d.u), frame.h_fd)[0])
    tu = ctx.vec(ctx.pad_tan(ctx.nabla_induced(W, U)))
    tv = ctx.vec(ctx.pad_tan(ctx.nabla_induced(W, V)))
    U0, V0 = d.jacobian @ U.coeffs(d.u), d.jacobian @ V.coeffs(d.u)
    return abs(dg - tu @ d.gram @ V0 - U0 @ d.gram @ tv) + _bias(ctx, "lhs")


def _metric_s3(ctx, k, cls, assume):
    W = ctx.fields[k % len(ctx.fields)]
    wc = ctx.tcoords(W.coeffs(ctx.d.u))
    worst = 0.0
    for i in range(ctx.d.r):
        # A_{P xi} W = -tangent part of nabla_W (P xi) = -tangent part of P nabla_W xi
        pnab = ctx.Pf @ ctx.nabla_frame(wc, ctx.s["rad"].start + i)
        worst = max(worst, _n(ctx.part(-pnab, "screen")))
    return _metric_lhs(ctx, k), worst + _bias(ctx, "rhs"), ()


def _metric_s4(ctx, k, cls, assume):
    W = ctx.fields[k % len(ctx.fields)]
    wc = ctx.tcoords(W.coeffs(ctx.d.u))
    worst = 0.0
    eye = np.eye(ctx.d.n)
    for i in range(ctx.d.r):
        xi = eye[ctx.s["rad"].start + i]
        # Q1 P D^s(W, P xi) versus M1 P h^s(W, xi)
        q1 = ctx.part(ctx.Pf @ ctx.D_s(wc, ctx.Pf @ xi), "screen")
        m1 = ctx.part(ctx.Pf @ ctx.h_s(wc, xi[: ctx.d.m]), "screen")
        worst = max(worst, _n(q1 - m1))
    return _metric_lhs(ctx, k), worst + _bias(ctx, "rhs"), ()


def _dist_fields(ctx, part, k):
    if ctx.fault is not None and ctx.fault.kind == "mixed_fields":
        other = "rad" if part == "screen" else "screen"
        if ctx.dist_coefs.get(other):
            return ctx.dist_pair(part, k, other)
    return ctx.dist_pair(part, k)


def _bracket_outside(ctx, W, U, part):
    br = lie_bracket(W, U, ctx.d.u)
    c = ctx.pad_tan(ctx.tcoords(br))
    other = "rad" if part == "screen" else "screen"
    return _n(c[ctx.s[other]])


def _screen_integrable(ctx, k, cls, assume):
    if ctx.d.m - ctx.d.r < 2:
        raise _Vacuous(f"screen distribution has rank {ctx.d.m - ctx.d.r} < 2")
    W, U = _dist_fields(ctx, "screen", k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    lhs = _bracket_outside(ctx, W, U, "screen") + _bias(ctx, "lhs")
    rhs = _n(ctx.h_l(uc, ctx.S_op(wc)[: ctx.d.m]) - ctx.h_l(wc, ctx.S_op(uc)[: ctx.d.m])) + _bias(ctx, "rhs")
    return lhs, rhs, ()


def _radical_integrable_s3(ctx, k, cls, assume):
    if ctx.d.r < 2:
        raise _Vacuous(f"radical distribution has rank {ctx.d.r} < 2")
    W, U = _dist_fields(ctx, "rad", k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    lhs = _bracket_outside(ctx, W, U, "rad") + _bias(ctx, "lhs")
    rhs = _n(ctx.A_ltr(ctx.L_op(uc), wc) - ctx.A_ltr(ctx.L_op(wc), uc)) + _bias(ctx, "rhs")
    return lhs, rhs, ()


def _radical_integrable_s4(ctx, k, cls, assume):
    if ctx.d.r < 2:
        raise _Vacuous(f"radical distribution has rank {ctx.d.r} < 2")
    W, U = _dist_fields(ctx, "rad", k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    lhs = _bracket_outside(ctx, W, U, "rad") + _bias(ctx, "lhs")
    rhs = _n(ctx.D_s(uc, ctx.L_op(wc)) - ctx.D_s(wc, ctx.L_op(uc))) + _bias(ctx, "rhs")
    return lhs, rhs, ()


def _screen_basis_coords(ctx):
    eye = np.eye(ctx.d.n)
    return [eye[j] for j in range(ctx.s["screen"].start, ctx.s["screen"].stop)]


def _radical_foliation_lhs(ctx, k):
    W, U = _dist_fields(ctx, "rad", k)
    nab = ctx.pad_tan(ctx.nabla_induced(W, U))
    v = ctx.vec(nab)
    d = ctx.d
    worst = max((abs(v @ d.gram @ ctx.vec(z)) for z in _screen_basis_coords(ctx)), default=0.0)
    return W, worst + _bias(ctx, "lhs")


def _radical_foliation_s3(ctx, k, cls, assume):
    if ctx.d.m == ctx.d.r:
        raise _Vacuous("screen distribution is zero")
    W, lhs = _radical_foliation_lhs(ctx, k)
    wc = ctx.tcoords(W.coeffs(ctx.d.u))
    worst = 0.0
    for z in _screen_basis_coords(ctx):
        pz = ctx.Pf @ z
        diff = ctx.h_star(wc, pz[ctx.s["screen"]]) - ctx.h_star(wc, z[ctx.s["screen"]])
        worst = max(worst, _n(diff))
    return lhs, worst + _bias(ctx, "rhs"), ()


def _radical_foliation_s4(ctx, k, cls, assume):
    if ctx.d.m == ctx.d.r:
        raise _Vacuous("screen distribution is zero")
    W, lhs = _radical_foliation_lhs(ctx, k)
    wc = ctx.tcoords(W.coeffs(ctx.d.u))
    a_res, b_res = 0.0, 0.0
    for z in _screen_basis_coords(ctx):
        zt = z[: ctx.d.m]
        k2 = ctx.part(ctx.Pf @ ctx.h_l(wc, zt), "rad")
        a_res = max(a_res, _n(k2))
        apz = ctx.A_sperp(ctx.Pf @ z, wc)
        m1 = ctx.part(ctx.Pf @ ctx.h_s(wc, zt), "tan")
        b_res = max(b_res, _n(-apz - m1))
    rhs = min(a_res, b_res) + _bias(ctx, "rhs")
    which = "K2 P h^l(W,Z) = 0" if a_res <= b_res else "-A_{PZ}W = M1 h^s(W,Z)"
    return lhs, rhs, (f"disjuncts: {a_res:.2e} / {b_res:.2e}; smaller: {which}",)


def _screen_foliation_lhs(ctx, k):
    W, U = _dist_fields(ctx, "screen", k)
    v = ctx.vec(ctx.pad_tan(ctx.nabla_induced(W, U)))
    d = ctx.d
    lt = d.frame[:, ctx.s["ltr"]]
    worst = float(np.max(np.abs(v @ d.gram @ lt))) if lt.shape[1] else 0.0
    return W, U, worst + _bias(ctx, "lhs")


def _screen_foliation_s3(ctx, k, cls, assume):
    if ctx.d.m == ctx.d.r:
        raise _Vacuous("screen distribution is zero")
    W, U, lhs = _screen_foliation_lhs(ctx, k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    eye = np.eye(ctx.d.n)
    a_res = max((_n(ctx.part(ctx.Pf @ eye[j], "ltr")) for j in range(ctx.s["ltr"].start, ctx.s["ltr"].stop)), default=0.0)
    pu = ctx.Pf @ ctx.pad_tan(uc)
    lhs_b = ctx.h_star(wc, pu[ctx.s["screen"]]) + ctx.part(ctx.Pf @ ctx.h_l(wc, pu[: ctx.d.m]), "rad")
    rhs_b = ctx.h_star(wc, uc[ctx.s["screen"]]) + ctx.part(ctx.Pf @ ctx.h_l(wc, uc), "rad")
    b_res = _n(lhs_b - rhs_b)
    rhs = min(a_res, b_res) + _bias(ctx, "rhs")
    which = "P N has no ltr component" if a_res <= b_res else "h* + K2 identity"
    return lhs, rhs, (f"disjuncts: {a_res:.2e} / {b_res:.2e}; smaller: {which}",)


def _screen_foliation_s4(ctx, k, cls, assume):
    if ctx.d.m == ctx.d.r:
        raise _Vacuous("screen distribution is zero")
    W, U, lhs = _screen_foliation_lhs(ctx, k)
    wc, uc = ctx.tcoords(W.coeffs(ctx.d.u)), ctx.tcoords(U.coeffs(ctx.d.u))
    hst = _n(ctx.h_star(wc, uc[ctx.s["screen"]]))
    apu = _n(ctx.part(ctx.A_sperp(ctx.Pf @ ctx.pad_tan(uc), wc), "rad"))
    return lhs, max(hst, apu) + _bias(ctx, "rhs"), (f"h* {hst:.2e}, rad part of A_(PU)W {apu:.2e}",)


def _invariance_P(ctx):
    p = ctx.P.p_matrix
    if ctx.fault is not None and ctx.fault.kind == "perturb_golden":
        rng = np.random.default_rng(7)
        p = p + 1e-2 * rng.normal(size=p.shape)
    return p


def _screens_of(ctx):
    """(screen, screen transversal), or a randomly reseeded pair under the ``reseed_screen`` fault."""
    if ctx.fault is not None and ctx.fault.kind == "reseed_screen":
        f = ctx.frame
        d = decompose(f.amb, f.imm, ctx.d.u, seed=12345, screen_strategy="random")
        return d.screen, d.screen_perp
    return ctx.d.screen, ctx.d.screen_perp


def _screen_invariant(ctx, k, cls, assume):
    lhs, notes = _class_side(ctx, cls, RADICAL_TRANSVERSAL, assume)
    scr = _screens_of(ctx)[0]
    if scr.rank == 0:
        raise _Vacuous("screen distribution is zero")
    rhs = subspace_distance(Subspace(_invariance_P(ctx) @ scr.basis), scr) + _bias(ctx, "rhs")
    return lhs, rhs, notes


def _mu_invariant(ctx, k, cls, assume):
    from .lightlike_bundles import mu_subspace

    lhs, notes = _class_side(ctx, cls, TRANSVERSAL, assume)
    p = _invariance_P(ctx)
    scr, sperp = _screens_of(ctx)
    mu = mu_subspace(ctx.d.form, ctx.P.p_matrix, scr, sperp)
    if mu.rank == 0:
        raise _Vacuous("mu = {0} (P(screen) fills the screen transversal bundle)")
    g = ctx.d.gram
    pv = p @ mu.basis
    pairs = {
        "rad": np.max(np.abs(pv.T @ g @ ctx.d.rad.basis)) if ctx.d.r else 0.0,
        "ltr": np.max(np.abs(pv.T @ g @ ctx.d.ltr.basis)) if ctx.d.r else 0.0,
        "screen": np.max(np.abs(pv.T @ g @ scr.basis)) if scr.rank else 0.0,
        "P screen": np.max(np.abs(pv.T @ g @ (p @ scr.basis))) if scr.rank else 0.0,
    }
    rhs = subspace_distance(Subspace(pv), mu) + _bias(ctx, "rhs")
    return lhs, rhs, notes + ("pairings " + ", ".join(f"{a} {b:.1e}" for a, b in pairs.items()),)


_CHECKS: dict[str, Callable] = {
    "s3.thm.screen-invariant": _screen_invariant,
    "s3.prop.structure-eqs": _structure_s3,
    "s3.thm.metric-connection": _metric_s3,
    "s3.thm.screen-integrable": _screen_integrable,
    "s3.thm.radical-integrable": _radical_integrable_s3,
    "s3.thm.radical-foliation": _radical_foliation_s3,
    "s3.thm.screen-foliation": _screen_foliation_s3,
    "s4.prop.mu-invariant": _mu_invariant,
    "s4.eqs.22-24": _structure_s4,
    "s4.thm.radical-integrable": _radical_integrable_s4,
    "s4.thm.screen-foliation": _screen_foliation_s4,
    "s4.thm.radical-foliation": _radical_foliation_s4,
    "s4.thm.metric-connection": _metric_s4,
}


def _no_one_lightlike(ctx: PointContext, tid: str, pair: int) -> TheoremVerdict:
    d = ctx.d
    if d.r != 1:
        return _special(tid, ctx.index, pair, "vacuous", (f"radical rank {d.r} != 1",))
    ob = pairing_obstruction_check(d, ctx.P)
    cls = classify_golden_submanifold(d, ctx.P, ctx.tau_eq)
    want = RADICAL_TRANSVERSAL if tid.startswith("s3") else TRANSVERSAL
    # left: the instance is 1-lightlike; right: the pairing obstruction is present and the class is indeed excluded
    rhs = max(ob.identity_residual, ob.smallest_singular)
    if cls.tag == want:
        rhs = 1.0
    notes = (f"g(P xi, xi) = {ob.pairing[0, 0]:.3e}, g(P xi, P xi) = {ob.gram[0, 0]:.3e}", f"classified {cls.tag}")
    return _verdict(tid, ctx.index, pair, 0.0, rhs + _bias(ctx, "rhs"), ctx.tau_eq, notes)


def verify(
    ctx: PointContext,
    theorem_id: str,
    cls: GoldenClassification,
    n_pairs: int = 8,
    assume_class: str | None = None,
) -> list[TheoremVerdict]:
    """All verdicts for one theorem at one point (one per field pair)."""
    if theorem_id.endswith("no-1-lightlike"):
        return [_no_one_lightlike(ctx, theorem_id, k) for k in range(n_pairs)]
    want = required_class(theorem_id)
    assume = assume_class == want
    if cls.tag != want and not assume:
        note = f"instance classified {cls.tag}, theorem needs {want}"
        return [_special(theorem_id, ctx.index, k, "not_applicable", (note,)) for k in range(n_pairs)]
    out = []
    for k in range(n_pairs):
        try:
            lhs, rhs, notes = _CHECKS[theorem_id](ctx, k, cls, assume)
        except _Vacuous as e:
            out.append(_special(theorem_id, ctx.index, k, "vacuous", (str(e),)))
            continue
        out.append(_verdict(theorem_id, ctx.index, k, lhs, rhs, ctx.tau_eq, notes))
    return out


def _family_filtered(ctx, cls, family, n_pairs, assume_class):
    """Theorems of ``family`` whose class matches the instance (or the assumed class)."""
    target = assume_class or cls.tag
    tids = [t for t in FAMILIES[family] if required_class(t) == target]
    if not tids:
        raise ClassMismatch(f"instance classified {cls.tag}; no {family} theorem applies")
    out = []
    for tid in tids:
        out += verify(ctx, tid, cls, n_pairs, assume_class)
    return out


def verify_structure_equations(ctx, cls, n_pairs=8, assume_class=None):
    return _family_filtered(ctx, cls, "structure", n_pairs, assume_class)


def verify_metric_connection(ctx, cls, n_pairs=8, assume_class=None):
    return _family_filtered(ctx, cls, "metric", n_pairs, assume_class)


def verify_integrability(ctx, cls, n_pairs=8, assume_class=None):
    return _family_filtered(ctx, cls, "integrability", n_pairs, assume_class)


def verify_foliations(ctx, cls, n_pairs=8, assume_class=None):
    return _family_filtered(ctx, cls, "foliation", n_pairs, assume_class)


def verify_invariance(ctx, cls, n_pairs=8, assume_class=None):
    return _family_filtered(ctx, cls, "invariance", n_pairs, assume_class)


# context construction


def seeded_fields(m: int, seed: int, center, count: int = 8) -> list[PolynomialField]:
    rng = np.random.default_rng(seed)
    return [PolynomialField.random(m, rng, center=center) for _ in range(count)]


def seeded_dist_coefs(m: int, ranks: dict, seed: int, center, count: int = 8) -> dict:
    rng = np.random.default_rng(seed + 1)
    return {
        part: [PolynomialField.random(m, rng, center=center, out_dim=rk) for _ in range(count)] if rk else []
        for part, rk in ranks.items()
    }


def build_context(
    frame: LocalFrame,
    P: GoldenStructure,
    index: int = 0,
    field_seed: int = 0,
    tau_eq: float = TAU_EQ,
    fault: Fault | None = None,
    gw: GaussWeingartenData | None = None,
) -> PointContext:
    d = frame.d
    gw = gw or compute_gw(frame)
    fields = seeded_fields(d.m, field_seed, d.u)
    coefs = seeded_dist_coefs(d.m, {"rad": d.r, "screen": d.m - d.r}, field_seed, d.u)
    gw_rhs, frame_lhs = gw, frame
    if fault is not None and fault.kind == "reseed_stencil":
        bad = ReseededFrame(frame, seed=1000 + index)
        gw_rhs = compute_gw(bad)
        if fault.family in ("structure", "integrability"):
            frame_lhs = bad  # distribution fields are built from the incoherent frame too
    return PointContext(
        frame=frame,
        gw=gw,
        P=P,
        fields=fields,
        dist_coefs=coefs,
        index=index,
        tau_eq=tau_eq,
        fault=fault,
        gw_rhs=gw_rhs,
        frame_lhs=frame_lhs,
    )
