"""
The Minkowski light cone
========================

Decompose the tangent space of R^3_1 along the future light cone, extract the
Gauss-Weingarten data and check that the transversal part of the second
fundamental form does not depend on the screen.
"""

import numpy as np

from glsm.catalog import entry
from glsm.gauss_weingarten import (
    LocalFrame,
    compute_gw,
    identity_residuals,
    reconstruction_residual,
    screen_independence,
)
from glsm.geometry_engine import PolynomialField
from glsm.lightlike_bundles import classify, decompose, decomposition_residuals

cfg = entry("light-cone").config
amb, imm = cfg.ambient(), cfg.immersion()
u = np.array([1.2, 0.4])

d = decompose(amb, imm, u)
print("class:", classify(d), " (r, m, k) =", (d.r, d.m, d.k))
print("radical direction:", np.round(d.rad.basis[:, 0], 6))
print("lightlike transversal:", np.round(d.ltr.basis[:, 0], 6))
print("worst pairing/orthogonality residual:", max(decomposition_residuals(d).values()))

# second fundamental form and shape operators at u
frame = LocalFrame(amb, imm, d)
gw = compute_gw(frame)
print("h^l coefficients:\n", np.round(gw.h_l[:, :, 0], 8))
for key, val in identity_residuals(gw).items():
    print(f"  {key:16s} {val:.2e}")

# reconstruction of the ambient derivative for a few random fields
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(8):
    w, v = PolynomialField.random(2, rng, u), PolynomialField.random(2, rng, u)
    worst = max(worst, reconstruction_residual(frame, gw, w, v))
print("reconstruction residual:", f"{worst:.2e}")

# five random screens
si = screen_independence(amb, imm, u)
print(f"g(h, xi) spread {si.hl_coefficients:.1e}, ambient h spread {si.ambient_vectors:.2f}")
