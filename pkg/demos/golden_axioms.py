"""
Golden structures from product structures
=========================================

An involution F that is self-adjoint for the metric gives a golden
structure P = (I + sqrt5 F) / 2. Scaling by 1/sqrt2 instead does not.
"""

import numpy as np

from glsm.golden_structure import (
    PHI,
    ProductStructure,
    golden_eigensplit,
    golden_from_product,
    product_structure_from_split,
    verify_golden,
)
from glsm.linalg_core import BilinearForm

# split metric of signature (2, 2) and the product structure diag(1, 1, -1, -1)
g = BilinearForm(np.diag([1.0, -1.0, 1.0, -1.0]))
f = product_structure_from_split(2, 2)
p = golden_from_product(f)
print("P =\n", np.round(p.p_matrix, 6))
print("axiom residuals:", verify_golden(p, g).as_dict())

# eigenvalues are phi and 1 - phi, and the eigenspaces come from spectral projectors
vphi, vconj = golden_eigensplit(p)
print(f"dim V_phi = {vphi.rank}, dim V_(1-phi) = {vconj.rank}, trace = {np.trace(p.p_matrix):.12f}")
print(f"expected trace        = {PHI * vphi.rank + (1 - PHI) * vconj.rank:.12f}")

# the 1/sqrt2 scaling breaks P^2 = P + I
bad = golden_from_product(ProductStructure(np.diag([1.0, -1.0])), coefficient=1 / np.sqrt(2))
print("1/sqrt2 variant:", verify_golden(bad, BilinearForm(np.eye(2))).as_dict())
