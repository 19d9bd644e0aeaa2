"""
Why a rank-one radical never works
==================================

For a null vector xi, P^2 = P + I and self-adjointness give
g(P xi, P xi) = g(P xi, xi). If P xi is to be a null transversal, the
pairing with xi must vanish, but a transversal pairs with xi to 1.
"""

import numpy as np
from scipy.linalg import expm

from glsm.geometry_engine import AmbientManifold, Immersion
from glsm.golden_structure import ProductStructure, golden_from_product
from glsm.lightlike_bundles import classify, decompose
from glsm.theorem_verifiers import classify_golden_submanifold, pairing_obstruction_check

rng = np.random.default_rng(11)
G = np.diag([1.0, 1.0, -1.0, -1.0])
a = rng.standard_normal((4, 4))
iso = expm(0.3 * G @ (a - a.T))  # metric isometry
F = iso @ np.diag([1.0, -1.0, 1.0, -1.0]) @ G @ iso.T @ G
amb = AmbientManifold(G, golden_from_product(ProductStructure(F)))

# a null vector and one more tangent direction orthogonal to it
xi = np.array([1.0, 0.0, 1.0, 0.0]) / np.sqrt(2)
s = np.array([0.0, 1.0, 0.0, 0.3])
imm = Immersion.linear(np.column_stack([xi, s]))
d = decompose(amb, imm, [0.0, 0.0])
print("class:", classify(d))

ob = pairing_obstruction_check(d, amb.golden)
print(f"g(P xi, xi)   = {ob.pairing[0, 0]: .6f}")
print(f"g(P xi, P xi) = {ob.gram[0, 0]: .6f}")
print("obstruction explains the failure:", ob.explains())
gc = classify_golden_submanifold(d, amb.golden)
print("golden class:", gc.tag)
for note in gc.notes:
    print("  -", note)
