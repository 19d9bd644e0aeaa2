"""
Searching for radical-transversal and transversal examples
==========================================================

A short seeded search in R^8_(4,4) with r = 2. For a null plane R the
Gram matrix of P R equals the pairing g(P R, R), so a null P R cannot pair
with R, and the search only ever reports its closest candidate.
"""

from dataclasses import replace

from glsm.errors import NotFound
from glsm.report import run_analysis
from glsm.search import near_miss, search_example
from glsm.theorem_verifiers import RADICAL_TRANSVERSAL, TRANSVERSAL

for cls in (RADICAL_TRANSVERSAL, TRANSVERSAL):
    try:
        search_example(cls, 8, (4, 4), 2, seed=0, budget=2000)
    except NotFound as e:
        print(f"{cls}: not found, best residual {e.best_residual:.3e}")

# the closest candidate still runs through the theorem checks with the class assumed
cfg = replace(near_miss(RADICAL_TRANSVERSAL, budget=1000), n_points=4, assume_class=RADICAL_TRANSVERSAL)
rep = run_analysis(cfg)
for t in rep.theorems:
    if t["id"].startswith("s3"):
        print(f"{t['id']:28s} pass {t['pass']:3d} fail {t['fail']:3d} vacuous {t['vacuous']:3d}")
