"""
Influence functions
===================

The MD influence function is a bounded step function of the contaminating
point, while the ML influence function grows linearly out to the ends of the
support.
"""

from binom_mde import (BinomialModel, influence_md, influence_md_bound,
                       influence_ml)

model = BinomialModel(20)
for p in (0.3, 0.5):
    print(f"p = {p}, analytic bound on |IF_MD| = {influence_md_bound(model, p):.4f}")
    print("  z    IF_MD    IF_ML")
    for z in model.support:
        print(f"{z:3d} {influence_md(model, p, z):8.4f} {influence_ml(model, p, z):8.4f}")
