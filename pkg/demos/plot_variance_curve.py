"""
Asymptotic variance across p
============================

"""

import numpy as np

from binom_mde import BinomialModel, variance_curve

for m in (10, 20):
    curve = variance_curve(BinomialModel(m))
    ratio = curve.avar_md / curve.avar_ml
    print(f"m = {m}: peak at p = {curve.p[np.argmax(curve.avar_md)]}, "
          f"MD/ML variance ratio in [{ratio.min():.4f}, {ratio.max():.4f}]")

# a coarse text rendering of the m = 10 curves
curve = variance_curve(BinomialModel(10), np.round(np.arange(1, 20) * 0.05, 2))
for p, md, ml in zip(curve.p, curve.avar_md, curve.avar_ml):
    print(f"{p:4.2f} {md:.5f} {ml:.5f} " + "#" * int(md * 1500))
