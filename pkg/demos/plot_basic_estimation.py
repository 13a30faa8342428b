"""
Estimating a success probability
================================

Draw binomial counts, then compare the minimum-distance, maximum-likelihood
and E-estimates on the same data.
"""

import numpy as np

from binom_mde import (BinomialModel, Sample, confidence_interval, derive_stream,
                       estimate_e, estimate_md, estimate_ml, sample_binomial)

model = BinomialModel(10)
x = sample_binomial(model, 0.3, 100, derive_stream(2024, 0))
sample = Sample(x, model)
print("counts per support point:", np.bincount(x, minlength=11))

# %%
# The three estimators share the sample.  The MD estimate minimises the
# squared distance between the empirical and model cdf over the support.

for name, est in [("MD", estimate_md(sample)), ("ML", estimate_ml(sample)),
                  ("E", estimate_e(sample))]:
    print(f"{name:>2}: p_hat = {est.p_hat:.6f}")

# %%
# A Wald interval built on the sandwich variance of the MD estimator

lo, hi, degenerate = confidence_interval(sample, 0.95)
print(f"95% interval: [{lo:.4f}, {hi:.4f}]", "(degenerate)" if degenerate else "")

# %%
# One gross error at the top of the support moves ML further than MD

x_bad = x.copy()
x_bad[:3] = 10
bad = Sample(x_bad, model)
print(f"after 3 outliers: MD {estimate_md(bad).p_hat:.6f}, ML {estimate_ml(bad).p_hat:.6f}")
