"""Quick oracle checks run by ``binom-mde selftest``."""

from __future__ import annotations

import sys

import numpy as np

from .asymptotics import influence_md
from .binomial_model import BinomialModel
from .estimators import EPS, Sample, WeightVector, cvm_distance, estimate_md
from .sampling import derive_stream, sample_binomial


def _check_cdf_identity():
    worst = 0.0
    for m in range(1, 26):
        model = BinomialModel(m)
        for p in np.linspace(0.01, 0.99, 99):
            F = model.cdf_vector(p)
            for k in range(m):
                worst = max(worst, abs(model.cdf_beta_integral(k, p) - F[k]))
    return worst <= 1e-10, f"max |beta integral - summed cdf| = {worst:.2e}"


def _check_grid_dominance(npts=100_001):
    worst = -np.inf
    grid = np.linspace(EPS, 1 - EPS, npts)
    for seed, (m, n) in enumerate([(10, 20), (10, 100), (20, 20), (20, 100)]):
        model = BinomialModel(m)
        sample = Sample(sample_binomial(model, 0.3, n, derive_stream(99, seed)), model)
        w = WeightVector.uniform(n)
        a = np.cumsum(np.bincount(sample.observations, weights=w.d, minlength=m + 1))[:-1]
        r = a - w.delta * model.cdf_vector(grid)[:, :-1]
        grid_min = float(np.min(np.einsum("ij,ij->i", r, r)))
        est = estimate_md(sample, w)
        worst = max(worst, cvm_distance(sample, w, est.p_hat) - grid_min)
    return worst <= 1e-12, f"max L(p_hat) - grid minimum = {worst:.2e}"


def _check_if_mean_zero():
    worst = 0.0
    for m in (1, 5, 10, 20, 25):
        model = BinomialModel(m)
        for p in (0.05, 0.3, 0.5, 0.8):
            f = model.pmf_vector(p)
            mean = sum(f[z] * influence_md(model, p, z) for z in range(m + 1))
            worst = max(worst, abs(mean))
    return worst <= 1e-10, f"max |E[IF_MD]| = {worst:.2e}"


CHECKS = [
    ("cdf identity", _check_cdf_identity),
    ("grid-search dominance", _check_grid_dominance),
    ("influence mean zero", _check_if_mean_zero),
]


def run_selftest(out=sys.stdout) -> int:
    """Run every check, print one line each, return the failure count."""
    failures = 0
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # noqa: BLE001
            ok, detail = False, f"raised {exc!r}"
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=out)
    return failures
