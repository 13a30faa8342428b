"""Closed-form large-sample quantities for the minimum-distance estimator.

With uniform weights the MD estimator solves ``sum_i phi(X_i, p) = 0`` for

    phi(y, p) = sum_k c_k(p) [I(y <= k) - F(k; p)],

and ``E[d phi / d p] = sum_k c_k(p)^2``.  Everything below follows from
that estimating equation.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .binomial_model import BinomialModel
from .estimators import EPS, Sample, WeightVector, estimate_md

__all__ = [
    "AsymptoticSummary",
    "ConfidenceInterval",
    "VarianceCurve",
    "covariance_C",
    "gamma",
    "asymptotic_variance_md",
    "asymptotic_variance_ml",
    "asymptotic_summary",
    "printed_variance_forms",
    "influence_md",
    "influence_md_bound",
    "influence_ml",
    "confidence_interval",
    "variance_curve",
    "quadratic_terms",
    "quadratic_approximation_gap",
]


class AsymptoticSummary(NamedTuple):
    C: float
    Gamma: float
    avar: float
    avar_ml: float


class ConfidenceInterval(NamedTuple):
    lo: float
    hi: float
    degenerate: bool


class VarianceCurve(NamedTuple):
    p: np.ndarray
    avar_md: np.ndarray
    avar_ml: np.ndarray


def _open_p(p):
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")


def covariance_C(model: BinomialModel, p: float) -> float:
    """``Var(phi(X, p))`` under ``F(.; p)``:
    ``sum_ij c_i c_j [F(min(i, j)) - F(i) F(j)]``."""
    _open_p(p)
    c = model.c_vector(p)
    F = model.cdf_vector(p)
    k = np.arange(model.m + 1)
    cov = F[np.minimum.outer(k, k)] - np.outer(F, F)
    return float(c @ cov @ c)


def gamma(model: BinomialModel, p: float) -> float:
    """``2 sum_k c_k(p)^2``."""
    _open_p(p)
    c = model.c_vector(p)
    return 2.0 * float(np.dot(c, c))


def asymptotic_variance_md(model: BinomialModel, p: float) -> float:
    """Limit of ``n Var(p_MD)`` for uniform weights: ``C / (sum c_k^2)^2``."""
    c2 = 0.5 * gamma(model, p)
    return covariance_C(model, p) / c2**2


def asymptotic_variance_ml(model: BinomialModel, p: float) -> float:
    _open_p(p)
    return p * (1.0 - p) / model.m


def asymptotic_summary(model: BinomialModel, p: float) -> AsymptoticSummary:
    C = covariance_C(model, p)
    G = gamma(model, p)
    return AsymptoticSummary(C, G, C / (0.5 * G) ** 2, asymptotic_variance_ml(model, p))


def printed_variance_forms(model: BinomialModel, p: float) -> dict:
    """Alternative variance expressions kept for comparison only.

    ``"C/Gamma^2"`` uses ``Gamma = 2 sum c_k^2`` directly, and
    ``"C/(4(sum c_k)^2)"`` uses the unsquared coefficient sum.  Neither
    matches simulation; ``"sandwich"`` is the one used everywhere else.
    """
    C = covariance_C(model, p)
    c = model.c_vector(p)
    return {
        "sandwich": C / float(np.dot(c, c)) ** 2,
        "C/Gamma^2": C / gamma(model, p) ** 2,
        "C/(4(sum c_k)^2)": C / (4.0 * float(c.sum()) ** 2),
    }


def influence_md(model: BinomialModel, p: float, z: int) -> float:
    """Influence function of the uniform-weight MD estimator at ``z``.

    ``-phi(z, p) / sum_k c_k^2 = -2 Gamma^{-1} sum_k c_k [I(z <= k) - F(k)]``.
    The sign makes a point mass at a large ``z`` pull the estimate up,
    as it does for the ML estimator (at ``m = 1`` both coincide).
    """
    _open_p(p)
    model.check_support(z)
    c = model.c_vector(p)
    F = model.cdf_vector(p)
    phi = float(np.dot(c, (z <= np.arange(model.m + 1)) - F))
    return -phi / float(np.dot(c, c))


def influence_md_bound(model: BinomialModel, p: float) -> float:
    """Analytic bound ``2 Gamma^{-1} sum_k c_k`` on ``|influence_md|``."""
    c = model.c_vector(p)
    return float(c.sum()) / float(np.dot(c, c))


def influence_ml(model: BinomialModel, p: float, z: int) -> float:
    model.check_support(z)
    return z / model.m - p


def confidence_interval(sample: Sample, level: float = 0.95,
                        tol: float = 1e-9) -> ConfidenceInterval:
    """Wald interval around the MD estimate with plug-in variance.

    ``degenerate`` is set when the estimate sits on the search boundary,
    where the plug-in variance collapses towards zero.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    est = estimate_md(sample, tol=tol)
    p_hat = min(max(est.p_hat, EPS), 1.0 - EPS)
    half = float(ndtri(0.5 * (1.0 + level))) * math.sqrt(
        asymptotic_variance_md(sample.model, p_hat) / sample.n)
    return ConfidenceInterval(max(0.0, p_hat - half), min(1.0, p_hat + half),
                              est.at_boundary)


def variance_curve(model: BinomialModel,
                   p_grid: Optional[Sequence[float]] = None) -> VarianceCurve:
    """Asymptotic variances of the MD and ML estimators over a p-grid.

    Default grid is 0.001, 0.002, ..., 0.999.
    """
    if p_grid is None:
        p_grid = np.round(np.arange(1, 1000) * 0.001, 3)
    p = np.asarray(p_grid, dtype=float)
    if np.any(p <= 0) or np.any(p >= 1):
        raise ValueError("grid values must lie in (0, 1)")
    md = np.array([asymptotic_variance_md(model, float(x)) for x in p])
    return VarianceCurve(p, md, p * (1.0 - p) / model.m)


# ---------------------------------------------------------------------------
# local quadratic approximation of the distance


def quadratic_terms(sample: Sample, weights: WeightVector, p0: float):
    """Linear and quadratic coefficients of the distance around ``p0``.

    Returns ``(L(p0), S, W)`` with ``S = 2 D sum_k W_k c_k(p0)`` and
    ``W = 2 D^2 sum_k c_k(p0)^2``, where ``D = sum_i d_i`` and
    ``W_k = sum_i d_i (I(X_i <= k) - F(k; p0))``.  The quadratic
    approximation is ``L(p0) + (p - p0) S + (p - p0)^2 W / 2``, whose
    minimizer is ``p0 - S / W``.
    """
    _open_p(p0)
    model = sample.model
    dsum = weights.delta
    a = np.cumsum(np.bincount(sample.observations, weights=weights.d,
                              minlength=model.m + 1))
    resid = a - dsum * model.cdf_vector(p0)
    resid[-1] = 0.0
    c = model.c_vector(p0)
    return (float(np.dot(resid, resid)), 2.0 * dsum * float(np.dot(resid, c)),
            2.0 * dsum**2 * float(np.dot(c, c)))


def quadratic_approximation_gap(sample: Sample, p0: float, bound: float = 2.0,
                                points: int = 81) -> float:
    """``max_{|u| <= bound} |L(p0 + u/sqrt(n)) - Q(p0 + u/sqrt(n))|`` for
    uniform weights, evaluated on ``points`` equally spaced values of ``u``."""
    n = sample.n
    weights = WeightVector.uniform(n)
    L0, S, W = quadratic_terms(sample, weights, p0)
    u = np.linspace(-bound, bound, points)
    ps = p0 + u / math.sqrt(n)
    if np.any(ps <= 0) or np.any(ps >= 1):
        raise ValueError("local neighbourhood leaves (0, 1); increase n")
    model = sample.model
    a = np.cumsum(np.bincount(sample.observations, weights=weights.d,
                              minlength=model.m + 1))[:-1]
    resid = a - weights.delta * model.cdf_vector(ps)[:, :-1]
    L = np.einsum("ij,ij->i", resid, resid)
    Q = L0 + (ps - p0) * S + 0.5 * (ps - p0) ** 2 * W
    return float(np.max(np.abs(L - Q)))
