"""Exact binomial pmf/cdf and the coefficient functions used by the
minimum-distance asymptotics.

For a binomial(m, p) variable the cdf has the beta-integral form

.. math::

    F(k; p) = m_k \\int_0^{1-p} g_k(y)\\,dy, \\qquad
    m_k = (m - k)\\binom{m}{k}, \\quad g_k(y) = y^{m-k-1}(1-y)^k,

for ``0 <= k < m``, and the derivative coefficients are
``c_k(p) = m_k g_k(1 - p) = -dF(k; p)/dp``.  ``c_m`` is defined as 0 so
that sums over the full support need no special case.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "MAX_TRIALS",
    "BinomialModel",
    "binomial_coefficients",
    "pmf",
    "cdf",
    "cdf_beta_integral",
    "coefficient_c",
]

# C(1000, 500) ~ 2.7e299 still fits in a double; beyond that the
# coefficient table overflows.  Relative accuracy of the coefficients
# degrades roughly like k * 1e-16 for large m.
MAX_TRIALS = 1000


@lru_cache(maxsize=None)
def _coefficient_table(m: int) -> np.ndarray:
    out = np.empty(m + 1)
    c = 1.0
    out[0] = c
    for k in range(1, m + 1):
        c = c * (m - k + 1) / k
        out[k] = c
    out.setflags(write=False)
    return out


def binomial_coefficients(m: int) -> np.ndarray:
    """Return ``C(m, k)`` for ``k = 0..m`` as a read-only float array.

    Built by iterative multiplication, which is exact in double precision
    for ``m <= 25`` (and integer-valued up to ``m`` around 50).
    """
    if m < 0 or m > MAX_TRIALS:
        raise ValueError(f"m must lie in [0, {MAX_TRIALS}], got {m}")
    return _coefficient_table(int(m))


def _check_probability(p) -> None:
    if isinstance(p, (float, int)) and not isinstance(p, bool):
        if not 0.0 <= p <= 1.0:  # also rejects nan
            raise ValueError(f"probability outside [0, 1]: {p!r}")
        return
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"probability outside [0, 1]: {p!r}")


def _cdf_from_pmf(f: np.ndarray) -> np.ndarray:
    # Upper values come from 1 - (upper tail) so the cdf never overshoots 1.
    lower = np.cumsum(f, axis=-1)
    tail = np.cumsum(f[..., ::-1], axis=-1)[..., ::-1]
    upper = np.zeros_like(lower)
    upper[..., :-1] = 1.0 - tail[..., 1:]
    out = np.where(lower <= 0.5, lower, upper)
    out[..., -1] = 1.0
    return out


@dataclass(frozen=True)
class BinomialModel:
    """Binomial model with ``m`` trials per observation.

    Scalar methods take a support point ``k`` and a probability ``p``.
    The ``*_vector`` methods return the value at every ``k = 0..m``; given
    an array of probabilities of shape ``s`` they return shape
    ``s + (m + 1,)``.
    """

    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m:
            raise TypeError(f"m must be an integer, got {self.m!r}")
        if not 1 <= self.m <= MAX_TRIALS:
            raise ValueError(f"m must lie in [1, {MAX_TRIALS}], got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.m + 1)

    def check_support(self, k) -> None:
        if isinstance(k, (int, np.integer)) and not isinstance(k, bool):
            if not 0 <= k <= self.m:
                raise ValueError(f"k outside support {{0..{self.m}}}: {k!r}")
            return
        arr = np.asarray(k)
        if arr.dtype.kind not in "iu":
            if not np.all(np.asarray(arr, dtype=float) == np.round(arr)):
                raise ValueError(f"support points must be integers, got {k!r}")
        if np.any(arr < 0) or np.any(arr > self.m):
            raise ValueError(f"k outside support {{0..{self.m}}}: {k!r}")

    @property
    def m_k(self) -> np.ndarray:
        """``(m - k) C(m, k)`` for ``k = 0..m`` (zero at ``k = m``)."""
        m = self.m
        return (m - np.arange(m + 1)) * binomial_coefficients(m)

    # -- vector forms ------------------------------------------------------

    def pmf_vector(self, p) -> np.ndarray:
        _check_probability(p)
        p = np.asarray(p, dtype=float)[..., None]
        k = np.arange(self.m + 1)
        return binomial_coefficients(self.m) * p**k * (1.0 - p) ** (self.m - k)

    def cdf_vector(self, p) -> np.ndarray:
        return _cdf_from_pmf(self.pmf_vector(p))

    def c_vector(self, p) -> np.ndarray:
        _check_probability(p)
        p = np.asarray(p, dtype=float)[..., None]
        m = self.m
        k = np.arange(m)
        out = np.zeros(p.shape[:-1] + (m + 1,))
        out[..., :m] = self.m_k[:m] * (1.0 - p) ** (m - k - 1) * p**k
        return out

    # -- scalar forms ------------------------------------------------------

    def pmf(self, k: int, p: float) -> float:
        return pmf(self, k, p)

    def cdf(self, k: int, p: float) -> float:
        return cdf(self, k, p)

    def cdf_beta_integral(self, k: int, p: float) -> float:
        return cdf_beta_integral(self, k, p)

    def coefficient_c(self, k: int, p: float) -> float:
        return coefficient_c(self, k, p)


def pmf(model: BinomialModel, k: int, p: float) -> float:
    """Probability mass ``C(m, k) p^k (1 - p)^(m - k)``."""
    model.check_support(k)
    _check_probability(p)
    m = model.m
    return float(binomial_coefficients(m)[k] * p**k * (1.0 - p) ** (m - k))


def cdf(model: BinomialModel, k: int, p: float) -> float:
    """``P(X <= k)`` by summing the pmf; exactly 1 at ``k = m``."""
    model.check_support(k)
    if k == model.m:
        _check_probability(p)
        return 1.0
    return float(model.cdf_vector(p)[k])


@lru_cache(maxsize=None)
def _gauss_legendre(npts: int):
    return np.polynomial.legendre.leggauss(npts)


def cdf_beta_integral(model: BinomialModel, k: int, p: float) -> float:
    """Evaluate the cdf through ``m_k * integral_0^{1-p} g_k(y) dy``.

    ``g_k`` is a polynomial of degree ``m - 1``, so Gauss-Legendre with
    ``ceil(m / 2)`` nodes integrates it exactly (up to rounding).
    """
    model.check_support(k)
    _check_probability(p)
    m = model.m
    if k == m:
        return 1.0
    upper = 1.0 - p
    if upper == 0.0:
        return 0.0
    nodes, weights = _gauss_legendre(max(1, (m + 1) // 2))
    y = 0.5 * upper * (nodes + 1.0)
    g = y ** (m - k - 1) * (1.0 - y) ** k
    return float(model.m_k[k] * 0.5 * upper * np.dot(weights, g))


def coefficient_c(model: BinomialModel, k: int, p: float) -> float:
    """``c_k(p) = m_k (1 - p)^(m-k-1) p^k``, i.e. ``-dF(k; p)/dp``; 0 at ``k = m``."""
    model.check_support(k)
    _check_probability(p)
    m = model.m
    if k == m:
        return 0.0
    return float(model.m_k[k] * (1.0 - p) ** (m - k - 1) * p**k)
