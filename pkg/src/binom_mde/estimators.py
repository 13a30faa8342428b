"""Point estimators of the binomial success probability.

Three estimators share one bounded scalar minimizer:

* ``estimate_md`` minimizes the discrete Cramér-von Mises distance
  ``L(p) = sum_k [sum_i d_i (I(X_i <= k) - F(k; p))]^2``,
* ``estimate_ml`` is the closed-form sample mean over ``m``,
* ``estimate_e`` minimizes the likelihood disparity built on the
  truncated ``x log x`` function ``rho``.

All searches run on ``[EPS, 1 - EPS]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .binomial_model import BinomialModel, binomial_coefficients

__all__ = [
    "EPS",
    "DEFAULT_TOL",
    "GRID_POINTS",
    "Method",
    "Sample",
    "WeightVector",
    "EstimateResult",
    "DisparityParams",
    "NonFiniteObjectiveError",
    "cvm_distance",
    "estimate_md",
    "estimate_ml",
    "rho",
    "likelihood_disparity",
    "estimate_e",
    "minimize_scalar",
]

EPS = 1e-6
DEFAULT_TOL = 1e-9
GRID_POINTS = 201
_GOLDEN = 0.3819660112501051


class Method(str, enum.Enum):
    MD = "MD"
    ML = "ML"
    E = "E"


class NonFiniteObjectiveError(ArithmeticError):
    """Raised when the objective returns NaN or infinity."""

    def __init__(self, x: float, value: float):
        super().__init__(f"objective is not finite at x={x!r} (value {value!r})")
        self.x = x
        self.value = value


@dataclass(frozen=True)
class Sample:
    """Observed counts ``X_1..X_n``, each in ``{0..m}``."""

    observations: np.ndarray
    model: BinomialModel
    counts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        obs = np.asarray(self.observations)
        if obs.ndim != 1 or obs.size == 0:
            raise ValueError("a sample needs at least one observation")
        if obs.dtype.kind not in "iu":
            if not np.all(obs == np.round(obs)):
                raise ValueError("observations must be integers")
        obs = obs.astype(np.int64)
        if obs.min() < 0 or obs.max() > self.model.m:
            raise ValueError(f"observations must lie in {{0..{self.model.m}}}")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)
        counts = np.bincount(obs, minlength=self.model.m + 1)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_values(cls, values: Sequence[int], m: int) -> "Sample":
        return cls(np.asarray(values), BinomialModel(m))

    @property
    def n(self) -> int:
        return int(self.observations.size)

    @property
    def m(self) -> int:
        return self.model.m

    def empirical_pmf(self) -> np.ndarray:
        return self.counts / self.n


@dataclass(frozen=True)
class WeightVector:
    """Observation weights ``d_i`` with ``sum d_i^2 = 1``."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if abs(float(np.dot(d, d)) - 1.0) > 1e-10:
            raise ValueError("weights must satisfy sum(d**2) == 1 within 1e-10")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / math.sqrt(n)))

    def __len__(self):
        return self.d.size

    @property
    def max_sq(self) -> float:
        return float(np.max(self.d**2))

    @property
    def delta(self) -> float:
        """``n * mean(d)``; equals ``sqrt(n)`` for uniform weights."""
        return float(self.d.sum())


@dataclass(frozen=True)
class EstimateResult:
    p_hat: float
    method: Method
    objective: float
    converged: bool
    at_boundary: bool


@dataclass(frozen=True)
class DisparityParams:
    """Knots of the truncated ``x log x`` function.

    The defaults (0.8, 1.25) are symmetric on the log-ratio scale and give
    an E-estimator about 20% less efficient than ML on clean data.
    """

    c1: float = 0.8
    c2: float = 1.25

    def __post_init__(self):
        if not (0.0 < self.c1 < self.c2) or not math.isfinite(self.c2):
            raise ValueError(f"need 0 < c1 < c2 < inf, got c1={self.c1}, c2={self.c2}")


# ---------------------------------------------------------------------------
# scalar minimizer


def _brent(f, a, b, x, fx, tol, max_iter=200):
    """Brent's parabolic/golden minimizer on ``[a, b]`` started at ``x``.

    Absolute tolerance only: the final bracket is at most ``tol`` wide.
    Returns ``(x, fx, converged)``.
    """
    tol1 = 0.25 * tol
    tol2 = 2.0 * tol1
    w = v = x
    fw = fv = fx
    d = e = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            return x, fx, True
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            pnum = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                pnum = -pnum
            q = abs(q)
            etemp = e
            e = d
            if abs(pnum) < abs(0.5 * q * etemp) and q * (a - x) < pnum < q * (b - x):
                d = pnum / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < mid else -tol1
                golden = False
        if golden:
            e = (a - x) if x >= mid else (b - x)
            d = _GOLDEN * e
        u = x + d if abs(d) >= tol1 else x + math.copysign(tol1, d)
        fu = f(u)
        if not math.isfinite(fu):
            raise NonFiniteObjectiveError(u, fu)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx, False


def _bracketed_minimum(objective, lo, hi, tol, grid_points=GRID_POINTS,
                       grid_values=None):
    xs = np.linspace(lo, hi, grid_points)
    if grid_values is None:
        vals = np.array([objective(float(x)) for x in xs])
    else:
        vals = np.asarray(grid_values, dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        j = int(np.argmax(bad))
        raise NonFiniteObjectiveError(float(xs[j]), float(vals[j]))
    i = int(np.argmin(vals))  # first occurrence: ties go to the smaller x
    x0, f0 = float(xs[i]), float(vals[i])
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid_points - 1)])
    x, fx, converged = _brent(objective, a, b, x0, f0, tol)
    if fx < f0:
        return x, fx, converged
    return x0, float(objective(x0)), converged


def minimize_scalar(objective: Callable[[float], float], lo: float, hi: float,
                    tol: float = DEFAULT_TOL, *, grid_points: int = GRID_POINTS):
    """Globally minimize a function of one variable on ``[lo, hi]``.

    A ``grid_points`` scan picks the best grid node, then Brent's method
    refines inside the two neighbouring grid cells.  The refined point is
    kept only if it is strictly better than the grid node, so flat
    objectives return the smallest grid argument.

    Returns
    -------
    (argmin, min_value)

    Raises
    ------
    NonFiniteObjectiveError
        If the objective is NaN or infinite at an evaluated abscissa.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    x, fx, _ = _bracketed_minimum(objective, lo, hi, tol, grid_points)
    return x, fx


# ---------------------------------------------------------------------------
# cached evaluation tables on the search grid


@lru_cache(maxsize=64)
def _grid_tables(m: int, lo: float = EPS, hi: float = 1.0 - EPS,
                 npts: int = GRID_POINTS):
    xs = np.linspace(lo, hi, npts)
    pmf = BinomialModel(m).pmf_vector(xs)
    cdf = np.cumsum(pmf, axis=-1)
    cdf[:, -1] = 1.0
    for arr in (pmf, cdf):
        arr.setflags(write=False)
    return pmf, cdf


def _pmf_row(m: int, p: float) -> np.ndarray:
    k = np.arange(m + 1)
    return binomial_coefficients(m) * p**k * (1.0 - p) ** (m - k)


def _check_p(p) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in the open interval (0, 1), got {p!r}")


# ---------------------------------------------------------------------------
# minimum distance


def _weighted_ecdf(sample: Sample, weights: WeightVector):
    if len(weights) != sample.n:
        raise ValueError(
            f"weights length {len(weights)} does not match sample size {sample.n}")
    a = np.cumsum(np.bincount(sample.observations, weights=weights.d,
                              minlength=sample.m + 1))
    return a[:-1], weights.delta


def cvm_distance(sample: Sample, weights: WeightVector, p: float) -> float:
    """Discrete Cramér-von Mises distance between the weighted empirical
    cdf and ``F(.; p)``.  The ``k = m`` summand vanishes and is skipped."""
    _check_p(p)
    a, dsum = _weighted_ecdf(sample, weights)
    r = a - dsum * np.cumsum(_pmf_row(sample.m, p))[:-1]
    return float(np.dot(r, r))


def _md_objective(m, a, dsum):
    coef = binomial_coefficients(m)[:-1]
    k = np.arange(m)
    mk = m - k

    def objective(p):
        r = a - dsum * np.cumsum(coef * p**k * (1.0 - p) ** mk)
        return float(np.dot(r, r))

    return objective


def _boundary(p_hat, tol):
    return p_hat <= EPS + tol or p_hat >= 1.0 - EPS - tol


def estimate_md(sample: Sample, weights: Optional[WeightVector] = None,
                tol: float = DEFAULT_TOL) -> EstimateResult:
    """Minimum-distance estimate; uniform weights ``1/sqrt(n)`` by default."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if weights is None:
        weights = WeightVector.uniform(sample.n)
    a, dsum = _weighted_ecdf(sample, weights)
    m = sample.m
    _, cdf_grid = _grid_tables(m)
    r = a - dsum * cdf_grid[:, :-1]
    grid_values = np.einsum("ij,ij->i", r, r)
    x, fx, converged = _bracketed_minimum(
        _md_objective(m, a, dsum), EPS, 1.0 - EPS, tol, grid_values=grid_values)
    return EstimateResult(x, Method.MD, fx, converged, _boundary(x, tol))


# ---------------------------------------------------------------------------
# maximum likelihood


def estimate_ml(sample: Sample) -> EstimateResult:
    """``mean(X) / m`` clamped to ``[EPS, 1 - EPS]``."""
    raw = float(sample.observations.mean()) / sample.m
    p_hat = min(max(raw, EPS), 1.0 - EPS)
    return EstimateResult(p_hat, Method.ML, 0.0, True, p_hat != raw)


# ---------------------------------------------------------------------------
# E-estimator


def rho(x, params: DisparityParams = DisparityParams()):
    """Truncated ``x log x``: linear below ``c1`` and above ``c2``.

    Continuously differentiable at both knots; ``0 log 0 = 0``.
    Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("rho is defined for x >= 0 only")
    c1, c2 = params.c1, params.c2
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = np.where(arr > 0, arr * np.log(np.where(arr > 0, arr, 1.0)), 0.0)
    out = np.where(arr < c1, (math.log(c1) + 1.0) * arr - c1,
                   np.where(arr > c2, (math.log(c2) + 1.0) * arr - c2, mid))
    return float(out) if out.ndim == 0 else out


def _disparity_terms(fn, f, c1, c2):
    """``rho(fn / f) * f`` written without the division.

    Stays finite when ``f`` underflows to 0 near the search boundary.
    """
    lo = fn < c1 * f
    hi = fn > c2 * f
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = np.where(fn > 0, fn * np.log(np.where(fn > 0, fn, 1.0) / f), 0.0)
    return np.where(lo, (math.log(c1) + 1.0) * fn - c1 * f,
                    np.where(hi, (math.log(c2) + 1.0) * fn - c2 * f, mid))


def likelihood_disparity(sample: Sample, p: float,
                         params: DisparityParams = DisparityParams()) -> float:
    """``sum_k rho(f_n(k) / f(k; p)) f(k; p)`` with ``f_n`` the empirical pmf."""
    _check_p(p)
    f = _pmf_row(sample.m, p)
    return float(_disparity_terms(sample.empirical_pmf(), f, params.c1, params.c2).sum())


def estimate_e(sample: Sample, params: DisparityParams = DisparityParams(),
               tol: float = DEFAULT_TOL) -> EstimateResult:
    """Minimum likelihood-disparity (E-) estimate."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = sample.m
    fn = sample.empirical_pmf()
    c1, c2 = params.c1, params.c2
    pmf_grid, _ = _grid_tables(m)
    grid_values = _disparity_terms(fn, pmf_grid, c1, c2).sum(axis=1)

    def objective(p):
        return float(_disparity_terms(fn, _pmf_row(m, p), c1, c2).sum())

    x, fx, converged = _bracketed_minimum(objective, EPS, 1.0 - EPS, tol,
                                          grid_values=grid_values)
    return EstimateResult(x, Method.E, fx, converged, _boundary(x, tol))
