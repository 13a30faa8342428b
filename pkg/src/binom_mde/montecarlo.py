"""Replicated simulation of the MD, ML and E estimators.

Each replicate ``r`` of a cell draws one sample from
``derive_stream(master_seed, r)`` and hands the same sample to every
requested estimator (paired design).  Replicates are independent, so a
cell can be split over worker processes without changing any result.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .binomial_model import MAX_TRIALS, BinomialModel
from .estimators import (DisparityParams, Method, Sample, estimate_e,
                         estimate_md, estimate_ml)
from .sampling import ContaminatedModel, derive_stream, sample_contaminated

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CellSummary",
    "summarize",
    "run_cell",
    "run_experiment",
    "parse_config",
    "load_config",
    "default_threads",
    "CSV_COLUMNS",
    "format_csv",
    "format_report_table",
]

THREADS_ENV = "BINOM_MDE_THREADS"
ESTIMATOR_ORDER = (Method.MD, Method.ML, Method.E)
DISTRIBUTIONS = ("clean", "contaminated")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation study; the defaults cover m in {10, 20} at p = 0.3."""

    m_values: Tuple[int, ...] = (10, 20)
    p_true: float = 0.3
    n_values: Tuple[int, ...] = (20, 40, 60, 80, 100)
    nu: float = 0.01
    z: Union[str, int] = "m"
    replications: int = 10_000
    estimators: Tuple[Method, ...] = ESTIMATOR_ORDER
    disparity: DisparityParams = DisparityParams()
    master_seed: int = 20240101
    distributions: Tuple[str, ...] = DISTRIBUTIONS

    def __post_init__(self):
        if not self.m_values:
            raise ConfigError("m must list at least one value")
        for m in self.m_values:
            if not 1 <= m <= MAX_TRIALS:
                raise ConfigError(f"m values must lie in [1, {MAX_TRIALS}], got {m}")
        if not 0.0 < self.p_true < 1.0:
            raise ConfigError("p_true must lie in (0, 1)")
        if not self.n_values or min(self.n_values) < 2:
            raise ConfigError("n values must all be >= 2")
        if not 0.0 <= self.nu < 1.0:
            raise ConfigError("nu must lie in [0, 1)")
        if self.replications < 2:
            raise ConfigError("replications must be >= 2")
        if not self.estimators:
            raise ConfigError("estimator set is empty")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("estimators listed twice")
        if not self.distributions or any(d not in DISTRIBUTIONS for d in self.distributions):
            raise ConfigError(f"distributions must be a subset of {DISTRIBUTIONS}")
        if self.z != "m":
            if isinstance(self.z, bool) or not isinstance(self.z, int):
                raise ConfigError("z must be 'm' or an integer")
            for m in self.m_values:
                if not 0 <= self.z <= m:
                    raise ConfigError(f"z={self.z} outside support of m={m}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def z_for(self, m: int) -> int:
        return m if self.z == "m" else int(self.z)


@dataclass(frozen=True)
class CellSummary:
    """Bias / spread of the estimates in one simulation cell.

    ``variance`` is the mean squared deviation about the mean estimate,
    so ``rmse**2 == bias**2 + variance`` up to rounding.
    """

    bias: float
    variance: float
    sd: float
    rmse: float
    replications: int
    estimator: Optional[Method] = None
    n: Optional[int] = None
    m: Optional[int] = None
    contaminated: bool = False
    p_true: Optional[float] = None
    nu: float = 0.0
    z: Optional[int] = None
    boundary_count: int = 0
    seed: Optional[int] = None


def summarize(estimates: Sequence[float], p_true: float, **tags) -> CellSummary:
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 1 or est.size < 2:
        raise ValueError("summarize needs at least two estimates")
    mean = est.mean()
    variance = float(np.mean((est - mean) ** 2))
    rmse = math.sqrt(float(np.mean((est - p_true) ** 2)))
    tags.setdefault("p_true", p_true)
    return CellSummary(float(mean - p_true), variance, math.sqrt(variance), rmse,
                       int(est.size), **tags)


# ---------------------------------------------------------------------------
# cell execution

Sampler = Callable[..., np.ndarray]


def _estimate(method: Method, sample: Sample, disparity: DisparityParams):
    if method is Method.MD:
        return estimate_md(sample)
    if method is Method.ML:
        return estimate_ml(sample)
    return estimate_e(sample, disparity)


def _run_block(cm: ContaminatedModel, n: int, methods: Tuple[Method, ...],
               disparity: DisparityParams, master_seed: int, start: int,
               stop: int, sampler: Sampler = sample_contaminated):
    p_hat = np.empty((stop - start, len(methods)))
    boundary = np.zeros((stop - start, len(methods)), dtype=bool)
    for i, r in enumerate(range(start, stop)):
        obs = sampler(cm, n, derive_stream(master_seed, r))
        sample = Sample(obs, cm.base)
        for j, method in enumerate(methods):
            res = _estimate(method, sample, disparity)
            p_hat[i, j] = res.p_hat
            boundary[i, j] = res.at_boundary
    return p_hat, boundary


def _blocks(replications: int, workers: int):
    size = max(1, math.ceil(replications / (4 * workers)))
    return [(s, min(s + size, replications)) for s in range(0, replications, size)]


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


def _ordered(methods: Iterable[Method]) -> Tuple[Method, ...]:
    methods = {Method(x) for x in methods}
    return tuple(x for x in ESTIMATOR_ORDER if x in methods)


def run_cell(m: int, p_true: float, n: int, contamination: Optional[Tuple[float, int]],
             estimators: Iterable[Method], disparity: DisparityParams = DisparityParams(),
             master_seed: int = 0, replications: int = 10_000, *,
             threads: int = 1, sampler: Sampler = sample_contaminated,
             executor: Optional[ProcessPoolExecutor] = None) -> List[CellSummary]:
    """Simulate one ``(m, p_true, n, contamination)`` cell.

    ``contamination`` is ``None`` for clean data or ``(nu, z)``.  Returns
    one summary per estimator in MD, ML, E order.  ``threads > 1`` (or an
    explicit ``executor``) splits the replicates across worker processes;
    results do not depend on the split.
    """
    methods = _ordered(estimators)
    if not methods:
        raise ConfigError("estimator set is empty")
    if replications < 2:
        raise ConfigError("replications must be >= 2")
    nu, z = contamination if contamination is not None else (0.0, 0)
    cm = ContaminatedModel(BinomialModel(m), p_true, nu, z)

    if executor is None and threads <= 1:
        p_hat, boundary = _run_block(cm, n, methods, disparity, master_seed,
                                     0, replications, sampler)
    else:
        own = executor is None
        pool = executor or ProcessPoolExecutor(max_workers=threads)
        try:
            futures = [pool.submit(_run_block, cm, n, methods, disparity, master_seed,
                                   a, b, sampler)
                       for a, b in _blocks(replications, max(threads, 1))]
            parts = [f.result() for f in futures]
        finally:
            if own:
                pool.shutdown()
        p_hat = np.concatenate([p for p, _ in parts])
        boundary = np.concatenate([b for _, b in parts])

    out = []
    for j, method in enumerate(methods):
        out.append(summarize(
            p_hat[:, j], p_true, estimator=method, n=n, m=m,
            contaminated=contamination is not None, nu=nu,
            z=z if contamination is not None else None,
            boundary_count=int(boundary[:, j].sum()), seed=master_seed))
    return out


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None) -> List[CellSummary]:
    """All cells of ``config`` ordered by m, distribution, n, estimator."""
    if threads is None:
        threads = default_threads()
    cells = []
    for m in sorted(config.m_values):
        for dist in (d for d in DISTRIBUTIONS if d in config.distributions):
            contamination = (config.nu, config.z_for(m)) if dist == "contaminated" else None
            for n in sorted(config.n_values):
                cells.append((m, n, contamination))

    rows: List[CellSummary] = []
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for m, n, contamination in cells:
            rows.extend(run_cell(m, config.p_true, n, contamination, config.estimators,
                                 config.disparity, config.master_seed,
                                 config.replications, threads=threads, executor=pool))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


# ---------------------------------------------------------------------------
# configuration files
#
#   # comment
#   key = value            lists are comma separated
#
# keys: m, p_true, n, nu, z (integer or "m"), replications,
#       estimators (MD, ML, E), c1, c2, seed,
#       distributions (clean, contaminated)

_KEYS = {"m", "p_true", "n", "nu", "z", "replications", "estimators", "c1", "c2",
         "seed", "distributions"}


def _ints(key, text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {text!r}")


def _float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}")


def parse_config(text: str) -> ExperimentConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    kwargs = {}
    if "m" in raw:
        kwargs["m_values"] = _ints("m", raw["m"])
    if "n" in raw:
        kwargs["n_values"] = _ints("n", raw["n"])
    if "p_true" in raw:
        kwargs["p_true"] = _float("p_true", raw["p_true"])
    if "nu" in raw:
        kwargs["nu"] = _float("nu", raw["nu"])
    if "z" in raw:
        kwargs["z"] = "m" if raw["z"].lower() == "m" else _ints("z", raw["z"])[0]
    if "replications" in raw:
        kwargs["replications"] = _ints("replications", raw["replications"])[0]
    if "seed" in raw:
        kwargs["master_seed"] = _ints("seed", raw["seed"])[0]
    if "estimators" in raw:
        try:
            kwargs["estimators"] = _ordered(
                t.strip().upper() for t in raw["estimators"].split(",") if t.strip())
        except ValueError as exc:
            raise ConfigError(f"estimators: {exc}")
    if "distributions" in raw:
        kwargs["distributions"] = tuple(
            t.strip().lower() for t in raw["distributions"].split(",") if t.strip())
    if "c1" in raw or "c2" in raw:
        base = DisparityParams()
        try:
            kwargs["disparity"] = DisparityParams(
                _float("c1", raw["c1"]) if "c1" in raw else base.c1,
                _float("c2", raw["c2"]) if "c2" in raw else base.c2)
        except ValueError as exc:
            raise ConfigError(str(exc))
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config(text)


# ---------------------------------------------------------------------------
# output

CSV_COLUMNS = ("distribution", "m", "p_true", "nu", "z", "n", "estimator", "bias",
               "variance", "sd", "rmse", "boundary_count", "reps", "seed")


def _g(x: float) -> str:
    return format(float(x), ".17g")


def row_values(row: CellSummary) -> dict:
    return {
        "distribution": "contaminated" if row.contaminated else "clean",
        "m": row.m,
        "p_true": row.p_true,
        "nu": row.nu if row.contaminated else 0.0,
        "z": row.z if row.contaminated else None,
        "n": row.n,
        "estimator": row.estimator.value if row.estimator is not None else None,
        "bias": row.bias,
        "variance": row.variance,
        "sd": row.sd,
        "rmse": row.rmse,
        "boundary_count": row.boundary_count,
        "reps": row.replications,
        "seed": row.seed,
    }


def format_csv(rows: Sequence[CellSummary]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        vals = row_values(row)
        cells = []
        for key in CSV_COLUMNS:
            v = vals[key]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(_g(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def format_report_table(rows: Sequence[CellSummary]) -> str:
    """Plain-text Bias / SE / RMSE tables, one block per (m, distribution).

    The "SE(paper)" column holds the variance of the estimates, not its
    square root.
    """
    groups = {}
    for row in rows:
        groups.setdefault((row.m, row.contaminated), []).append(row)
    blocks = []
    for (m, contaminated), members in groups.items():
        methods = [x for x in ESTIMATOR_ORDER if any(r.estimator is x for r in members)]
        title = f"{'contaminated' if contaminated else 'clean'} m={m}"
        head = "n".rjust(5) + "".join(
            f"  {x.value + ' Bias':>10} {x.value + ' SE(paper)':>13} {x.value + ' RMSE':>10}"
            for x in methods)
        lines = [title, head]
        for n in sorted({r.n for r in members}):
            line = str(n).rjust(5)
            for x in methods:
                r = next(r for r in members if r.n == n and r.estimator is x)
                line += f"  {r.bias:>10.4f} {r.variance:>13.2e} {r.rmse:>10.4f}"
            lines.append(line)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
