"""Reproducible sampling from the clean and the gross-error binomial model.

Every replicate gets its own generator, addressed by
``(master_seed, stream_index)`` through :class:`numpy.random.SeedSequence`
spawn keys, so a replicate's draws do not depend on which worker runs it
or in which order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .binomial_model import BinomialModel

__all__ = [
    "ContaminatedModel",
    "RngStream",
    "derive_stream",
    "contaminated_cdf",
    "sample_binomial",
    "sample_contaminated",
]


@dataclass(frozen=True)
class ContaminatedModel:
    """``(1 - nu) Binomial(m, p) + nu * point mass at z``."""

    base: BinomialModel
    p: float
    nu: float = 0.0
    z: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {self.nu}")
        self.base.check_support(self.z)

    @property
    def m(self) -> int:
        return self.base.m


@dataclass
class RngStream:
    """A single-owner random stream tied to ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int
    generator: np.random.Generator

    def uniforms(self, count: int) -> np.ndarray:
        return self.generator.random(count)


def derive_stream(master_seed: int, stream_index: int) -> RngStream:
    """Independent, reproducible sub-stream number ``stream_index``."""
    if stream_index < 0:
        raise ValueError("stream_index must be non-negative")
    seq = np.random.SeedSequence(entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
                                 spawn_key=(int(stream_index),))
    return RngStream(int(master_seed), int(stream_index),
                     np.random.Generator(np.random.PCG64(seq)))


def contaminated_cdf(cm: ContaminatedModel, k: int) -> float:
    """``(1 - nu) F(k; p) + nu I(k >= z)``."""
    cm.base.check_support(k)
    if k == cm.m:
        return 1.0
    return (1.0 - cm.nu) * cm.base.cdf(k, cm.p) + cm.nu * float(k >= cm.z)


@lru_cache(maxsize=256)
def _cdf_table(m: int, p: float) -> np.ndarray:
    table = BinomialModel(m).cdf_vector(p)
    table.setflags(write=False)
    return table


def sample_binomial(model: BinomialModel, p: float, count: int,
                    rng: RngStream) -> np.ndarray:
    """``count`` draws by inverse-cdf lookup; one uniform per draw."""
    if count < 1:
        raise ValueError("count must be at least 1")
    table = _cdf_table(model.m, float(p))
    u = rng.uniforms(count)
    return np.searchsorted(table, u, side="right").astype(np.int64)


def sample_contaminated(cm: ContaminatedModel, count: int,
                        rng: RngStream) -> np.ndarray:
    """Draws from the contaminated model.

    Draw order: ``count`` branch uniforms first (``u < nu`` emits ``z``),
    then ``count`` uniforms for the clean inverse-cdf draws.  With
    ``nu == 0`` no branch uniforms are consumed, so the output is
    bitwise identical to :func:`sample_binomial` on the same stream.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if cm.nu == 0.0:
        return sample_binomial(cm.base, cm.p, count, rng)
    gross = rng.uniforms(count) < cm.nu
    clean = sample_binomial(cm.base, cm.p, count, rng)
    return np.where(gross, cm.z, clean).astype(np.int64)
