"""Seeded Monte Carlo and expected-count measurement records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bayes import MeasurementRecord
from .errors import DomainError
from .probes import ProbeConfig, p_excited

__all__ = ["TrialSeed", "derived_seed", "generator", "sample_record", "expected_record", "BERNOULLI_LIMIT"]

_U64 = 2**64
# above this many repetitions the count is drawn by binomial inversion
BERNOULLI_LIMIT = 100_000


@dataclass(frozen=True)
class TrialSeed:
    """Key of a counter-based stream: (seed, stream) fixes every draw."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if int(value) != value or not 0 <= value < _U64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def substream(self, stream: int) -> TrialSeed:
        return TrialSeed(self.seed, stream)


def derived_seed(base: int, index: int) -> int:
    """Well-mixed 64-bit seed for run ``index`` of a family keyed by ``base``."""
    state = np.random.SeedSequence([int(base), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def generator(seed: TrialSeed) -> np.random.Generator:
    # Philox is counter-based: the draw index is the counter, (seed, stream) the key
    key = np.array([seed.seed, seed.stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_record(cfg: ProbeConfig, repetitions: int, seed: TrialSeed) -> MeasurementRecord:
    """Binomial(repetitions, P(e)) excited count for ``cfg``."""
    if int(repetitions) != repetitions or repetitions < 1:
        raise DomainError(f"repetitions must be a positive integer, got {repetitions!r}")
    repetitions = int(repetitions)
    p = p_excited(cfg)
    rng = generator(seed)
    if repetitions <= BERNOULLI_LIMIT:
        excited = int(np.count_nonzero(rng.random(repetitions) < p))
    else:
        excited = int(stats.binom.ppf(rng.random(), repetitions, p))
    return MeasurementRecord(cfg, excited, repetitions - excited)


def expected_record(cfg: ProbeConfig, repetitions: float) -> MeasurementRecord:
    """Asymptotic record with counts nu*P(e) and nu*P(g)."""
    if not repetitions > 0:
        raise DomainError(f"repetitions must be positive, got {repetitions!r}")
    p = p_excited(cfg)
    return MeasurementRecord(cfg, repetitions * p, repetitions * (1.0 - p), asymptotic=True)
