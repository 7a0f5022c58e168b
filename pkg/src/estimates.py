"""Finite-shot estimate values and seeded random streams.

Streams come from numpy's ``SeedSequence`` (PCG64 bit generator): the
stream for task key ``(a, b, ...)`` is ``SeedSequence(seed, spawn_key=(a, b, ...))``,
so a task draws the same numbers whether it runs alone, in a worker pool,
or in sequence with other tasks.
"""

from dataclasses import dataclass, asdict

import numpy as np


@dataclass(frozen=True)
class EstimateResult:
    """Sampled estimate of a weighted power sum.

    Attributes:
        mean: Point estimate
        shots: Measurement shots consumed
        seed: Root seed of the random streams
        prep_count: Target-state preparations consumed
        stderr: Standard error of ``mean``
    """

    mean: float
    shots: int
    seed: int
    prep_count: int
    stderr: float

    def to_dict(self) -> dict:
        return asdict(self)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for task ``key`` under root ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))))


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Outcome counts of ``shots`` i.i.d. draws from ``probs``."""
    return rng.multinomial(int(shots), probs)


def mean_and_stderr(outcomes: np.ndarray, counts: np.ndarray):
    """Sample mean and standard error from outcome counts."""
    shots = int(counts.sum())
    mean = float(np.dot(outcomes, counts) / shots)
    if shots < 2:
        return mean, 0.0
    var = float(np.dot(counts, (outcomes - mean) ** 2) / (shots - 1))
    return mean, float(np.sqrt(max(var, 0.0) / shots))


def derive_seed(seed: int, *key: int) -> int:
    """Integer root seed for sub-task ``key``; feeds APIs that take a plain seed."""
    return int(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)).generate_state(1)[0])
