"""Finite-shot estimation and the preparation-cost comparison against naive sampling.

Naive estimation samples every trajectory on its own: branch i, copy j draws
``shots_per_branch`` outcomes of M_j on Lambda_i(rho) from stream
``(seed, i, j)``, so it consumes ``d * q * shots_per_branch`` preparations.
For q > 1 the branch value is the product of per-copy sample means (or the
plug-in power of the pooled mean when all copies share one observable),
which is biased by O(1 / shots_per_branch).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import ValidationError
from src.estimates import EstimateResult, mean_and_stderr, sample_counts, stream
from src.forking_engine import SHOT_CHUNK, ForkSpec, run, run_sampled
from src.gates_channels import Z, check_weights, ry, rz, unitary_channel
from src.oracle import trajectory_states
from src.protocols import copy_observables, power_sum_spec
from src.quantum_state import Observable, QuantumState, outcome_distribution
from src.reports import render_csv

logger = logging.getLogger(__name__)

DEFAULT_EPSILON_GRID = (0.2, 0.1, 0.05, 0.025)
DEFAULT_DELTA = 0.1
DEFAULT_REPETITIONS = 200

# Candidate budgets grow by 2^(1/8) from 8 to 2^18 shots.
BUDGET_GRID = tuple(int(b) for b in np.unique(np.round(2.0 ** (np.arange(24, 145) / 8))))

# Stream keys separating the two estimators inside one sweep
_QFS_KEY, _NAIVE_KEY = 0, 1


def estimate_qfs(spec: ForkSpec, shots: int, seed: int, chunk_size: int = SHOT_CHUNK) -> EstimateResult:
    """Sampled QFS estimate; one preparation per shot."""
    result = run_sampled(spec, shots, seed, chunk_size)
    logger.info(f"QFS estimate: {result.mean:.6g} +/- {result.stderr:.2g} ({shots} shots)")
    return result


def _distribution(rho: np.ndarray, obs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return outcome_distribution(QuantumState.from_density(rho), Observable(obs, [0]))


def estimate_naive(d: int, q: int, weights: Sequence[float], channels: Sequence, obs, rho_psi,
                   shots_per_branch: int, seed: int) -> EstimateResult:
    """Combine independent per-trajectory estimates as sum_i p_i prod_j mean_ij."""
    weights = check_weights(weights)
    if len(weights) != d or len(channels) != d:
        raise ValidationError(f"Need {d} weights and {d} channels")
    shots = int(shots_per_branch)
    if shots < 1:
        raise ValidationError(f"shots_per_branch must be >= 1, got {shots}")
    mats = copy_observables(obs, q)
    shared = all(np.array_equal(m, mats[0]) for m in mats)

    total, variance = 0.0, 0.0
    for i, rho in enumerate(trajectory_states(channels, rho_psi), start=1):
        dists = [_distribution(rho, m) for m in mats]
        counts = [sample_counts(probs, shots, stream(seed, i, j)) for j, (_, probs) in enumerate(dists)]
        if shared:
            pooled = np.sum(counts, axis=0)
            mean, se = mean_and_stderr(dists[0][0], pooled)
            value = mean ** q
            grad_se = q * abs(mean) ** (q - 1) * se
        else:
            stats = [mean_and_stderr(outcomes, c) for (outcomes, _), c in zip(dists, counts)]
            means = [m for m, _ in stats]
            value = float(np.prod(means))
            grad_se = np.sqrt(sum((np.prod(means[:j] + means[j + 1:]) * se) ** 2
                                  for j, (_, se) in enumerate(stats)))
        total += weights[i - 1] * value
        variance += (weights[i - 1] * grad_se) ** 2

    preps = d * q * shots
    logger.info(f"Naive estimate: {total:.6g} ({preps} preparations)")
    return EstimateResult(mean=float(total), shots=preps, seed=int(seed), prep_count=preps,
                          stderr=float(np.sqrt(variance)))


@dataclass(frozen=True, eq=False)
class ComplexityInstance:
    """Fixed power-sum problem both estimators are run against."""

    d: int
    q: int
    weights: Tuple[float, ...]
    unitaries: Tuple[np.ndarray, ...]
    obs: np.ndarray
    rho_psi: QuantumState

    def spec(self) -> ForkSpec:
        channels = [unitary_channel(u, name=f"U{i + 1}") for i, u in enumerate(self.unitaries)]
        return power_sum_spec(self.d, self.q, self.weights, channels, self.obs, self.rho_psi)


def default_instance(d: int = 4, q: int = 1, seed: int = 2019) -> ComplexityInstance:
    """d branches of R_z(phi) R_y(pi/2 + jitter) on |0>, measured in Z, equal weights.

    The jitter stays within pi/8, so every branch mean of Z is near zero.
    """
    rng = stream(seed, 2)
    unitaries = tuple(rz(rng.uniform(0, 2 * np.pi)) @ ry(np.pi / 2 + rng.uniform(-np.pi / 8, np.pi / 8))
                      for _ in range(d))
    return ComplexityInstance(d=d, q=q, weights=tuple([1.0 / d] * d), unitaries=unitaries,
                              obs=np.array(Z), rho_psi=QuantumState.basis([2], 0))


@dataclass(frozen=True)
class ComplexityReport:
    """Preparation budgets per target accuracy for both estimators."""

    epsilon_grid: Tuple[float, ...]
    naive_preps: Tuple[int, ...]
    qfs_preps: Tuple[int, ...]
    ratio: Tuple[float, ...]
    d: int
    delta: float

    def __post_init__(self):
        if any(v <= 0 for v in self.naive_preps + self.qfs_preps + self.ratio):
            raise ValidationError("Complexity report entries must be positive")

    def median_ratio(self) -> float:
        return float(np.median(self.ratio))

    def qfs_slope(self) -> float:
        """Slope of log(epsilon) against log(QFS preparations); -0.5 for 1/sqrt scaling."""
        return float(np.polyfit(np.log(self.qfs_preps), np.log(self.epsilon_grid), 1)[0])

    def rows(self) -> List[tuple]:
        return list(zip(self.epsilon_grid, self.naive_preps, self.qfs_preps, self.ratio))

    def to_csv(self, digits: int = 12) -> str:
        return render_csv(("epsilon", "naive_preps", "qfs_preps", "ratio"), self.rows(), digits)


def _qfs_errors(outcomes, probs, exact, budget_index: int, budget: int, repetitions: int, seed: int) -> np.ndarray:
    rng = stream(seed, _QFS_KEY, budget_index)
    counts = rng.multinomial(budget, probs, size=repetitions)
    return np.abs(counts @ outcomes / budget - exact)


def _naive_errors(per_traj, budget_index: int, budget: int, repetitions: int, seed: int) -> np.ndarray:
    errors = []
    for i, copies in enumerate(per_traj):
        for j, (outcomes, probs, exact) in enumerate(copies):
            rng = stream(seed, _NAIVE_KEY, budget_index, i, j)
            counts = rng.multinomial(budget, probs, size=repetitions)
            errors.append(np.abs(counts @ outcomes / budget - exact))
    return np.concatenate(errors)


def _smallest_budget(errors: List[np.ndarray], epsilon: float, delta: float, budgets: Sequence[int]) -> int:
    """First budget from which the (1 - delta)-quantile error stays within epsilon."""
    ok = [np.quantile(e, 1 - delta) <= epsilon for e in errors]
    chosen = len(budgets) - 1
    for idx in range(len(budgets) - 1, -1, -1):
        if not ok[idx]:
            break
        chosen = idx
    if not ok[-1]:
        logger.warning(f"epsilon={epsilon} not reached within {budgets[-1]} shots; reporting the largest budget")
    return budgets[chosen]


def complexity_sweep(instance: ComplexityInstance = None, epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID,
                     delta: float = DEFAULT_DELTA, seed: int = 2019, repetitions: int = DEFAULT_REPETITIONS,
                     budgets: Sequence[int] = BUDGET_GRID, workers: int = 1) -> ComplexityReport:
    """Empirical preparation budgets reaching accuracy epsilon with probability 1 - delta.

    QFS must estimate the weighted sum within epsilon; naive sampling must
    estimate every trajectory's expectation within epsilon, pooled over
    repetitions, branches and copies. Error samples for budget b come from
    streams keyed by b only, so they do not depend on delta or on worker count.
    """
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    instance = instance or default_instance()
    spec = instance.spec()
    budgets = [int(b) for b in budgets]

    result = run(spec)
    qfs_obs = Observable(spec.measurement.observable, spec.target_subsystems())
    qfs_outcomes, qfs_probs = outcome_distribution(result.final_state, qfs_obs)
    exact = result.value

    per_traj = []
    mats = copy_observables(instance.obs, instance.q)
    for rho in trajectory_states(instance.unitaries, instance.rho_psi):
        copies = []
        for m in mats:
            outcomes, probs = _distribution(rho, m)
            copies.append((outcomes, probs, float(np.trace(m @ rho).real)))
        per_traj.append(copies)

    def errors_for(index: int):
        budget = budgets[index]
        return (_qfs_errors(qfs_outcomes, qfs_probs, exact, index, budget, repetitions, seed),
                _naive_errors(per_traj, index, budget, repetitions, seed))

    logger.info(f"Complexity sweep: d={instance.d}, q={instance.q}, {len(budgets)} budgets x {repetitions} repetitions")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(errors_for, range(len(budgets))))
    else:
        samples = [errors_for(i) for i in range(len(budgets))]
    qfs_errors = [s[0] for s in samples]
    naive_errors = [s[1] for s in samples]

    naive_preps, qfs_preps, ratio = [], [], []
    for eps in epsilon_grid:
        n_qfs = _smallest_budget(qfs_errors, eps, delta, budgets)
        n_naive = instance.d * instance.q * _smallest_budget(naive_errors, eps, delta, budgets)
        qfs_preps.append(n_qfs)
        naive_preps.append(n_naive)
        ratio.append(n_naive / n_qfs)
        logger.debug(f"epsilon={eps}: naive={n_naive}, qfs={n_qfs}")

    return ComplexityReport(epsilon_grid=tuple(float(e) for e in epsilon_grid), naive_preps=tuple(naive_preps),
                            qfs_preps=tuple(qfs_preps), ratio=tuple(ratio), d=instance.d, delta=float(delta))
