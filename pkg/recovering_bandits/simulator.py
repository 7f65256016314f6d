"""Stochastic environment and finite-horizon baselines

Classes:
    - Pull: Outcome of one arm pull (arm, realized gap, reward)
    - Environment: Seeded simulator tracking last-pull times
    - Schedule: Arms pulled at each step of a finite horizon
    - GreedyResult: Greedy schedule with its expected total
    - SimulationResult: Totals of a policy run in the environment

Functions:
    - step: Advance an environment by one period
    - greedy_policy: Myopic baseline evaluated on mean rewards
    - simulate_policy: Run a purely periodic policy
    - brute_force_opt: Exact optimum on tiny instances
"""

import itertools
import logging
from functools import lru_cache
from typing import Iterable, Literal, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from recovering_bandits.exceptions import CapacityGuardException
from recovering_bandits.instance import RecoveryInstance
from recovering_bandits.policy import PurelyPeriodicPolicy

logger = logging.getLogger(__name__)

NoiseModel = Literal["triangular", "none"]

ORACLE_MAX_ARMS = 3
ORACLE_MAX_DMAX = 4
ORACLE_MAX_HORIZON = 12


class Pull(NamedTuple):
    """Outcome of pulling one arm"""

    arm: int
    gap: int
    reward: float


class Environment:
    """Seeded environment of an instance

    Every arm starts as last pulled at time 0. A pulled arm pays a reward
    drawn from the symmetric triangular distribution on [0, 2 R(gap)], or
    exactly R(gap) when the noise model is 'none'.
    """

    def __init__(
        self,
        instance: RecoveryInstance,
        seed: Optional[int] = None,
        k: Optional[int] = None,
        noise: NoiseModel = "triangular",
    ):
        """
        Parameters
        ----------
        instance : RecoveryInstance
            The instance to simulate
        seed : int, optional
            Seed of the numpy random generator
        k : int, optional
            Largest number of arms pulled per period, by default N
        noise : Literal["triangular", "none"]
            Reward noise model
        """
        if noise not in ("triangular", "none"):
            raise ValueError(f"Noise model must be 'triangular' or 'none', got '{noise}'")
        self.instance = instance
        self.k = k if k is not None else instance.n_arms
        self.noise = noise
        self.rng = np.random.default_rng(seed)
        self.last_pull = np.zeros(instance.n_arms, dtype=np.int64)
        self.now = 0
        self._means = instance.reward_matrix()
        self._gap_cap = self._means.shape[1] - 1

    def step(self, pulled: Iterable[int]) -> list[Pull]:
        """Pull the given arms at time now + 1 and advance the clock

        Raises
        ------
        ValueError
            If more than k arms or the same arm twice are pulled
        IndexError
            If an arm index is out of range
        """
        arms = [int(arm) for arm in pulled]
        if len(arms) > self.k:
            raise ValueError(f"Pulled {len(arms)} arms, budget is {self.k}")
        if len(set(arms)) != len(arms):
            raise ValueError(f"Arms pulled more than once in one period: {arms}")
        for arm in arms:
            if not 0 <= arm < self.instance.n_arms:
                raise IndexError(f"Arm index {arm} out of range")

        now = self.now + 1
        gaps = now - self.last_pull[arms]
        means = self._means[arms, np.minimum(gaps, self._gap_cap)]
        if self.noise == "none":
            rewards = means
        else:
            rewards = triangular_rewards(self.rng, means)

        self.last_pull[arms] = now
        self.now = now
        return [Pull(arm, int(gap), float(reward)) for arm, gap, reward in zip(arms, gaps, rewards)]


def step(env: Environment, pulled: Iterable[int]) -> list[Pull]:
    """Advance `env` by one period, see Environment.step"""
    return env.step(pulled)


def triangular_rewards(rng: np.random.Generator, means: np.ndarray) -> np.ndarray:
    """Symmetric triangular draws on [0, 2m] with mode m, by inverse CDF"""
    means = np.asarray(means, dtype=float)
    uniforms = rng.random(means.shape)
    low = means * np.sqrt(2.0 * uniforms)
    high = 2.0 * means - means * np.sqrt(2.0 * (1.0 - uniforms))
    return np.where(uniforms < 0.5, low, high)


class Schedule(BaseModel):
    """Arms pulled at each step t = 1..T

    Attributes:
        k: budget
        pulls: pulled arms of each step
    """

    model_config = ConfigDict(frozen=True)

    k: int
    pulls: list[list[int]]

    @model_validator(mode="after")
    def check_budget(self):
        """Every step respects the budget"""
        for t, arms in enumerate(self.pulls, start=1):
            if len(arms) > self.k:
                raise ValueError(f"{len(arms)} arms pulled at t={t}, budget is {self.k}")
        return self

    @property
    def horizon(self) -> int:
        """Number of steps"""
        return len(self.pulls)

    def expected_total(self, instance: RecoveryInstance) -> float:
        """Total mean reward of the schedule, all arms last pulled at time 0"""
        last = [0] * instance.n_arms
        total = 0.0
        for t, arms in enumerate(self.pulls, start=1):
            for arm in arms:
                total += instance.mean_reward(arm, t - last[arm])
                last[arm] = t
        return total


class GreedyResult(BaseModel):
    """Greedy schedule and its expected total reward"""

    schedule: Schedule
    total: float

    @property
    def average(self) -> float:
        """Expected reward per period"""
        return self.total / self.schedule.horizon if self.schedule.horizon else 0.0


class SimulationResult(BaseModel):
    """Outcome of running a policy

    Attributes:
        horizon: number of periods
        total: total reward collected
        pull_counts: number of pulls of each arm
    """

    horizon: int
    total: float
    pull_counts: list[int]

    @property
    def average(self) -> float:
        """Reward per period"""
        return self.total / self.horizon if self.horizon else 0.0


def greedy_policy(instance: RecoveryInstance, k: int, t_horizon: int) -> GreedyResult:
    """Pull, at every step, the k arms with the largest current mean reward

    Ties go to the lowest arm index. The schedule is evaluated on mean
    rewards, so the result is deterministic.

    Parameters
    ----------
    instance : RecoveryInstance
        The instance
    k : int
        Budget, 1 <= k <= N
    t_horizon : int
        Number of steps

    Returns
    -------
    GreedyResult
        The schedule and its expected total reward
    """
    if not 1 <= k <= instance.n_arms:
        raise ValueError(f"Budget k must be in 1..{instance.n_arms}, got {k}")

    means = instance.reward_matrix()
    gap_cap = means.shape[1] - 1
    arms = np.arange(instance.n_arms)
    last = np.zeros(instance.n_arms, dtype=np.int64)

    total = 0.0
    pulls = []
    for t in range(1, t_horizon + 1):
        values = means[arms, np.minimum(t - last, gap_cap)]
        chosen = np.sort(np.lexsort((arms, -values))[:k])
        total += float(values[chosen].sum())
        last[chosen] = t
        pulls.append(chosen.tolist())

    return GreedyResult(schedule=Schedule(k=k, pulls=pulls), total=total)


def simulate_policy(
    policy: PurelyPeriodicPolicy,
    instance: RecoveryInstance,
    horizon: int,
    seed: Optional[int] = None,
) -> SimulationResult:
    """Run a purely periodic policy for `horizon` periods

    Rewards are the means when no seed is given, triangular draws otherwise.
    """
    if len(policy.entries) != instance.n_arms:
        raise ValueError(
            f"Policy has {len(policy.entries)} entries for an instance of {instance.n_arms} arms"
        )
    env = Environment(
        instance, seed=seed, k=policy.k, noise="none" if seed is None else "triangular"
    )
    matrix = policy.pull_matrix(horizon)
    total = 0.0
    for t in range(horizon):
        total += sum(pull.reward for pull in env.step(np.flatnonzero(matrix[t])))
    return SimulationResult(
        horizon=horizon, total=total, pull_counts=matrix.sum(axis=0).tolist()
    )


def brute_force_opt(instance: RecoveryInstance, k: int, t_horizon: int) -> float:
    """Optimal total expected reward over a finite horizon, by exhaustive DP

    States are the time step and every arm's gap capped at the largest
    recovery horizon; each step pulls any set of at most k arms.

    Raises
    ------
    CapacityGuardException
        If N > 3, d_max > 4 or the horizon exceeds 12
    ValueError
        If k is out of range
    """
    if (
        instance.n_arms > ORACLE_MAX_ARMS
        or instance.max_d_max > ORACLE_MAX_DMAX
        or t_horizon > ORACLE_MAX_HORIZON
    ):
        raise CapacityGuardException(
            f"Exact optimum limited to N <= {ORACLE_MAX_ARMS}, d_max <= {ORACLE_MAX_DMAX}, "
            f"T <= {ORACLE_MAX_HORIZON}"
        )
    if not 1 <= k <= instance.n_arms:
        raise ValueError(f"Budget k must be in 1..{instance.n_arms}, got {k}")

    means = instance.reward_matrix()
    gap_cap = means.shape[1] - 1
    n_arms = instance.n_arms
    subsets = [
        frozenset(subset)
        for size in range(k + 1)
        for subset in itertools.combinations(range(n_arms), size)
    ]

    @lru_cache(maxsize=None)
    def best(t: int, gaps: tuple[int, ...]) -> float:
        if t > t_horizon:
            return 0.0
        result = 0.0
        for subset in subsets:
            gain = sum(means[arm, gaps[arm]] for arm in subset)
            following = tuple(
                1 if arm in subset else min(gaps[arm] + 1, gap_cap) for arm in range(n_arms)
            )
            result = max(result, gain + best(t + 1, following))
        return result

    return float(best(1, (1,) * n_arms))
