"""Phased online learning

The learner splits the horizon into phases of phi periods. At the start of
each phase it plans a purely periodic policy from optimistic estimates of
the recovery curves and runs it for the phase. Every realized pull then
updates the estimates.

Classes:
    - UCBTable: Counts, empirical means and upper confidence bounds per
      (arm, gap)
    - PhaseConfig: Phase length, knapsack accuracy, class parameter, budget
      and planner variant
    - PhasePlan: Policy planned for one phase
    - PhaseRecord: What happened during one phase
    - LearnerState: Running state of the learner
    - LearnerSummary: Trajectory summary of a run

Functions:
    - ucb, record_sample
    - plan_phase, plan_phase_refined, plan_phase_ensemble
    - run_learner
"""

# pylint: disable=too-many-locals

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from recovering_bandits.instance import RecoveryInstance
from recovering_bandits.knapsack import CandidateItem, solve, solve_exact_pow2
from recovering_bandits.periods import class_members, odd_class_members
from recovering_bandits.planner import REFINED_CLASSES, best_a
from recovering_bandits.policy import PurelyPeriodicPolicy, long_run_average
from recovering_bandits.relaxation import ub_value
from recovering_bandits.scheduler import schedule_periods
from recovering_bandits.simulator import Environment, NoiseModel

logger = logging.getLogger(__name__)

Variant = Literal["basic", "refined", "ensemble"]

PHASE_COLUMNS = ["phase", "a", "length", "planned_value", "realized_reward", "cumulative_ratio"]


@dataclass
class UCBTable:
    """Per (arm, gap) statistics of the observed rewards

    Unseen pairs have count 0 and mean 0. The table is sparse: any gap can
    be recorded, planning only reads the gaps it considers.
    """

    n_arms: int
    r_max: float
    horizon: int
    k: int
    counts: dict[tuple[int, int], int] = field(default_factory=dict)
    means: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_arms < 1:
            raise ValueError(f"Number of arms must be positive, got {self.n_arms}")
        if self.r_max <= 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        if self.horizon < 1 or self.k < 1:
            raise ValueError(f"Horizon and budget must be positive, got {self.horizon}, {self.k}")

    @property
    def total_samples(self) -> int:
        """Number of recorded samples"""
        return sum(self.counts.values())

    def count(self, arm: int, gap: int) -> int:
        """Number of samples of (arm, gap)"""
        return self.counts.get((arm, gap), 0)

    def empirical_mean(self, arm: int, gap: int) -> float:
        """Mean of the samples of (arm, gap), 0 when unseen"""
        return self.means.get((arm, gap), 0.0)

    def ucb(self, arm: int, gap: int) -> float:
        """min(mean + r_max * sqrt(2 ln(k T) / max(n, 1)), r_max)"""
        if gap < 1:
            raise ValueError(f"Gap must be a positive integer, got {gap}")
        n = self.count(arm, gap)
        if n == 0:
            return self.r_max
        bonus = self.r_max * math.sqrt(2.0 * math.log(self.k * self.horizon) / n)
        return min(self.empirical_mean(arm, gap) + bonus, self.r_max)

    def mean_reward(self, arm: int, gap: int) -> float:
        """Optimistic reward, so the table can rank groups like an instance"""
        return self.ucb(arm, gap)

    def record(self, arm: int, gap: int, reward: float) -> "UCBTable":
        """Add one sample with a running-mean update"""
        if gap < 1:
            raise ValueError(f"Gap must be a positive integer, got {gap}")
        if not 0.0 <= reward <= self.r_max:
            raise ValueError(f"Reward {reward} outside [0, {self.r_max}]")
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"Arm index {arm} out of range for {self.n_arms} arms")
        key = (arm, gap)
        n = self.counts.get(key, 0) + 1
        mean = self.means.get(key, 0.0)
        self.counts[key] = n
        self.means[key] = mean + (reward - mean) / n
        return self


def ucb(table: UCBTable, arm: int, gap: int) -> float:
    """Upper confidence bound of R_arm(gap)"""
    return table.ucb(arm, gap)


def record_sample(table: UCBTable, arm: int, gap: int, reward: float) -> UCBTable:
    """Record a realized reward of `arm` at `gap`"""
    return table.record(arm, gap, reward)


class PhaseConfig(BaseModel):
    """Parameters of the phased learner

    Attributes:
        phi: phase length in periods
        epsilon: knapsack accuracy, 0 for exact solves
        a: period class parameter of the basic planner
        k_prime: frequency budget of the basic planner's knapsack, k + 1 when unset
        variant: 'basic', 'refined' or 'ensemble'
    """

    model_config = ConfigDict(frozen=True)

    phi: int = Field(ge=2)
    epsilon: float = Field(default=0.0, ge=0.0, le=1.0)
    a: int = Field(default=1, ge=1)
    k_prime: Optional[float] = Field(default=None, gt=0.0)
    variant: Variant = "basic"

    @property
    def candidate_periods(self) -> list[int]:
        """Periods of D[a] no larger than phi/2"""
        return class_members(self.a, self.phi // 2)

    def frequency_budget(self, k: int) -> float:
        """Knapsack budget k' for a budget of k simultaneous pulls"""
        return float(k + 1) if self.k_prime is None else self.k_prime

    def tracked_periods(self, k: int) -> list[int]:
        """Every period the variant may plan with"""
        if self.variant == "basic":
            return self.candidate_periods
        widest = max([self.a, max(REFINED_CLASSES)] + _sqrt_classes(k))
        return class_members(widest, self.phi // 2)

    @staticmethod
    def from_horizon(k: int, horizon: int, variant: Variant = "basic") -> "PhaseConfig":
        """Default parameters for a horizon T

        a maximizes a/(a+1) * k/(k+a), k' = k + 1, phi is about
        sqrt(T / ln(k + 1)) and epsilon is 1/sqrt(T).
        """
        if k < 1 or horizon < 1:
            raise ValueError(f"Budget and horizon must be positive, got {k}, {horizon}")
        phi = max(2, round(math.sqrt(horizon / math.log(k + 1))))
        return PhaseConfig(
            phi=phi,
            epsilon=min(1.0, 1.0 / math.sqrt(horizon)),
            a=best_a(k),
            k_prime=k + 1,
            variant=variant,
        )


class PhasePlan(BaseModel):
    """Policy planned for a phase

    Attributes:
        policy: the k-policy to run
        a: period class parameter it was built with
        value: planned average reward under the optimistic estimates
    """

    model_config = ConfigDict(frozen=True)

    policy: PurelyPeriodicPolicy
    a: int
    value: float


def plan_phase(table: UCBTable, config: PhaseConfig, k: int) -> PhasePlan:
    """Knapsack over D[a] periods up to phi/2, then round and schedule

    Parameters
    ----------
    table : UCBTable
        Current estimates
    config : PhaseConfig
        Uses phi, epsilon, a and the frequency budget for k
    k : int
        Budget of simultaneous pulls

    Returns
    -------
    PhasePlan
        The scheduled policy and the knapsack value
    """
    items = _ucb_items(table, config.candidate_periods)
    solution = solve(items, config.frequency_budget(k), config.epsilon)
    policy = schedule_periods(solution.chosen_periods(table.n_arms), k, table)
    return PhasePlan(policy=policy, a=config.a, value=solution.value)


def plan_phase_refined(table: UCBTable, phi: int, k: int) -> PhasePlan:
    """Exact knapsack per single class (2a - 1) * 2^l for a in 1..3, keep the best

    Ties go to the smaller a.
    """
    if phi < 2:
        raise ValueError(f"Phase length must be at least 2, got {phi}")

    best_a_value, best_solution, best_value = None, None, -1.0
    for a in REFINED_CLASSES:
        periods = odd_class_members(a, phi // 2)
        if not periods:
            continue
        solution = solve_exact_pow2(_ucb_items(table, periods), k)
        if solution.value > best_value:
            best_a_value, best_solution, best_value = a, solution, solution.value

    policy = schedule_periods(best_solution.chosen_periods(table.n_arms), k, table)
    return PhasePlan(policy=policy, a=best_a_value, value=best_value)


def plan_phase_ensemble(table: UCBTable, phi: int, k: int) -> PhasePlan:
    """Best of the basic plans for a near sqrt(k) and the refined plans

    The basic plans use k' = k + 1 and exact solves. Candidates are compared
    by long-run average under the optimistic estimates; ties keep the first.
    """
    candidates = []
    for a in _sqrt_classes(k):
        config = PhaseConfig(phi=phi, epsilon=0.0, a=a, k_prime=k + 1)
        candidates.append(plan_phase(table, config, k))
    for a in REFINED_CLASSES:
        periods = odd_class_members(a, phi // 2)
        if periods:
            solution = solve_exact_pow2(_ucb_items(table, periods), k)
            policy = schedule_periods(solution.chosen_periods(table.n_arms), k, table)
            candidates.append(PhasePlan(policy=policy, a=a, value=solution.value))

    best = None
    for candidate in candidates:
        value = long_run_average(candidate.policy, table)
        if best is None or value > best.value:
            best = PhasePlan(policy=candidate.policy, a=candidate.a, value=value)
    return best


class PhaseRecord(BaseModel):
    """One phase of a learner run

    Attributes:
        phase: phase index, from 0
        start: time step before the phase's first step
        length: number of steps run
        a: class parameter of the planned policy
        planned_value: planned average reward
        realized_reward: total reward collected in the phase
        cumulative_ratio: average reward so far divided by the upper bound
        policy: the policy run
    """

    phase: int
    start: int
    length: int
    a: int
    planned_value: float
    realized_reward: float
    cumulative_ratio: float
    policy: PurelyPeriodicPolicy


@dataclass
class LearnerState:
    """Running state of a learner: phase, time, reward, estimates and environment"""

    table: UCBTable
    environment: Environment
    phase: int = 0
    cumulative_reward: float = 0.0
    policy: Optional[PurelyPeriodicPolicy] = None

    @property
    def time(self) -> int:
        """Number of periods played"""
        return self.environment.now

    @property
    def last_pull(self) -> np.ndarray:
        """Last pull time of every arm"""
        return self.environment.last_pull


class LearnerSummary(BaseModel):
    """Summary of a learner run

    Attributes:
        horizon: number of periods T
        k: budget
        ub: upper bound on the average reward
        cumulative_reward: total reward collected
        ratio: cumulative reward / (ub * T)
        phases: per-phase records
        total_samples: number of recorded samples
        max_simultaneous_pulls: largest number of arms pulled in one period
        optimism_checks: (arm, gap, phase) triples checked at phase ends
        optimism_violations: checked triples whose UCB was below the true mean
    """

    horizon: int
    k: int
    ub: float
    cumulative_reward: float
    ratio: float
    phases: list[PhaseRecord]
    total_samples: int
    max_simultaneous_pulls: int
    optimism_checks: int
    optimism_violations: int

    def to_frame(self) -> pd.DataFrame:
        """One row per phase"""
        return pd.DataFrame(
            [
                {
                    "phase": record.phase,
                    "a": record.a,
                    "length": record.length,
                    "planned_value": record.planned_value,
                    "realized_reward": record.realized_reward,
                    "cumulative_ratio": record.cumulative_ratio,
                }
                for record in self.phases
            ],
            columns=PHASE_COLUMNS,
        )


def run_learner(
    instance: RecoveryInstance,
    horizon: int,
    config: PhaseConfig,
    seed: Optional[int] = None,
    k: Optional[int] = None,
    noise: NoiseModel = "triangular",
) -> LearnerSummary:
    """Run the phased learner against a simulated environment

    Phases last phi periods, the last one truncated at the horizon. A
    policy's offsets restart at each phase start while the environment keeps
    the true last-pull times. Every pull is recorded at its realized gap.

    Parameters
    ----------
    instance : RecoveryInstance
        The true instance
    horizon : int
        Number of periods T
    config : PhaseConfig
        Learner parameters
    seed : int, optional
        Seed of the environment
    k : int, optional
        Budget, by default the instance's default_k
    noise : Literal["triangular", "none"]
        Reward noise model

    Returns
    -------
    LearnerSummary
        Cumulative reward, per-phase records and sample accounting
    """
    if horizon < 1:
        raise ValueError(f"Horizon must be a positive integer, got {horizon}")
    k = k if k is not None else instance.default_k
    if k is None or not 1 <= k <= instance.n_arms:
        raise ValueError(f"Budget k must be in 1..{instance.n_arms}, got {k}")

    planner = _planner(config)
    state = LearnerState(
        table=UCBTable(n_arms=instance.n_arms, r_max=instance.r_max, horizon=horizon, k=k),
        environment=Environment(instance, seed=seed, k=k, noise=noise),
    )
    ub = ub_value(instance, k)
    tracked = config.tracked_periods(k)

    records = []
    most_pulled, checks, violations, clipped = 0, 0, 0, False
    while state.time < horizon:
        plan = planner(state.table, k)
        state.policy = plan.policy
        start = state.time
        length = min(config.phi, horizon - start)
        pulls = plan.policy.pull_matrix(length)
        most_pulled = max(most_pulled, int(pulls.sum(axis=1).max()) if length else 0)

        phase_reward = 0.0
        for offset in range(length):
            for pull in state.environment.step(np.flatnonzero(pulls[offset])):
                phase_reward += pull.reward
                reward = pull.reward
                if reward > instance.r_max:
                    if not clipped:
                        warnings.warn(
                            f"Simulated rewards above r_max={instance.r_max} are clipped "
                            "before being recorded"
                        )
                        clipped = True
                    reward = instance.r_max
                state.table.record(pull.arm, pull.gap, reward)

        state.cumulative_reward += phase_reward
        for arm in range(instance.n_arms):
            for d in tracked:
                checks += 1
                if state.table.ucb(arm, d) < instance.mean_reward(arm, d) - 1e-12:
                    violations += 1

        records.append(
            PhaseRecord(
                phase=state.phase,
                start=start,
                length=length,
                a=plan.a,
                planned_value=plan.value,
                realized_reward=phase_reward,
                cumulative_ratio=_ratio(state.cumulative_reward, ub, state.time),
                policy=plan.policy,
            )
        )
        logger.debug(
            "Phase %d: a=%d planned %.4f realized %.4f",
            state.phase,
            plan.a,
            plan.value,
            phase_reward,
        )
        state.phase += 1

    return LearnerSummary(
        horizon=horizon,
        k=k,
        ub=ub,
        cumulative_reward=state.cumulative_reward,
        ratio=_ratio(state.cumulative_reward, ub, horizon),
        phases=records,
        total_samples=state.table.total_samples,
        max_simultaneous_pulls=most_pulled,
        optimism_checks=checks,
        optimism_violations=violations,
    )


def _planner(config: PhaseConfig) -> Callable[[UCBTable, int], PhasePlan]:
    if config.variant == "basic":
        return lambda table, k: plan_phase(table, config, k)
    if config.variant == "refined":
        return lambda table, k: plan_phase_refined(table, config.phi, k)
    return lambda table, k: plan_phase_ensemble(table, config.phi, k)


def _ucb_items(table: UCBTable, periods: list[int]) -> list[CandidateItem]:
    return [
        CandidateItem(arm=arm, d=d, reward_rate=table.ucb(arm, d) / d)
        for arm in range(table.n_arms)
        for d in periods
    ]


def _sqrt_classes(k: int) -> list[int]:
    """floor(sqrt k) and ceil(sqrt k), at least 1"""
    root = math.isqrt(k)
    return sorted({max(1, root), root if root * root == k else root + 1})


def _ratio(total: float, ub: float, periods: int) -> float:
    if ub <= 0 or periods <= 0:
        return 0.0
    return total / (ub * periods)
