"""Periodic knapsack solvers

Choose at most one period per arm from a candidate set to maximize the
total reward rate R(d)/d while the total frequency sum 1/d stays within a
budget k'.

Classes:
    - CandidateItem: One (arm, period) option with its reward rate
    - KnapsackSolution: Chosen period per arm, value and load

Functions:
    - solve_fptas: (1 - epsilon)-optimal DP over scaled rewards
    - solve_exact_pow2: Exact DP when all periods share one odd part
    - solve_exact: Exact DP with integer weights lcm/d
    - brute_force: Exhaustive enumeration, the test oracle
    - solve: Route a request to the appropriate solver
    - val: Optimal value over the true mean rewards of an instance
"""

# pylint: disable=too-many-locals

import itertools
import logging
import math
from collections import defaultdict
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from recovering_bandits._utils import LOAD_TOLERANCE, Period, lcm_of, odd_part
from recovering_bandits.exceptions import CapacityGuardException
from recovering_bandits.instance import RecoveryInstance
from recovering_bandits.settings import get_settings

logger = logging.getLogger(__name__)


class CandidateItem(BaseModel):
    """Option of pulling `arm` once every `d` periods

    Attributes:
        arm: arm index
        d: period
        reward_rate: reward per period R(d)/d
    """

    model_config = ConfigDict(frozen=True)

    arm: int = Field(ge=0)
    d: int = Field(ge=1)
    reward_rate: float = Field(ge=0)

    @property
    def weight(self) -> float:
        """Frequency 1/d consumed by the item"""
        return 1.0 / self.d


class KnapsackSolution(BaseModel):
    """Selected period of each arm

    Attributes:
        chosen: period of every selected arm
        value: sum of the reward rates of the selected items
        load: sum of their frequencies
    """

    model_config = ConfigDict(frozen=True)

    chosen: dict[int, int] = Field(default_factory=dict)
    value: float = 0.0
    load: float = 0.0

    def chosen_periods(self, n_arms: int) -> list[Period]:
        """Period of each of the n_arms arms, None when not selected"""
        return [self.chosen.get(arm) for arm in range(n_arms)]

    @staticmethod
    def from_items(items: list[CandidateItem]) -> "KnapsackSolution":
        """Solution selecting exactly `items`"""
        return KnapsackSolution(
            chosen={item.arm: item.d for item in items},
            value=sum(item.reward_rate for item in items),
            load=sum(item.weight for item in items),
        )


def solve_fptas(
    items: list[CandidateItem], k_prime: float, epsilon: float
) -> KnapsackSolution:
    """(1 - epsilon)-optimal solution by dynamic programming over scaled rewards

    Items heavier than k' are dropped, rewards are scaled to
    floor(N * r / (epsilon * r_max)) and v(n, r), the least load reaching a
    scaled reward of exactly r with the first n arms, is tabulated. The
    answer is the largest r whose load fits, traced back to the items.

    Parameters
    ----------
    items : list[CandidateItem]
        Candidate items
    k_prime : float
        Frequency budget
    epsilon : float
        Accuracy in (0, 1]

    Returns
    -------
    KnapsackSolution
        A solution with value at least (1 - epsilon) times the optimum

    Raises
    ------
    ValueError
        If epsilon is not in (0, 1] or k_prime is negative
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    _check_budget(k_prime)

    usable = [
        item for item in items if item.reward_rate > 0 and item.weight <= k_prime + LOAD_TOLERANCE
    ]
    if not usable:
        return KnapsackSolution()

    groups = _group_by_arm(usable)
    r_max = max(item.reward_rate for item in usable)
    scale = len(groups) / (epsilon * r_max)
    scaled = [[math.floor(item.reward_rate * scale) for item in options] for _, options in groups]
    total = sum(max(values) for values in scaled)

    least_load = np.full(total + 1, np.inf)
    least_load[0] = 0.0
    choice = np.full((len(groups), total + 1), -1, dtype=np.int32)
    for index, (_, options) in enumerate(groups):
        updated = least_load.copy()
        for option, (item, reward) in enumerate(zip(options, scaled[index])):
            candidate = np.full(total + 1, np.inf)
            candidate[reward:] = least_load[: total + 1 - reward] + item.weight
            better = candidate < updated
            updated[better] = candidate[better]
            choice[index][better] = option
        least_load = updated

    reachable = np.nonzero(least_load <= k_prime + LOAD_TOLERANCE)[0]
    reward = int(reachable[-1])

    selected = []
    for index in range(len(groups) - 1, -1, -1):
        option = choice[index][reward]
        if option >= 0:
            selected.append(groups[index][1][option])
            reward -= scaled[index][option]
    return KnapsackSolution.from_items(selected)


def solve_exact(
    items: list[CandidateItem], k_prime: float, dp_cap: Optional[int] = None
) -> KnapsackSolution:
    """Exact solution with integer weights L/d, L the lcm of the periods

    u(n, c), the best value of the first n arms within c capacity units, is
    tabulated for c = 0..floor(L * k').

    Raises
    ------
    CapacityGuardException
        If the DP table would exceed the configured number of cells
    """
    _check_budget(k_prime)
    usable = [item for item in items if item.reward_rate > 0]
    if not usable:
        return KnapsackSolution()

    unit = lcm_of({item.d for item in usable})
    capacity = math.floor(unit * k_prime + 1e-9)
    groups = _group_by_arm(usable)

    dp_cap = dp_cap if dp_cap is not None else get_settings().dp_cap
    if len(groups) * (capacity + 1) > dp_cap:
        raise CapacityGuardException(
            f"Exact knapsack table of {len(groups)} x {capacity + 1} cells exceeds {dp_cap}"
        )

    best = np.zeros(capacity + 1)
    choice = np.full((len(groups), capacity + 1), -1, dtype=np.int32)
    for index, (_, options) in enumerate(groups):
        updated = best.copy()
        for option, item in enumerate(options):
            weight = unit // item.d
            if weight > capacity:
                continue
            candidate = best[: capacity + 1 - weight] + item.reward_rate
            better = candidate > updated[weight:]
            updated[weight:][better] = candidate[better]
            choice[index, weight:][better] = option
        best = updated

    selected, remaining = [], capacity
    for index in range(len(groups) - 1, -1, -1):
        option = choice[index, remaining]
        if option >= 0:
            item = groups[index][1][option]
            selected.append(item)
            remaining -= unit // item.d
    return KnapsackSolution.from_items(selected)


def solve_exact_pow2(items: list[CandidateItem], k_prime: float) -> KnapsackSolution:
    """Exact solution when all periods are (2a - 1) * 2^l for one a

    Every item then consumes d_max/d integer units out of d_max * k'.

    Raises
    ------
    ValueError
        If the periods have different odd parts
    """
    odd_parts = {odd_part(item.d) for item in items}
    if len(odd_parts) > 1:
        raise ValueError(f"Periods must share one odd part, got odd parts {sorted(odd_parts)}")
    return solve_exact(items, k_prime)


def brute_force(
    items: list[CandidateItem], k_prime: float, enumeration_cap: Optional[int] = None
) -> KnapsackSolution:
    """Exhaustive search over one option (or none) per arm

    Loads are compared exactly in units of 1/lcm of the periods.

    Raises
    ------
    CapacityGuardException
        If the number of joint choices exceeds the enumeration cap
    """
    _check_budget(k_prime)
    if not items:
        return KnapsackSolution()

    groups = _group_by_arm(items)
    enumeration_cap = (
        enumeration_cap if enumeration_cap is not None else get_settings().enumeration_cap
    )
    combinations = math.prod(len(options) + 1 for _, options in groups)
    if combinations > enumeration_cap:
        raise CapacityGuardException(
            f"Brute force over {combinations} choices exceeds the cap of {enumeration_cap}"
        )

    unit = lcm_of({item.d for item in items})
    capacity = math.floor(unit * k_prime + 1e-9)
    best_items, best_value = [], -1.0
    for selection in itertools.product(*[[None] + options for _, options in groups]):
        chosen = [item for item in selection if item is not None]
        if sum(unit // item.d for item in chosen) > capacity:
            continue
        value = sum(item.reward_rate for item in chosen)
        if value > best_value:
            best_items, best_value = chosen, value
    return KnapsackSolution.from_items(best_items)


def solve(items: list[CandidateItem], k_prime: float, epsilon: float = 0.0) -> KnapsackSolution:
    """Solve with the FPTAS for epsilon > 0, exactly otherwise

    Exact requests use the single-class DP when possible, then brute force
    when the enumeration fits, then the lcm-weighted DP.
    """
    if epsilon > 0:
        return solve_fptas(items, k_prime, epsilon)
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")

    if len({odd_part(item.d) for item in items}) <= 1:
        return solve_exact_pow2(items, k_prime)
    try:
        return brute_force(items, k_prime)
    except CapacityGuardException:
        logger.debug("Brute force too large, falling back to the lcm-weighted DP")
        return solve_exact(items, k_prime)


def val(instance: RecoveryInstance, k_prime: float, candidate_periods: list[int]) -> float:
    """Optimal knapsack value with the true mean rewards

    Parameters
    ----------
    instance : RecoveryInstance
        The instance
    k_prime : float
        Frequency budget
    candidate_periods : list[int]
        Periods available to every arm

    Returns
    -------
    float
        Largest sum of R_i(d_i)/d_i with sum of 1/d_i <= k'
    """
    items = [
        CandidateItem(arm=arm, d=d, reward_rate=instance.mean_reward(arm, d) / d)
        for arm in range(instance.n_arms)
        for d in sorted(set(candidate_periods))
    ]
    return solve(items, k_prime).value


def _check_budget(k_prime: float) -> None:
    if k_prime < 0:
        raise ValueError(f"Frequency budget must be non-negative, got {k_prime}")


def _group_by_arm(items: list[CandidateItem]) -> list[tuple[int, list[CandidateItem]]]:
    """Items per arm in increasing arm order, larger periods first"""
    grouped = defaultdict(dict)
    for item in items:
        current = grouped[item.arm].get(item.d)
        if current is None or item.reward_rate > current.reward_rate:
            grouped[item.arm][item.d] = item
    return [
        (arm, sorted(grouped[arm].values(), key=lambda item: -item.d))
        for arm in sorted(grouped)
    ]
