"""Offline planners

Functions:
    - gamma_k: Approximation ratio guaranteed by `offline_plan`
    - best_a: Period class parameter attaining gamma_k
    - treat_fractional: Lift, keep or shrink the fractional frequency
    - offline_plan: Relaxation, lift, round into D[a], schedule
    - offline_plan_refined: Best of nine single-class candidates, at least
      half of the upper bound
    - offline_plan_ensemble: Best of the plain and knapsack-based
      candidates used by the experiment protocol
"""

import logging
import math
from typing import Callable

import numpy as np

from recovering_bandits.envelope import SupportSet, supporting_points
from recovering_bandits.instance import RecoveryInstance
from recovering_bandits.knapsack import CandidateItem, solve_exact_pow2
from recovering_bandits.periods import odd_class_members, round_to_class
from recovering_bandits.policy import PurelyPeriodicPolicy, long_run_average
from recovering_bandits.relaxation import RelaxationSolution, solve_upper_bound
from recovering_bandits.scheduler import rs_procedure, schedule_periods

logger = logging.getLogger(__name__)

TREATMENTS = (1, 2, 3)
REFINED_CLASSES = (1, 2, 3)


def gamma_k(k: int) -> float:
    """max over a >= 1 of a/(a+1) * k/(k+a)

    Raises
    ------
    ValueError
        If k < 1
    """
    if k < 1:
        raise ValueError(f"Budget k must be a positive integer, got {k}")
    a = np.arange(1, k + 1, dtype=float)
    return float(np.max(a / (a + 1) * k / (k + a)))


def best_a(k: int) -> int:
    """Smallest a maximizing a/(a+1) * k/(k+a), searched around sqrt(k)"""
    if k < 1:
        raise ValueError(f"Budget k must be a positive integer, got {k}")
    root = math.isqrt(k)
    ceil_root = root if root * root == k else root + 1
    best, best_ratio = None, -1.0
    for a in range(max(1, root - 1), ceil_root + 2):
        ratio = a / (a + 1) * k / (k + a)
        if ratio > best_ratio:
            best, best_ratio = a, ratio
    return best


def treat_fractional(
    solution: RelaxationSolution, supports: list[SupportSet], m: int
) -> list[float]:
    """Frequencies with every entry snapped to its supporting reciprocal

    The fractional entry, if any, is lifted to its upper reciprocal (m=1),
    kept (m=2) or shrunk to its lower reciprocal (m=3).
    """
    if m not in TREATMENTS:
        raise ValueError(f"Treatment must be one of {TREATMENTS}, got {m}")

    x = []
    for value, support in zip(solution.x_star, supports):
        x.append(0.0 if value <= 0 else 1.0 / support.upper_period(value))

    fractional = solution.fractional_arm
    if fractional is not None:
        if m == 1:
            x[fractional.arm] = 1.0 / fractional.upper_period
        elif m == 2:
            x[fractional.arm] = solution.x_star[fractional.arm]
        else:
            x[fractional.arm] = 1.0 / fractional.lower_period
    return x


def offline_plan(instance: RecoveryInstance, k: int) -> PurelyPeriodicPolicy:
    """Periodic policy with long-run average at least gamma_k times the upper bound

    Parameters
    ----------
    instance : RecoveryInstance
        The instance
    k : int
        Budget of simultaneous pulls, 1 <= k <= N

    Returns
    -------
    PurelyPeriodicPolicy
        A feasible k-policy
    """
    solution = solve_upper_bound(instance, k)
    supports = [supporting_points(curve) for curve in instance.arms]
    a = best_a(k)
    x = treat_fractional(solution, supports, 1)
    policy = rs_procedure(x, k, a, instance)
    logger.debug(
        "Offline plan with a=%d: %.6f vs upper bound %.6f",
        a,
        long_run_average(policy, instance),
        solution.ub,
    )
    return policy


def offline_plan_refined(instance: RecoveryInstance, k: int) -> PurelyPeriodicPolicy:
    """Best of nine single-class candidates, at least half of the upper bound

    For a in {1, 2, 3} and each treatment m of the fractional frequency,
    every frequency is rounded up into {(2a - 1) * 2^l} + {1} and scheduled.
    Ties keep the first candidate in (a, m) order.
    """
    solution = solve_upper_bound(instance, k)
    supports = [supporting_points(curve) for curve in instance.arms]

    builders = []
    for a in REFINED_CLASSES:
        for m in TREATMENTS:
            x = treat_fractional(solution, supports, m)
            builders.append((f"a={a}, m={m}", _single_class_builder(x, a, k, instance)))
    return _best_candidate(builders, instance)


def offline_plan_ensemble(instance: RecoveryInstance, k: int) -> PurelyPeriodicPolicy:
    """Best of the candidates used by the synthetic experiment protocol

    Candidates are the plain procedure for a in {floor(sqrt k), ceil(sqrt k)}
    under the three treatments of the fractional frequency, and for a in
    {1, 2, 3} the exact single-class knapsack over the true mean rewards
    with periods (2a - 1) * 2^l up to four times the largest recovery
    horizon, scheduled directly.
    """
    solution = solve_upper_bound(instance, k)
    supports = [supporting_points(curve) for curve in instance.arms]

    root = math.isqrt(k)
    builders = []
    for a in sorted({max(1, root), root if root * root == k else root + 1}):
        for m in TREATMENTS:
            x = treat_fractional(solution, supports, m)
            builders.append(
                (f"plain a={a}, m={m}", lambda x=x, a=a: rs_procedure(x, k, a, instance))
            )

    upper = 4 * instance.max_d_max
    for a in REFINED_CLASSES:
        builders.append((f"knapsack a={a}", _knapsack_builder(a, upper, k, instance)))
    return _best_candidate(builders, instance)


def _single_class_builder(
    x: list[float], a: int, k: int, instance: RecoveryInstance
) -> Callable[[], PurelyPeriodicPolicy]:
    return lambda: schedule_periods(round_to_class(x, a), k, instance)


def _knapsack_builder(
    a: int, upper: int, k: int, instance: RecoveryInstance
) -> Callable[[], PurelyPeriodicPolicy]:
    def build() -> PurelyPeriodicPolicy:
        periods = odd_class_members(a, upper)
        items = [
            CandidateItem(arm=arm, d=d, reward_rate=instance.mean_reward(arm, d) / d)
            for arm in range(instance.n_arms)
            for d in periods
        ]
        chosen = solve_exact_pow2(items, k).chosen_periods(instance.n_arms)
        return schedule_periods(chosen, k, instance)

    return build


def _best_candidate(
    builders: list[tuple[str, Callable[[], PurelyPeriodicPolicy]]],
    instance: RecoveryInstance,
) -> PurelyPeriodicPolicy:
    best_policy, best_value, best_label = None, -1.0, None
    for label, build in builders:
        policy = build()
        value = long_run_average(policy, instance)
        if value > best_value:
            best_policy, best_value, best_label = policy, value, label
    logger.debug("Best candidate %s with average %.6f", best_label, best_value)
    return best_policy
