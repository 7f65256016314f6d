"""Upper bound relaxation

The best long-run average reward of any policy pulling at most k arms per
period is bounded by

    max  sum_i F_i(x_i)   subject to   sum_i x_i <= k,  0 <= x_i <= 1

where F_i is the long-run average reward function of arm i. The program is
separable, concave and piecewise linear, so pouring the budget into the
segments in order of decreasing slope solves it exactly. The solution has
every frequency at 0 or at the reciprocal of a supporting point, except
possibly one arm whose segment was only partially filled.

Classes:
    - FractionalComponent: The single arm whose frequency is not a
      supporting reciprocal
    - RelaxationSolution: Optimal frequencies and the upper bound value

Functions:
    - solve_upper_bound
    - normalize_to_lemma2
    - ub_value
    - arm_envelopes
"""

import heapq
import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict

from recovering_bandits._utils import LOAD_TOLERANCE
from recovering_bandits.envelope import (
    PiecewiseLinearF,
    SupportSet,
    build_F,
    eval_F,
    supporting_points,
)
from recovering_bandits.instance import RecoveryInstance

logger = logging.getLogger(__name__)

FrequencyVector = list[float]


class FractionalComponent(BaseModel):
    """Arm whose optimal frequency lies strictly between two supporting reciprocals

    The frequency is alpha / upper_period + (1 - alpha) / lower_period, where
    upper_period is the k1-th supporting point (counting the plateau
    extension d, d+1, ... after the listed points) and lower_period the next.

    Attributes:
        arm: arm index
        alpha: interpolation weight in (0, 1)
        k1: 1-based index of upper_period in the supporting sequence
        upper_period: supporting gap with the larger frequency
        lower_period: next supporting gap, with the smaller frequency
    """

    model_config = ConfigDict(frozen=True)

    arm: int
    alpha: float
    k1: int
    upper_period: int
    lower_period: int


class RelaxationSolution(BaseModel):
    """Optimal solution of the upper bound relaxation

    Attributes:
        k: budget of simultaneous pulls
        x_star: optimal frequency of each arm
        ub: optimal value, the upper bound on any policy's average reward
        fractional_arm: the arm not at a supporting reciprocal, if any
    """

    model_config = ConfigDict(frozen=True)

    k: int
    x_star: list[float]
    ub: float
    fractional_arm: Optional[FractionalComponent] = None


def arm_envelopes(instance: RecoveryInstance) -> list[tuple[SupportSet, PiecewiseLinearF]]:
    """Supporting points and long-run average reward function of every arm"""
    envelopes = []
    for curve in instance.arms:
        support = supporting_points(curve)
        envelopes.append((support, build_F(support)))
    return envelopes


def solve_upper_bound(instance: RecoveryInstance, k: int) -> RelaxationSolution:
    """Solve the relaxation by water-filling

    Segments are filled in order of decreasing slope; ties go to the lower
    arm index and, within an arm, to the segment of smaller frequency.
    Segments of slope 0 are never filled.

    Parameters
    ----------
    instance : RecoveryInstance
        The instance
    k : int
        Budget of simultaneous pulls, 1 <= k <= N

    Returns
    -------
    RelaxationSolution
        Optimal frequencies in normal form and the upper bound

    Raises
    ------
    ValueError
        If k is out of range
    """
    _check_budget(instance, k)
    envelopes = arm_envelopes(instance)
    x_star = _water_fill([f for _, f in envelopes], float(k))

    ub = sum(eval_F(f, x) for (_, f), x in zip(envelopes, x_star))
    fractional = None
    for arm, ((support, _), x) in enumerate(zip(envelopes, x_star)):
        fractional = _fractional_component(arm, support, x)
        if fractional is not None:
            break

    logger.debug("Upper bound %.6f for k=%d, fractional arm %s", ub, k, fractional)
    return RelaxationSolution(k=k, x_star=x_star, ub=ub, fractional_arm=fractional)


def ub_value(instance: RecoveryInstance, k: int) -> float:
    """Upper bound on the long-run average reward with budget k"""
    return solve_upper_bound(instance, k).ub


def normalize_to_lemma2(
    x: FrequencyVector, instance: RecoveryInstance, k: Optional[float] = None
) -> FrequencyVector:
    """Move a feasible frequency vector into normal form without losing value

    Each frequency is capped at 1/d(1). Then, while two arms sit strictly
    inside linear pieces of their F, frequency is shifted from the arm with
    the smaller slope to the one with the larger slope until one of them
    reaches a supporting reciprocal.

    Parameters
    ----------
    x : list[float]
        Frequencies in [0, 1], one per arm
    instance : RecoveryInstance
        The instance
    k : float, optional
        Budget the vector must respect, not checked when omitted

    Returns
    -------
    list[float]
        Frequencies with at most one entry off the supporting reciprocals

    Raises
    ------
    ValueError
        If x is not feasible
    """
    if len(x) != instance.n_arms:
        raise ValueError(f"Expected {instance.n_arms} frequencies, got {len(x)}")
    if any(not 0.0 <= value <= 1.0 for value in x):
        raise ValueError("Frequencies must be in [0, 1]")
    if k is not None and sum(x) > k + LOAD_TOLERANCE:
        raise ValueError(f"Frequencies sum to {sum(x)}, above the budget {k}")

    supports = [supporting_points(curve) for curve in instance.arms]
    result = [min(value, 1.0 / support.first) for value, support in zip(x, supports)]

    pending = [i for i in range(len(result)) if _bracket(supports[i], result[i]) is not None]
    while len(pending) >= 2:
        i, j = pending[0], pending[1]
        lo_i, hi_i, slope_i = _bracket(supports[i], result[i])
        lo_j, hi_j, slope_j = _bracket(supports[j], result[j])
        if slope_i < slope_j:
            i, j = j, i
            lo_i, hi_i, lo_j, hi_j = lo_j, hi_j, lo_i, hi_i

        # i gains, j loses; whichever reaches its endpoint first snaps to it
        room_up, room_down = hi_i - result[i], result[j] - lo_j
        if room_up <= room_down:
            result[i] = hi_i
            result[j] -= room_up
        else:
            result[j] = lo_j
            result[i] += room_down

        pending = [p for p in pending if _bracket(supports[p], result[p]) is not None]

    return result


def _check_budget(instance: RecoveryInstance, k: int) -> None:
    if not 1 <= k <= instance.n_arms:
        raise ValueError(f"Budget k must be in 1..{instance.n_arms}, got {k}")


def _water_fill(functions: list[PiecewiseLinearF], budget: float) -> list[float]:
    """Greedy allocation of the budget over concave piecewise linear functions"""
    x_star = [0.0] * len(functions)
    slopes = [f.slopes for f in functions]

    # one pending segment per arm keeps each arm's segments in order
    heap = []
    for arm, f in enumerate(functions):
        _push_segment(heap, f, slopes[arm], arm, 0)

    while heap and budget > LOAD_TOLERANCE:
        _, arm, _, segment = heapq.heappop(heap)
        f = functions[arm]
        length = f.xs[segment + 1] - f.xs[segment]
        if length <= budget + LOAD_TOLERANCE:
            x_star[arm] = f.xs[segment + 1]
            budget -= length
            _push_segment(heap, f, slopes[arm], arm, segment + 1)
        else:
            x_star[arm] = f.xs[segment] + budget
            budget = 0.0
    return x_star


def _push_segment(heap: list, f: PiecewiseLinearF, slopes: list[float], arm: int, segment: int):
    if segment < len(slopes) and slopes[segment] > 0:
        period_end = 1.0 / f.xs[segment + 1]
        heapq.heappush(heap, (-slopes[segment], arm, -period_end, segment))


def _bracket(support: SupportSet, x: float) -> Optional[tuple[float, float, float]]:
    """(lower, upper, slope) of the linear piece holding x, None at a supporting reciprocal or 0"""
    if x <= 0:
        return None
    upper = support.upper_period(x)
    lower = support.lower_period(x)
    if upper is None or upper == lower:
        return None
    lo, hi = 1.0 / lower, 1.0 / upper
    slope = (support.reward_at(upper) / upper - support.reward_at(lower) / lower) / (hi - lo)
    return lo, hi, slope


def _fractional_component(arm: int, support: SupportSet, x: float) -> Optional[FractionalComponent]:
    if _bracket(support, x) is None:
        return None
    upper = support.upper_period(x)
    lower = support.lower_period(x)
    alpha = (x - 1.0 / lower) / (1.0 / upper - 1.0 / lower)
    periods = support.periods
    if upper in periods:
        k1 = periods.index(upper) + 1
    else:
        k1 = len(periods) + upper - support.last
    return FractionalComponent(
        arm=arm, alpha=alpha, k1=k1, upper_period=upper, lower_period=lower
    )
