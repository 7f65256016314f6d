"""Rounding and scheduling

Turns frequencies into a feasible purely periodic policy:

1. round every frequency up to a period in D[a];
2. split the arms of each odd part into groups whose frequencies sum to at
   most 1;
3. interleave every group into a collision-free schedule that pulls one
   arm per step;
4. keep the k groups with the largest average reward.

Classes:
    - GroupPartition: Disjoint arm groups with their loads
    - ScheduledGroup: A collision-free group with periods and offsets

Functions:
    - split_groups
    - schedule_single_group
    - group_periods
    - schedule_periods
    - rs_procedure
"""

import logging
from collections import defaultdict
from typing import Mapping

from pydantic import BaseModel, ConfigDict

from recovering_bandits._utils import Period, odd_part, two_exponent
from recovering_bandits.exceptions import ScheduleConstructionException
from recovering_bandits.periods import round_frequencies
from recovering_bandits.policy import PolicyEntry, PurelyPeriodicPolicy, RewardModel

logger = logging.getLogger(__name__)


class GroupPartition(BaseModel):
    """Disjoint groups of arms, each with load (sum of 1/d) at most 1

    Attributes:
        groups: arm indices of each group, in construction order
        loads: sum of frequencies of each group
    """

    model_config = ConfigDict(frozen=True)

    groups: list[list[int]]
    loads: list[float]


class ScheduledGroup(BaseModel):
    """A group of arms sharing one odd part, interleaved without collisions

    Attributes:
        arms: arm indices
        periods: period of each arm
        offsets: offset of each arm, in (-d, 0]
        load: sum of frequencies
    """

    model_config = ConfigDict(frozen=True)

    arms: list[int]
    periods: list[int]
    offsets: list[int]
    load: float

    def value(self, rewards: RewardModel) -> float:
        """Average reward per period of the group"""
        return sum(
            rewards.mean_reward(arm, d) / d for arm, d in zip(self.arms, self.periods)
        )


def split_groups(periods: Mapping[int, int]) -> GroupPartition:
    """Split arms whose periods share one odd part into groups of load <= 1

    Periods are sorted in increasing order and accumulated; a group is closed
    as soon as its load reaches exactly 1. Loads are tracked as integers in
    units of 1/(odd * 2^L), L the largest exponent, so the cut is exact.

    Parameters
    ----------
    periods : Mapping[int, int]
        Period of each arm

    Returns
    -------
    GroupPartition
        At most ceil(sum of 1/d) groups

    Raises
    ------
    ValueError
        If the periods have different odd parts
    """
    odd = _common_odd_part(periods)
    groups = _prefix_split(list(periods.items()), odd)
    return GroupPartition(
        groups=[[arm for arm, _ in group] for group in groups],
        loads=[sum(1.0 / d for _, d in group) for group in groups],
    )


def schedule_single_group(periods: Mapping[int, int]) -> dict[int, int]:
    """Offsets of a collision-free schedule for one group

    For odd part 1 the group is scheduled recursively: halve every period,
    split the halved group into two groups of load at most 1 when needed,
    and place them on the even and odd residues. For odd part m > 1 the
    periods divided by m are split into at most m groups of load at most 1,
    each scheduled as above on its own residue class modulo m.

    Parameters
    ----------
    periods : Mapping[int, int]
        Period of each arm; all share one odd part and sum of 1/d <= 1

    Returns
    -------
    dict[int, int]
        Offset t_i in (-d_i, 0] of each arm

    Raises
    ------
    ValueError
        If the odd parts differ or the load exceeds 1
    """
    if not periods:
        return {}
    odd = _common_odd_part(periods)
    top = max(two_exponent(d) for d in periods.values())
    units = sum(1 << (top - two_exponent(d)) for d in periods.values())
    if units > odd << top:
        raise ValueError(f"Group load {sum(1.0 / d for d in periods.values()):.6f} exceeds 1")

    reduced = [(arm, d // odd) for arm, d in periods.items()]
    offsets = {}
    for slot, subset in enumerate(_prefix_split(reduced, 1)):
        if slot >= odd:
            raise ScheduleConstructionException(
                f"Odd part {odd} group split into more than {odd} unit-load subsets"
            )
        residues = _interleave({arm: two_exponent(d) for arm, d in subset})
        for arm, residue in residues.items():
            d = periods[arm]
            residue = odd * residue + slot
            offsets[arm] = 0 if residue == 0 else residue - d
    return offsets


def group_periods(periods: list[Period]) -> list[ScheduledGroup]:
    """Split every odd-part class into groups and schedule each group

    Classes are visited in increasing odd part, groups in construction order.
    """
    classes = defaultdict(dict)
    for arm, d in enumerate(periods):
        if d is not None:
            classes[odd_part(d)][arm] = d

    scheduled = []
    for odd in sorted(classes):
        members = classes[odd]
        partition = split_groups(members)
        for arms, load in zip(partition.groups, partition.loads):
            offsets = schedule_single_group({arm: members[arm] for arm in arms})
            scheduled.append(
                ScheduledGroup(
                    arms=arms,
                    periods=[members[arm] for arm in arms],
                    offsets=[offsets[arm] for arm in arms],
                    load=load,
                )
            )
    return scheduled


def schedule_periods(
    periods: list[Period], k: int, rewards: RewardModel
) -> PurelyPeriodicPolicy:
    """Schedule rounded periods and keep the k best groups

    Groups are ranked by average reward under `rewards`, then by load, then
    by their smallest arm index. Arms of dropped groups are never pulled.
    """
    if k < 1:
        raise ValueError(f"Budget k must be a positive integer, got {k}")

    groups = group_periods(periods)
    ranked = sorted(
        groups, key=lambda group: (-group.value(rewards), -group.load, min(group.arms))
    )
    entries = [PolicyEntry() for _ in periods]
    for group in ranked[:k]:
        for arm, d, t in zip(group.arms, group.periods, group.offsets):
            entries[arm] = PolicyEntry(d=d, t=t)

    logger.debug("Scheduled %d of %d groups for k=%d", min(k, len(groups)), len(groups), k)
    return PurelyPeriodicPolicy(k=k, entries=entries)


def rs_procedure(x: list[float], k: int, a: int, rewards: RewardModel) -> PurelyPeriodicPolicy:
    """Round frequencies into D[a] and schedule the k best groups

    Parameters
    ----------
    x : list[float]
        Frequency of each arm, in [0, 1]
    k : int
        Budget of simultaneous pulls
    a : int
        Period class parameter
    rewards : RewardModel
        Mean rewards used to rank the groups

    Returns
    -------
    PurelyPeriodicPolicy
        A feasible k-policy
    """
    return schedule_periods(round_frequencies(x, a), k, rewards)


def _common_odd_part(periods: Mapping[int, int]) -> int:
    odd_parts = {odd_part(d) for d in periods.values()}
    if len(odd_parts) > 1:
        raise ValueError(f"Periods must share one odd part, got odd parts {sorted(odd_parts)}")
    return odd_parts.pop() if odd_parts else 1


def _prefix_split(items: list[tuple[int, int]], odd: int) -> list[list[tuple[int, int]]]:
    """Cut (arm, period) pairs sorted by period into consecutive groups of load <= 1"""
    if not items:
        return []
    ordered = sorted(items, key=lambda item: (item[1], item[0]))
    top = max(two_exponent(d) for _, d in ordered)
    capacity = odd << top

    groups, current, filled = [], [], 0
    for arm, d in ordered:
        weight = 1 << (top - two_exponent(d))
        if filled + weight > capacity:
            raise ScheduleConstructionException(
                f"Prefix load {filled}/{capacity} cannot absorb period {d} without reaching 1"
            )
        current.append((arm, d))
        filled += weight
        if filled == capacity:
            groups.append(current)
            current, filled = [], 0
    if current:
        groups.append(current)
    return groups


def _interleave(exponents: dict[int, int]) -> dict[int, int]:
    """Residues r_i mod 2^l_i of a collision-free schedule, sum of 2^-l_i <= 1"""
    if len(exponents) == 1:
        return {arm: 0 for arm in exponents}

    halved = {arm: exponent - 1 for arm, exponent in exponents.items()}
    if min(halved.values()) < 0:
        raise ScheduleConstructionException("A period-1 arm shares its group with other arms")

    top = max(halved.values())
    if sum(1 << (top - exponent) for exponent in halved.values()) <= 1 << top:
        return {arm: 2 * residue for arm, residue in _interleave(halved).items()}

    parts = _prefix_split([(arm, 1 << exponent) for arm, exponent in halved.items()], 1)
    if len(parts) != 2:
        raise ScheduleConstructionException(f"Halved group split into {len(parts)} parts")
    even = _interleave({arm: two_exponent(d) for arm, d in parts[0]})
    odd = _interleave({arm: two_exponent(d) for arm, d in parts[1]})
    residues = {arm: 2 * residue for arm, residue in even.items()}
    residues.update({arm: 2 * residue + 1 for arm, residue in odd.items()})
    return residues
