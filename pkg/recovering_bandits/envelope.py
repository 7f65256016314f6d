"""Upper concave envelopes and long-run average reward functions

For a recovery curve R, the supporting points are the gaps at which R
touches its upper concave envelope. Pulling an arm once every d periods
with d a supporting point yields R(d)/d per period, and interpolating
these values over the frequencies 1/d gives the concave, piecewise linear
function F(x): the best long-run average reward of the arm when it is
pulled with frequency x.

Classes:
    - SupportSet: Ordered supporting points (d, R(d)) of a curve
    - PiecewiseLinearF: Breakpoints of F over frequencies in [0, 1]

Functions:
    - supporting_points
    - envelope_value
    - build_F
    - eval_F
"""

# pylint: disable=invalid-name

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from recovering_bandits._utils import is_reciprocal_of, reciprocal_ceil, reciprocal_floor
from recovering_bandits.instance import ArmCurve


class SupportSet(BaseModel):
    """Supporting points d(1) < d(2) < ... of a recovery curve

    The last point is the plateau start of the curve. Every later gap lies
    on the envelope too, with the plateau reward, so `is_supporting` accepts
    any d beyond the last point.

    Attributes:
        points: (d, R(d)) pairs in increasing d
    """

    model_config = ConfigDict(frozen=True)

    points: list[tuple[int, float]] = Field(alias="points")

    @property
    def periods(self) -> list[int]:
        """Supporting gaps in increasing order"""
        return [d for d, _ in self.points]

    @property
    def first(self) -> int:
        """Smallest supporting gap d(1)"""
        return self.points[0][0]

    @property
    def last(self) -> int:
        """Largest listed supporting gap, the plateau start"""
        return self.points[-1][0]

    @property
    def plateau_reward(self) -> float:
        """Reward at the plateau"""
        return self.points[-1][1]

    def is_supporting(self, d: int) -> bool:
        """True iff d touches the envelope"""
        return d >= self.last or d in self.periods

    def reward_at(self, d: int) -> float:
        """R(d) for a supporting gap d"""
        if d >= self.last:
            return self.plateau_reward
        return dict(self.points)[d]

    def upper_period(self, x: float) -> Optional[int]:
        """Largest supporting d with 1/d >= x, None for x above 1/d(1)

        This is the period of the smallest supporting frequency that is at
        least x.
        """
        if x <= 0:
            raise ValueError(f"Frequency must be positive, got {x}")
        if x <= 1.0 / self.last:
            return reciprocal_floor(x)
        candidates = [d for d in self.periods if 1.0 / d >= x or is_reciprocal_of(x, d)]
        return max(candidates) if candidates else None

    def lower_period(self, x: float) -> int:
        """Smallest supporting d with 1/d <= x"""
        if x <= 0:
            raise ValueError(f"Frequency must be positive, got {x}")
        if x <= 1.0 / self.last:
            return reciprocal_ceil(x)
        return min(d for d in self.periods if 1.0 / d <= x or is_reciprocal_of(x, d))


class PiecewiseLinearF(BaseModel):
    """Long-run average reward as a function of the pull frequency

    Attributes:
        xs: breakpoint frequencies, strictly increasing from 0
        fs: value of F at each breakpoint, starting at 0
    """

    model_config = ConfigDict(frozen=True)

    xs: list[float] = Field(alias="xs")
    fs: list[float] = Field(alias="fs")

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        """(x, F(x)) pairs"""
        return list(zip(self.xs, self.fs))

    @property
    def slopes(self) -> list[float]:
        """Slope of each segment between consecutive breakpoints"""
        return [
            (self.fs[i + 1] - self.fs[i]) / (self.xs[i + 1] - self.xs[i])
            for i in range(len(self.xs) - 1)
        ]


def supporting_points(curve: ArmCurve) -> SupportSet:
    """Supporting points of the upper concave envelope of a curve

    Starting from (0, 0), the next point is the gap maximizing the slope from
    the current point, ties going to the smallest gap. The search stops at
    the plateau start.

    Parameters
    ----------
    curve : ArmCurve
        A valid recovery curve

    Returns
    -------
    SupportSet
        Supporting points in increasing order of gap
    """
    rewards = curve.rewards
    end = curve.plateau_start
    points = []
    prev_d, prev_r = 0, 0.0
    while prev_d < end:
        best_d, best_r = prev_d + 1, rewards[prev_d]
        for d in range(prev_d + 2, end + 1):
            r = rewards[d - 1]
            # slope to d beats slope to best_d, compared without division
            if (r - prev_r) * (best_d - prev_d) > (best_r - prev_r) * (d - prev_d):
                best_d, best_r = d, r
        points.append((best_d, best_r))
        prev_d, prev_r = best_d, best_r
    return SupportSet(points=points)


def envelope_value(support: SupportSet, d: int) -> float:
    """Upper concave envelope of the curve at gap d

    Linear interpolation between the bracketing supporting points, with
    (0, 0) as left anchor, and the plateau value beyond the last point.
    """
    if d < 1:
        raise ValueError(f"Gap must be a positive integer, got {d}")
    gaps = [0.0] + [float(p) for p, _ in support.points]
    values = [0.0] + [r for _, r in support.points]
    return float(np.interp(d, gaps, values))


def build_F(support: SupportSet) -> PiecewiseLinearF:
    """Piecewise linear long-run average reward function of an arm

    Breakpoints sit at x = 1/d(k) with value R(d(k))/d(k). Below the smallest
    breakpoint F is the line through the origin with slope R at the plateau,
    and above 1/d(1) it is constant up to x = 1.
    """
    xs, fs = [0.0], [0.0]
    for d, r in reversed(support.points):
        xs.append(1.0 / d)
        fs.append(r / d)
    if xs[-1] < 1.0:
        xs.append(1.0)
        fs.append(fs[-1])
    return PiecewiseLinearF(xs=xs, fs=fs)


def eval_F(f: PiecewiseLinearF, x: float) -> float:
    """Evaluate F at frequency x in [0, 1]"""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"Frequency must be in [0, 1], got {x}")
    return float(np.interp(x, f.xs, f.fs))
