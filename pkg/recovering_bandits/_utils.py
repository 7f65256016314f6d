"""This module contains generic numeric helpers used across the package
"""

import math
from functools import reduce
from typing import Iterable, Optional

# frequencies closer than this to 1/d are treated as exactly 1/d
RECIPROCAL_TOLERANCE = 1e-9
# slack on frequency-budget comparisons done in floating point
LOAD_TOLERANCE = 1e-12
# r_max of generated instances is a multiple of this step
R_MAX_STEP = 100

Period = Optional[int]
"""A period in Z+ or None for an arm that is never pulled"""


def odd_part(d: int) -> int:
    """Odd factor of a positive integer, e.g. 12 -> 3"""
    if d < 1:
        raise ValueError(f"Period must be a positive integer, got {d}")
    while d % 2 == 0:
        d //= 2
    return d


def two_exponent(d: int) -> int:
    """Exponent of the largest power of 2 dividing d, e.g. 12 -> 2"""
    return (d // odd_part(d)).bit_length() - 1


def reciprocal_ceil(x: float) -> int:
    """Smallest integer d with d >= 1/x, tolerant to 1/d round-off"""
    inverse = 1.0 / x
    nearest = round(inverse)
    if abs(inverse - nearest) <= RECIPROCAL_TOLERANCE * max(1.0, inverse):
        return max(1, int(nearest))
    return max(1, math.ceil(inverse))


def reciprocal_floor(x: float) -> int:
    """Largest integer d with d <= 1/x, tolerant to 1/d round-off"""
    inverse = 1.0 / x
    nearest = round(inverse)
    if abs(inverse - nearest) <= RECIPROCAL_TOLERANCE * max(1.0, inverse):
        return max(1, int(nearest))
    return max(1, math.floor(inverse))


def is_reciprocal_of(x: float, d: int) -> bool:
    """Checks if x equals 1/d up to round-off"""
    return abs(x - 1.0 / d) <= RECIPROCAL_TOLERANCE / d


def lcm_of(periods: Iterable[int]) -> int:
    """Least common multiple of a collection of periods (1 when empty)"""
    return reduce(math.lcm, periods, 1)


def round_up_to_step(value: float, step: int = R_MAX_STEP) -> float:
    """Smallest positive multiple of step that is >= value"""
    return float(step * max(1, math.ceil(value / step)))
