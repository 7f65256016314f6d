"""Period classes and frequency rounding

Periods are restricted to D[a], the integers whose odd part is at most
2a - 1, i.e. (2j - 1) * 2^l for j = 1..a and l >= 0. Periods sharing an odd
part can always be interleaved without collisions as long as their
frequencies sum to at most 1.

Classes:
    - PeriodClass: Membership and rounding for D[a], optionally restricted
      to a single odd part plus period 1

Functions:
    - round_frequencies: Round frequencies up to periods in D[a]
    - round_to_class: Round frequencies up to periods in {(2a-1) * 2^l} + {1}
    - class_members: Members of a class up to a bound
"""

from pydantic import BaseModel, ConfigDict, Field

from recovering_bandits._utils import Period, odd_part, reciprocal_ceil


class PeriodClass(BaseModel):
    """The period set D[a], or its single-class variant

    When `single` is set the class is {(2a - 1) * 2^l : l >= 0} together
    with the period 1.

    Attributes:
        a: class parameter, a positive integer
        single: restrict to the odd part 2a - 1 (plus period 1)
    """

    model_config = ConfigDict(frozen=True)

    a: int = Field(ge=1)
    single: bool = False

    @property
    def odd_parts(self) -> list[int]:
        """Allowed odd parts"""
        if self.single:
            return sorted({1, 2 * self.a - 1})
        return list(range(1, 2 * self.a, 2))

    def contains(self, d: Period) -> bool:
        """Membership test, None standing for the infinite period"""
        if d is None:
            return True
        if d < 1:
            return False
        if self.single:
            return d == 1 or odd_part(d) == 2 * self.a - 1
        return odd_part(d) <= 2 * self.a - 1

    def round_up(self, target: int) -> int:
        """Smallest member that is >= target"""
        best = None
        for odd in self.odd_parts:
            if self.single and odd == 1 and odd != 2 * self.a - 1:
                candidate = 1 if target <= 1 else None
            else:
                candidate = odd
                while candidate < target:
                    candidate *= 2
            if candidate is not None and (best is None or candidate < best):
                best = candidate
        return best

    def members(self, upper: int) -> list[int]:
        """Members d <= upper in increasing order"""
        found = set()
        for odd in self.odd_parts:
            if self.single and odd == 1 and odd != 2 * self.a - 1:
                if upper >= 1:
                    found.add(1)
                continue
            d = odd
            while d <= upper:
                found.add(d)
                d *= 2
        return sorted(found)

    def round_frequency(self, x: float) -> Period:
        """Smallest member d with d >= 1/x, None for x = 0"""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"Frequency must be in [0, 1], got {x}")
        if x == 0.0:
            return None
        return self.round_up(reciprocal_ceil(x))


def round_frequencies(x: list[float], a: int) -> list[Period]:
    """Round each frequency up to a period in D[a]

    Parameters
    ----------
    x : list[float]
        Frequencies in [0, 1]
    a : int
        Class parameter

    Returns
    -------
    list[Optional[int]]
        d_i = min{d >= 1/x_i, d in D[a]}, None when x_i = 0
    """
    period_class = PeriodClass(a=a)
    return [period_class.round_frequency(value) for value in x]


def round_to_class(x: list[float], a: int) -> list[Period]:
    """Round each frequency up to a period in {(2a - 1) * 2^l} + {1}, None for 0"""
    period_class = PeriodClass(a=a, single=True)
    return [period_class.round_frequency(value) for value in x]


def class_members(a: int, upper: int, single: bool = False) -> list[int]:
    """Members of D[a] (or of its single-class variant) up to `upper`"""
    return PeriodClass(a=a, single=single).members(upper)

def odd_class_members(a: int, upper: int) -> list[int]:
    """Periods (2a - 1) * 2^l <= upper, the class scanned by the exact knapsack"""
    if a < 1:
        raise ValueError(f"Class parameter a must be a positive integer, got {a}")
    members, d = [], 2 * a - 1
    while d <= upper:
        members.append(d)
        d *= 2
    return members
