"""Instance and Policy Validators

Validators walk a whole entity, collect every violated invariant and
either report them or raise once with all of them joined.

Classes:
    - ValidationReport: Result of a validation pass (ok or list of violations)
    - AbstractValidator: Abstract class for validators
    - InstanceValidator: Checks recovery curves against the instance invariants
    - PolicyValidator: Checks offsets and the simultaneous-pull budget of a
      purely periodic policy
"""

# pylint: disable=missing-class-docstring

import math
from abc import ABC, abstractmethod
from typing import Optional, Protocol

import numpy as np
from pydantic import BaseModel, Field

from recovering_bandits._utils import lcm_of
from recovering_bandits.exceptions import (
    CapacityGuardException,
    InstanceValidationException,
    PolicyValidationException,
)
from recovering_bandits.settings import get_settings


class ValidationReport(BaseModel):
    """Outcome of a validation pass

    Attributes:
        violations: human readable description of every violated invariant
    """

    violations: list[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True iff no invariant is violated"""
        return not self.violations


class Curve(Protocol):
    rewards: list[float]


class Instance(Protocol):
    r_max: float
    arms: list[Curve]
    default_k: Optional[int]


class Entry(Protocol):
    d: Optional[int]
    t: int


class Policy(Protocol):
    k: int
    entries: list[Entry]


class AbstractValidator(ABC):
    """Abstract class for Validators"""

    @abstractmethod
    def report(self, entity) -> ValidationReport:
        """Collect every violation of the entity"""

    @abstractmethod
    def validate(self, entity) -> bool:
        """Validate the entity, raising on the first failed pass"""


class InstanceValidator(AbstractValidator):
    """Validator for Recovery Instances

    Checks that the instance has at least one arm, a positive finite r_max,
    a default budget in 1..N when given, and that every curve is non-empty,
    finite, non-negative, non-decreasing and bounded by r_max.
    """

    def report(self, entity: Instance) -> ValidationReport:
        validation_errors = []

        r_max = entity.r_max
        if not math.isfinite(r_max) or r_max <= 0:
            validation_errors.append(f"r_max must be a positive finite number, got {r_max}")

        if len(entity.arms) == 0:
            validation_errors.append("instance has no arms")

        if entity.default_k is not None and not 1 <= entity.default_k <= len(entity.arms):
            validation_errors.append(
                f"default_k must be in 1..{len(entity.arms)}, got {entity.default_k}"
            )

        for arm, curve in enumerate(entity.arms):
            validation_errors.extend(self._curve_errors(arm, curve.rewards, r_max))

        return ValidationReport(violations=validation_errors)

    def validate(self, entity: Instance) -> bool:
        report = self.report(entity)
        if not report.ok:
            raise InstanceValidationException("\n".join(report.violations))
        return True

    @staticmethod
    def _curve_errors(arm: int, rewards: list[float], r_max: float) -> list[str]:
        errors = []
        if len(rewards) == 0:
            return [f"arm {arm} has no rewards"]

        previous = 0.0
        for index, reward in enumerate(rewards):
            d = index + 1
            if not math.isfinite(reward):
                errors.append(f"arm {arm} has a non-finite reward at d={d}")
                continue
            if reward < 0:
                errors.append(f"arm {arm} has a negative reward at d={d}")
            if reward > r_max:
                errors.append(f"arm {arm} exceeds r_max at d={d}")
            if index > 0 and reward < previous:
                errors.append(f"arm {arm} not non-decreasing at d={d}")
            previous = reward
        return errors


class PolicyValidator(AbstractValidator):
    """Validator for Purely Periodic Policies

    Every finite period must be a positive integer with its offset in
    (-d, 0], and over one full cycle (the lcm of the finite periods) no time
    step may pull more than k arms. The cycle length is capped by the
    window guard of the runtime settings.
    """

    def __init__(self, window_cap: Optional[int] = None):
        self.window_cap = window_cap if window_cap is not None else get_settings().window_cap

    def report(self, entity: Policy) -> ValidationReport:
        validation_errors = []

        if entity.k < 1:
            validation_errors.append(f"budget k must be positive, got {entity.k}")

        for arm, entry in enumerate(entity.entries):
            if entry.d is None:
                continue
            if entry.d < 1:
                validation_errors.append(f"arm {arm} has a non-positive period {entry.d}")
            elif not -entry.d < entry.t <= 0:
                validation_errors.append(
                    f"arm {arm} offset {entry.t} is outside ({-entry.d}, 0]"
                )

        if validation_errors:
            return ValidationReport(violations=validation_errors)

        counts = self.pull_counts(entity)
        if counts.size and counts.max() > entity.k:
            step = int(np.argmax(counts)) + 1
            validation_errors.append(
                f"{int(counts.max())} arms pulled at t={step}, budget is {entity.k}"
            )
        return ValidationReport(violations=validation_errors)

    def validate(self, entity: Policy) -> bool:
        report = self.report(entity)
        if not report.ok:
            raise PolicyValidationException("\n".join(report.violations))
        return True

    def pull_counts(self, entity: Policy) -> np.ndarray:
        """Number of arms pulled at each step t = 1..window of one full cycle

        Raises
        ------
        CapacityGuardException
            If the cycle is longer than the window cap
        """
        finite = [entry for entry in entity.entries if entry.d is not None]
        window = lcm_of(entry.d for entry in finite)
        if window > self.window_cap:
            raise CapacityGuardException(
                f"Verification window {window} exceeds the cap of {self.window_cap} steps"
            )

        counts = np.zeros(window if finite else 0, dtype=np.int64)
        for entry in finite:
            first = entry.t + entry.d
            counts[first - 1 :: entry.d] += 1
        return counts
