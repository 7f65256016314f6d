"""Purely periodic policies

A purely periodic policy pulls arm i at every time step t >= 1 with
t = t_i (mod d_i), where d_i is the arm's period (None for never) and the
offset t_i lies in (-d_i, 0]. It is a k-policy if no step pulls more than
k arms.

Classes:
    - RewardModel: Protocol for anything that reports a mean reward per
      (arm, gap), e.g. a RecoveryInstance or a UCBTable
    - PolicyEntry: Period and offset of one arm
    - PurelyPeriodicPolicy: Per-arm entries and the budget k

Functions:
    - long_run_average: Average reward per period of a policy
    - parse_policy: Read the policy JSON document
"""

import json
from typing import Optional, Protocol, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from recovering_bandits._utils import Period
from recovering_bandits.exceptions import InstanceParseException
from recovering_bandits.validators import PolicyValidator, ValidationReport


class RewardModel(Protocol):
    # pylint: disable=missing-class-docstring, too-few-public-methods
    def mean_reward(self, arm: int, gap: int) -> float:
        # pylint: disable=missing-function-docstring
        ...


class PolicyEntry(BaseModel):
    """Period and offset of one arm

    Attributes:
        d: period, None when the arm is never pulled
        t: offset in (-d, 0], 0 for never-pulled arms
    """

    model_config = ConfigDict(frozen=True)

    d: Period = Field(default=None, alias="d")
    t: int = Field(default=0, alias="t")

    @field_validator("d", mode="before")
    @classmethod
    def parse_infinite_period(cls, value):
        """Accept 'inf' for the infinite period"""
        if isinstance(value, str) and value.strip().lower() == "inf":
            return None
        return value

    @property
    def first_pull(self) -> Optional[int]:
        """First time step at which the arm is pulled"""
        return None if self.d is None else self.t + self.d

    def is_pulled(self, step: int) -> bool:
        """True iff the arm is pulled at time step `step` >= 1"""
        return self.d is not None and (step - self.t) % self.d == 0


class PurelyPeriodicPolicy(BaseModel):
    """Purely periodic policy for a budget of k simultaneous pulls

    Attributes:
        k: budget
        entries: one PolicyEntry per arm
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(alias="k")
    entries: list[PolicyEntry] = Field(alias="entries")

    @property
    def periods(self) -> list[Period]:
        """Period of every arm"""
        return [entry.d for entry in self.entries]

    @property
    def scheduled_arms(self) -> list[int]:
        """Arms with a finite period"""
        return [arm for arm, entry in enumerate(self.entries) if entry.d is not None]

    def pulls_at(self, step: int) -> list[int]:
        """Arms pulled at time step `step` >= 1, in increasing index"""
        return [arm for arm, entry in enumerate(self.entries) if entry.is_pulled(step)]

    def pull_matrix(self, horizon: int) -> np.ndarray:
        """Boolean table P[t - 1, i], True iff arm i is pulled at step t"""
        matrix = np.zeros((horizon, len(self.entries)), dtype=bool)
        for arm, entry in enumerate(self.entries):
            if entry.d is not None:
                matrix[entry.first_pull - 1 :: entry.d, arm] = True
        return matrix

    def report(self, window_cap: Optional[int] = None) -> ValidationReport:
        """Offsets and budget checked over one full cycle"""
        return PolicyValidator(window_cap).report(self)

    def verify(self, window_cap: Optional[int] = None) -> bool:
        """Raise PolicyValidationException unless the policy is a valid k-policy"""
        return PolicyValidator(window_cap).validate(self)

    def to_json(self, **extra) -> str:
        """Policy JSON document, infinite periods written as 'inf'"""
        document = {
            "k": self.k,
            "entries": [
                {"d": "inf" if entry.d is None else entry.d, "t": entry.t}
                for entry in self.entries
            ],
        }
        document.update(extra)
        return json.dumps(document, indent=2)

    @staticmethod
    def new(k: int, periods: list[Period], offsets: Optional[list[int]] = None):
        """Create a policy from periods and offsets (default 0)"""
        offsets = offsets if offsets is not None else [0] * len(periods)
        if len(offsets) != len(periods):
            raise ValueError("periods and offsets must have the same length")
        entries = [
            PolicyEntry(d=d, t=0 if d is None else t) for d, t in zip(periods, offsets)
        ]
        return PurelyPeriodicPolicy(k=k, entries=entries)


def long_run_average(policy: PurelyPeriodicPolicy, rewards: RewardModel) -> float:
    """Average reward per period: sum of R_i(d_i) / d_i over finite periods"""
    return sum(
        rewards.mean_reward(arm, entry.d) / entry.d
        for arm, entry in enumerate(policy.entries)
        if entry.d is not None
    )


def parse_policy(data: Union[bytes, str]) -> PurelyPeriodicPolicy:
    """Parse a policy JSON document (extra keys such as 'ub' are ignored)

    Raises
    ------
    InstanceParseException
        If the document is malformed
    """
    try:
        return PurelyPeriodicPolicy.model_validate_json(data)
    except ValidationError as err:
        lines = [
            f"{'.'.join(str(part) for part in error['loc']) or 'document'}: {error['msg']}"
            for error in err.errors()
        ]
        raise InstanceParseException("\n".join(lines)) from err
