"""Recovery Instances Module

This module provides the Pydantic models describing a multi-armed bandit
with recovering rewards, together with the functions to generate, parse
and serialize them.

An arm's recovery curve R(d) is the mean reward collected when the arm is
pulled d periods after its previous pull. Curves are stored densely over
d = 1..d_max and extended by their last value, and R(0) = 0. All arms are
treated as last pulled at time 0.

Classes:
    - ArmCurve: Recovery curve of a single arm
    - RecoveryInstance: Collection of arms with the global reward bound

Functions:
    - validate: Report every violated instance invariant
    - mean_reward: Mean reward of an arm at a given gap
    - generate_random_instance: Random instance following the synthetic protocol
    - parse_instance / serialize_instance: JSON round trip
    - read_instance / write_instance: file helpers used by the command line
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from recovering_bandits._utils import round_up_to_step
from recovering_bandits.exceptions import InstanceParseException
from recovering_bandits.validators import InstanceValidator, ValidationReport

logger = logging.getLogger(__name__)


class ArmCurve(BaseModel):
    """Recovery curve of one arm

    Attributes:
        rewards: mean rewards R(1..d_max), non-decreasing
    """

    model_config = ConfigDict(frozen=True)

    rewards: list[float] = Field(alias="rewards")

    @property
    def d_max(self) -> int:
        """Recovery horizon, the length of the stored curve"""
        return len(self.rewards)

    @property
    def plateau_start(self) -> int:
        """First gap at which the curve reaches its final value"""
        last = self.rewards[-1]
        for index, reward in enumerate(self.rewards):
            if reward >= last:
                return index + 1
        return self.d_max

    def mean_reward(self, gap: int) -> float:
        """Mean reward after a gap of `gap` periods (0 for gap 0, plateau after d_max)"""
        if gap < 0:
            raise ValueError(f"Gap must be a non-negative integer, got {gap}")
        if gap == 0:
            return 0.0
        return self.rewards[min(gap, self.d_max) - 1]


class RecoveryInstance(BaseModel):
    """Multi-armed bandit instance with recovering rewards

    Attributes:
        r_max: global bound on every mean reward
        arms: one recovery curve per arm
        default_k: optional default number of simultaneous pulls
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    r_max: float = Field(alias="r_max")
    arms: list[ArmCurve] = Field(alias="arms")
    default_k: Optional[int] = Field(default=None, alias="default_k")

    @property
    def n_arms(self) -> int:
        """Number of arms N"""
        return len(self.arms)

    @property
    def max_d_max(self) -> int:
        """Largest recovery horizon over all arms"""
        return max(curve.d_max for curve in self.arms)

    def mean_reward(self, arm: int, gap: int) -> float:
        """Mean reward of `arm` when pulled `gap` periods after its last pull

        Raises
        ------
        IndexError
            If the arm index is out of range
        ValueError
            If the gap is negative
        """
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"Arm index {arm} out of range for {self.n_arms} arms")
        return self.arms[arm].mean_reward(gap)

    def reward_matrix(self, max_gap: Optional[int] = None) -> np.ndarray:
        """Dense table M[i, g] = R_i(g) for g = 0..max_gap

        Gaps beyond `max_gap` behave like `max_gap` as long as
        `max_gap >= max_d_max`, which is the default.
        """
        max_gap = self.max_d_max if max_gap is None else max_gap
        matrix = np.zeros((self.n_arms, max_gap + 1))
        for arm, curve in enumerate(self.arms):
            rewards = np.asarray(curve.rewards, dtype=float)
            width = min(curve.d_max, max_gap)
            matrix[arm, 1 : width + 1] = rewards[:width]
            matrix[arm, width + 1 :] = rewards[width - 1] if width else 0.0
        return matrix

    def validate(self) -> ValidationReport:
        """Report every violated invariant"""
        return InstanceValidator().report(self)

    @staticmethod
    def new(
        rewards: list[list[float]],
        r_max: Optional[float] = None,
        default_k: Optional[int] = None,
    ) -> "RecoveryInstance":
        """Create a new validated instance from raw reward curves

        Parameters
        ----------
        rewards : list[list[float]]
            One list of mean rewards R(1..d_max) per arm
        r_max : float, optional
            Global reward bound. When omitted, the smallest multiple of 100
            that is at least the largest reward is used.
        default_k : int, optional
            Default number of simultaneous pulls

        Returns
        -------
        RecoveryInstance
            The validated instance

        Raises
        ------
        InstanceValidationException
            If any invariant is violated
        """
        if r_max is None:
            largest = max((max(curve) for curve in rewards if curve), default=0.0)
            r_max = round_up_to_step(largest)

        instance = RecoveryInstance(
            r_max=r_max,
            arms=[ArmCurve(rewards=curve) for curve in rewards],
            default_k=default_k,
        )
        InstanceValidator().validate(instance)
        return instance


def validate(instance: RecoveryInstance) -> ValidationReport:
    """Report every violated invariant of `instance` (never raises)"""
    return InstanceValidator().report(instance)


def mean_reward(instance: RecoveryInstance, arm: int, gap: int) -> float:
    """Mean reward of `arm` after `gap` periods, see RecoveryInstance.mean_reward"""
    return instance.mean_reward(arm, gap)


def generate_random_instance(n: int, seed: int, dmax_cap: int = 25) -> RecoveryInstance:
    """Generate a random instance

    For each arm, d_max is uniform on 1..dmax_cap, the curve is (1 + a) times
    d_max sorted uniform draws on [0, 1] and a is the absolute value of a
    standard logistic variate. r_max is the smallest multiple of 100 that is
    at least the largest reward.

    Parameters
    ----------
    n : int
        Number of arms
    seed : int
        Seed of the numpy random generator
    dmax_cap : int, optional
        Largest recovery horizon, by default 25

    Returns
    -------
    RecoveryInstance
        The generated instance, deterministic given the seed
    """
    if n < 1:
        raise ValueError(f"Number of arms must be a positive integer, got {n}")
    if dmax_cap < 1:
        raise ValueError(f"dmax_cap must be a positive integer, got {dmax_cap}")

    rng = np.random.default_rng(seed)
    curves = []
    for _ in range(n):
        d_max = int(rng.integers(1, dmax_cap + 1))
        uniforms = np.sort(rng.uniform(0.0, 1.0, size=d_max))
        scale = 1.0 + abs(float(rng.logistic(0.0, 1.0)))
        curves.append((scale * uniforms).tolist())

    largest = max(max(curve) for curve in curves)
    logger.debug("Generated %d arms with seed %s, largest reward %.4f", n, seed, largest)
    return RecoveryInstance(
        r_max=round_up_to_step(largest),
        arms=[ArmCurve(rewards=curve) for curve in curves],
    )


def parse_instance(data: Union[bytes, str]) -> RecoveryInstance:
    """Parse an instance from its JSON document

    Raises
    ------
    InstanceParseException
        If the document is malformed, with the location of each error
    InstanceValidationException
        If the parsed instance violates an invariant
    """
    try:
        instance = RecoveryInstance.model_validate_json(data)
    except ValidationError as err:
        raise InstanceParseException(_describe_errors(err)) from err

    InstanceValidator().validate(instance)
    return instance


def serialize_instance(instance: RecoveryInstance) -> bytes:
    """JSON document of an instance, inverse of parse_instance"""
    return instance.model_dump_json(by_alias=True, exclude_none=True).encode("utf-8")


def read_instance(path: Union[str, Path]) -> RecoveryInstance:
    """Read and validate an instance file"""
    return parse_instance(Path(path).read_bytes())


def write_instance(instance: RecoveryInstance, path: Union[str, Path]) -> None:
    """Write an instance file"""
    Path(path).write_bytes(serialize_instance(instance))
    logger.info("Instance with %d arms written to %s", instance.n_arms, path)


def _describe_errors(err: ValidationError) -> str:
    """One line per pydantic error, prefixed with its location"""
    lines = []
    for error in err.errors():
        location = ".".join(str(part) for part in error["loc"]) or "document"
        lines.append(f"{location}: {error['msg']}")
    return "\n".join(lines)
