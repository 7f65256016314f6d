"""Recovering Bandits: periodic planning and phased learning for bandits with recovering rewards"""

__all__ = [
    "ArmCurve",
    "RecoveryInstance",
    "RuntimeSettings",
    "PurelyPeriodicPolicy",
    "PolicyEntry",
    "PhaseConfig",
    "UCBTable",
    "ExperimentConfig",
    "generate_random_instance",
    "parse_instance",
    "serialize_instance",
    "solve_upper_bound",
    "offline_plan",
    "offline_plan_refined",
    "offline_plan_ensemble",
    "long_run_average",
    "run_learner",
    "greedy_policy",
    "run_experiment",
]

from recovering_bandits.experiments import ExperimentConfig, run_experiment
from recovering_bandits.instance import (
    ArmCurve,
    RecoveryInstance,
    generate_random_instance,
    parse_instance,
    serialize_instance,
)
from recovering_bandits.online import PhaseConfig, UCBTable, run_learner
from recovering_bandits.planner import (
    offline_plan,
    offline_plan_ensemble,
    offline_plan_refined,
)
from recovering_bandits.policy import PolicyEntry, PurelyPeriodicPolicy, long_run_average
from recovering_bandits.relaxation import solve_upper_bound
from recovering_bandits.settings import RuntimeSettings
from recovering_bandits.simulator import greedy_policy
