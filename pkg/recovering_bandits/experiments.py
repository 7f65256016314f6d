"""Experiment harness

Runs planners, the greedy baseline and the online learners over a set of
instances and budgets, and reports each one's average reward as a fraction
of the relaxation upper bound.

Classes:
    - GeneratorSpec: Random instance generation parameters
    - ExperimentConfig: Full experiment description, loadable from JSON

Functions:
    - load_config: Parse an experiment config document
    - run_experiment: Result table with one row per (instance, k, policy, phi)
    - run_benchmark: Preset suites comparing the solvers with their guarantees
"""

# pylint: disable=too-many-locals

import logging
import time
from pathlib import Path
from typing import Callable, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from recovering_bandits.exceptions import InstanceParseException
from recovering_bandits.instance import (
    RecoveryInstance,
    generate_random_instance,
    read_instance,
)
from recovering_bandits.knapsack import (
    CandidateItem,
    brute_force,
    solve_exact_pow2,
    solve_fptas,
)
from recovering_bandits.online import PhaseConfig, run_learner
from recovering_bandits.planner import (
    best_a,
    gamma_k,
    offline_plan,
    offline_plan_ensemble,
    offline_plan_refined,
)
from recovering_bandits.policy import PurelyPeriodicPolicy, long_run_average
from recovering_bandits.relaxation import ub_value
from recovering_bandits.simulator import greedy_policy

logger = logging.getLogger(__name__)

PolicyName = Literal[
    "basic", "refined", "ensemble", "greedy", "online-basic", "online-refined", "online-ensemble"
]
BenchmarkSuite = Literal["offline", "online", "knapsack"]

RESULT_COLUMNS = [
    "instance_id",
    "n",
    "k",
    "policy",
    "phi",
    "trial_mean_ratio",
    "trial_std",
    "runtime_ms",
]

OFFLINE_PLANNERS: dict[str, Callable[[RecoveryInstance, int], PurelyPeriodicPolicy]] = {
    "basic": offline_plan,
    "refined": offline_plan_refined,
    "ensemble": offline_plan_ensemble,
}


class GeneratorSpec(BaseModel):
    """Random instances generated with seeds seed, seed + 1, ...

    Attributes:
        n: number of arms
        count: number of instances
        seed: seed of the first instance
        dmax_cap: largest recovery horizon
    """

    n: int = Field(ge=1)
    count: int = Field(default=1, ge=1)
    seed: int = 0
    dmax_cap: int = Field(default=25, ge=1)


class ExperimentConfig(BaseModel):
    """Experiment description

    Exactly one of `instance_path` and `generator` must be given.

    Attributes:
        instance_path: instance file
        generator: random instance generation
        k_values: budgets to evaluate
        policies: policies to evaluate
        horizon: number of periods T for the greedy baseline and the learners
        trials: number of seeded learner runs per cell
        seed: seed of the first learner run
        phi_values: phase lengths of the learners
        epsilon: knapsack accuracy of the basic learner, 0 for exact
        output: CSV path of the results
    """

    instance_path: Optional[str] = None
    generator: Optional[GeneratorSpec] = None
    k_values: list[int] = Field(min_length=1)
    policies: list[PolicyName] = Field(min_length=1)
    horizon: int = Field(default=10_000, ge=1)
    trials: int = Field(default=1, ge=1)
    seed: int = 0
    phi_values: list[int] = Field(default_factory=lambda: [100])
    epsilon: float = Field(default=0.0, ge=0.0, le=1.0)
    output: Optional[str] = None

    @model_validator(mode="after")
    def check_source(self):
        """Exactly one instance source"""
        if (self.instance_path is None) == (self.generator is None):
            raise ValueError("Exactly one of instance_path and generator must be given")
        if any(k < 1 for k in self.k_values):
            raise ValueError("Every k must be a positive integer")
        if any(phi < 2 for phi in self.phi_values):
            raise ValueError("Every phi must be at least 2")
        return self

    def instances(self) -> list[tuple[str, RecoveryInstance]]:
        """(instance_id, instance) pairs of the experiment"""
        if self.instance_path is not None:
            return [(Path(self.instance_path).stem, read_instance(self.instance_path))]
        spec = self.generator
        return [
            (f"seed-{seed}", generate_random_instance(spec.n, seed, spec.dmax_cap))
            for seed in range(spec.seed, spec.seed + spec.count)
        ]


def load_config(data: Union[bytes, str]) -> ExperimentConfig:
    """Parse an experiment config document

    Raises
    ------
    InstanceParseException
        If the document is malformed
    """
    try:
        return ExperimentConfig.model_validate_json(data)
    except ValidationError as err:
        lines = [
            f"{'.'.join(str(part) for part in error['loc']) or 'document'}: {error['msg']}"
            for error in err.errors()
        ]
        raise InstanceParseException("\n".join(lines)) from err


def run_experiment(config: ExperimentConfig) -> pd.DataFrame:
    """Evaluate every (instance, k, policy) cell of an experiment

    Planners are evaluated by their exact long-run average, the greedy
    baseline by its mean-reward trajectory over the horizon, the learners by
    their realized reward averaged over `trials` seeded runs for each phi.
    Every value is divided by the upper bound of the cell.

    Parameters
    ----------
    config : ExperimentConfig
        The experiment

    Returns
    -------
    pandas.DataFrame
        Columns instance_id, n, k, policy, phi, trial_mean_ratio, trial_std,
        runtime_ms, sorted by instance, k, policy and phi

    Raises
    ------
    ValueError
        If a budget exceeds the number of arms of an instance
    OSError
        If the results cannot be written
    """
    rows = []
    for instance_id, instance in config.instances():
        for k in config.k_values:
            if k > instance.n_arms:
                raise ValueError(f"k={k} exceeds the {instance.n_arms} arms of {instance_id}")
            ub = ub_value(instance, k)
            for policy in config.policies:
                for phi, ratios, elapsed in _evaluate(config, instance, k, policy, ub):
                    rows.append(
                        {
                            "instance_id": instance_id,
                            "n": instance.n_arms,
                            "k": k,
                            "policy": policy,
                            "phi": phi,
                            "trial_mean_ratio": float(np.mean(ratios)),
                            "trial_std": float(np.std(ratios)),
                            "runtime_ms": elapsed,
                        }
                    )
            logger.info("Finished %s with k=%d", instance_id, k)

    results = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    results["phi"] = results["phi"].astype("Int64")
    results = results.sort_values(
        ["instance_id", "k", "policy", "phi"], na_position="first", kind="mergesort"
    ).reset_index(drop=True)

    if config.output is not None:
        write_results(results, config.output)
    return results


def write_results(results: pd.DataFrame, path: Union[str, Path]) -> None:
    """Write a result table as CSV"""
    try:
        results.to_csv(path, index=False)
    except OSError as err:
        raise OSError(f"Could not write results to {path}: {err}") from err
    logger.info("Wrote %d rows to %s", len(results), path)


def run_benchmark(suite: BenchmarkSuite, seed: int = 0) -> pd.DataFrame:
    """Preset comparison of a component against its guarantee

    'offline' compares the three planners with gamma_k and 1/2 on random
    instances, 'online' runs the three learners for a few phase lengths and
    'knapsack' compares the exact and FPTAS solvers with brute force.
    """
    if suite == "offline":
        return _offline_benchmark(seed)
    if suite == "online":
        return _online_benchmark(seed)
    if suite == "knapsack":
        return _knapsack_benchmark(seed)
    raise ValueError(f"Unknown benchmark suite '{suite}'")


def _evaluate(config: ExperimentConfig, instance: RecoveryInstance, k: int, policy: str, ub: float):
    """(phi, ratios, runtime_ms) of one cell, one entry per phi for learners"""
    if policy in OFFLINE_PLANNERS:
        start = time.perf_counter()
        planned = OFFLINE_PLANNERS[policy](instance, k)
        ratio = _ratio(long_run_average(planned, instance), ub)
        return [(None, [ratio], _elapsed_ms(start))]

    if policy == "greedy":
        start = time.perf_counter()
        result = greedy_policy(instance, k, config.horizon)
        return [(None, [_ratio(result.average, ub)], _elapsed_ms(start))]

    variant = policy.removeprefix("online-")
    evaluations = []
    for phi in config.phi_values:
        phase_config = PhaseConfig(
            phi=phi, epsilon=config.epsilon, a=best_a(k), k_prime=k + 1, variant=variant
        )
        start = time.perf_counter()
        ratios = [
            run_learner(instance, config.horizon, phase_config, seed=config.seed + trial, k=k).ratio
            for trial in range(config.trials)
        ]
        evaluations.append((phi, ratios, _elapsed_ms(start)))
    return evaluations


def _offline_benchmark(seed: int) -> pd.DataFrame:
    rows = []
    for index in range(10):
        instance = generate_random_instance(20, seed + index)
        for k in (1, 2, 3, 5, 10, 20):
            ub = ub_value(instance, k)
            for name, planner in OFFLINE_PLANNERS.items():
                start = time.perf_counter()
                ratio = _ratio(long_run_average(planner(instance, k), instance), ub)
                rows.append(
                    {
                        "instance_id": f"seed-{seed + index}",
                        "k": k,
                        "policy": name,
                        "ratio": ratio,
                        "guarantee": gamma_k(k) if name == "basic" else 0.5,
                        "runtime_ms": _elapsed_ms(start),
                    }
                )
    return pd.DataFrame(rows)


def _online_benchmark(seed: int) -> pd.DataFrame:
    instance = generate_random_instance(10, seed)
    rows = []
    for variant in ("basic", "refined", "ensemble"):
        for phi in (20, 50, 100):
            config = PhaseConfig(phi=phi, a=best_a(3), k_prime=4, variant=variant)
            start = time.perf_counter()
            summary = run_learner(instance, 2000, config, seed=seed, k=3)
            rows.append(
                {
                    "variant": variant,
                    "phi": phi,
                    "ratio": summary.ratio,
                    "optimism_violation_rate": summary.optimism_violations
                    / max(summary.optimism_checks, 1),
                    "runtime_ms": _elapsed_ms(start),
                }
            )
    return pd.DataFrame(rows)


def _knapsack_benchmark(seed: int) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    rows = []
    for case in range(50):
        n_arms = int(rng.integers(2, 7))
        odd = int(rng.choice([1, 3, 5]))
        periods = [odd * 2**exponent for exponent in range(4)]
        items = [
            CandidateItem(arm=arm, d=d, reward_rate=float(rng.uniform(0, 10)) / d)
            for arm in range(n_arms)
            for d in periods
        ]
        k_prime = float(rng.integers(1, n_arms + 1)) / 2

        start = time.perf_counter()
        exact = solve_exact_pow2(items, k_prime)
        exact_ms = _elapsed_ms(start)
        start = time.perf_counter()
        approximate = solve_fptas(items, k_prime, 0.1)
        fptas_ms = _elapsed_ms(start)
        oracle = brute_force(items, k_prime)
        rows.append(
            {
                "case": case,
                "n": n_arms,
                "k_prime": k_prime,
                "exact_gap": oracle.value - exact.value,
                "fptas_ratio": _ratio(approximate.value, oracle.value),
                "exact_ms": exact_ms,
                "fptas_ms": fptas_ms,
            }
        )
    return pd.DataFrame(rows)


def _ratio(value: float, ub: float) -> float:
    return value / ub if ub > 0 else 0.0


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0
