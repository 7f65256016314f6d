"""Command line front door

Subcommands:
    - gen-instance: Write a random instance
    - plan: Offline periodic policy for an instance
    - learn: Run the phased learner and write its per-phase trajectory
    - simulate: Run the greedy baseline or a policy file
    - oracle: Exact finite-horizon optimum of a tiny instance
    - bench: Preset benchmark suites
    - run: Experiment described by a JSON config

Exit codes are 0 on success, 1 for usage and argument errors, 2 for
malformed or invalid documents and 3 when a size guard trips.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from recovering_bandits.envelope import supporting_points
from recovering_bandits.exceptions import (
    CapacityGuardException,
    InstanceParseException,
    InstanceValidationException,
    PolicyValidationException,
)
from recovering_bandits.experiments import (
    OFFLINE_PLANNERS,
    load_config,
    run_benchmark,
    run_experiment,
    write_results,
)
from recovering_bandits.instance import (
    RecoveryInstance,
    generate_random_instance,
    read_instance,
    write_instance,
)
from recovering_bandits.online import PhaseConfig, run_learner
from recovering_bandits.planner import best_a
from recovering_bandits.policy import long_run_average, parse_policy
from recovering_bandits.relaxation import solve_upper_bound
from recovering_bandits.settings import RuntimeSettings
from recovering_bandits.simulator import brute_force_opt, greedy_policy, simulate_policy
from recovering_bandits.validators import InstanceValidator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3


class ArgumentParser(argparse.ArgumentParser):
    """Parser exiting with the usage code 1 instead of argparse's 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    """Parser of every subcommand"""
    parser = ArgumentParser(
        prog="recovering-bandits",
        description="Planning and learning for bandits with recovering rewards",
    )
    parser.add_argument("--log-level", default=None, help="Logging level (default: WARNING)")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-instance", help="Write a random instance")
    gen.add_argument("--n", type=int, required=True, help="Number of arms")
    gen.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    gen.add_argument(
        "--dmax-cap", type=int, default=25, help="Largest recovery horizon (default: 25)"
    )
    gen.add_argument("--k", type=int, default=None, help="Default budget stored in the instance")
    gen.add_argument("--out", required=True, help="Instance file to write")
    gen.set_defaults(handler=_gen_instance)

    plan = commands.add_parser("plan", help="Offline periodic policy")
    _add_instance_arguments(plan)
    plan.add_argument("--algo", choices=sorted(OFFLINE_PLANNERS), default="basic")
    plan.add_argument("--out", default=None, help="Policy file (default: stdout)")
    plan.add_argument("--dump-envelope", action="store_true", help="Print supporting points")
    plan.add_argument("--report-ub", action="store_true", help="Print the upper bound and x*")
    plan.set_defaults(handler=_plan)

    learn = commands.add_parser("learn", help="Run the phased learner")
    _add_instance_arguments(learn)
    learn.add_argument("--t", type=int, required=True, help="Horizon T")
    learn.add_argument("--phi", type=int, default=None, help="Phase length (default: from T)")
    learn.add_argument("--epsilon", type=float, default=None, help="Knapsack accuracy, 0 for exact")
    learn.add_argument("--variant", choices=["basic", "refined", "ensemble"], default="basic")
    learn.add_argument("--noise", choices=["triangular", "none"], default="triangular")
    learn.add_argument("--seed", type=int, default=0, help="Environment seed (default: 0)")
    learn.add_argument("--out", default=None, help="Per-phase CSV")
    learn.set_defaults(handler=_learn)

    simulate = commands.add_parser("simulate", help="Run a baseline or a policy file")
    _add_instance_arguments(simulate)
    simulate.add_argument("--policy", choices=["greedy", "ppp-file"], required=True)
    simulate.add_argument("--policy-file", default=None, help="Policy JSON for --policy ppp-file")
    simulate.add_argument("--t", type=int, required=True, help="Horizon T")
    simulate.add_argument("--seed", type=int, default=None, help="Noise seed (default: means)")
    simulate.set_defaults(handler=_simulate)

    oracle = commands.add_parser("oracle", help="Exact optimum of a tiny instance")
    _add_instance_arguments(oracle)
    oracle.add_argument("--t", type=int, required=True, help="Horizon T")
    oracle.set_defaults(handler=_oracle)

    bench = commands.add_parser("bench", help="Preset benchmark suites")
    bench.add_argument("--suite", choices=["offline", "online", "knapsack"], required=True)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default=None, help="CSV file (default: stdout)")
    bench.set_defaults(handler=_bench)

    run = commands.add_parser("run", help="Experiment from a JSON config")
    run.add_argument("--config", required=True, help="Experiment config file")
    run.add_argument("--out", default=None, help="CSV file, overrides the config output")
    run.set_defaults(handler=_run)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point, returns the exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = RuntimeSettings(log_level=args.log_level)
        logging.basicConfig(
            level=settings.log_level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
        )
        return args.handler(args)
    except (InstanceParseException, InstanceValidationException, PolicyValidationException) as err:
        return _fail(err.message, EXIT_VALIDATION)
    except CapacityGuardException as err:
        return _fail(err.message, EXIT_CAPACITY)
    except (ValueError, IndexError, OSError) as err:
        return _fail(str(err), EXIT_USAGE)


def _add_instance_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", required=True, help="Instance file")
    parser.add_argument("--k", type=int, default=None, help="Budget (default: instance default_k)")


def _budget(args, instance: RecoveryInstance) -> int:
    k = args.k if args.k is not None else instance.default_k
    if k is None:
        raise ValueError("No budget given: pass --k or set default_k in the instance")
    if not 1 <= k <= instance.n_arms:
        raise ValueError(f"Budget k must be in 1..{instance.n_arms}, got {k}")
    return k


def _gen_instance(args) -> int:
    instance = generate_random_instance(args.n, args.seed, args.dmax_cap)
    if args.k is not None:
        instance = instance.model_copy(update={"default_k": args.k})
        InstanceValidator().validate(instance)
    write_instance(instance, args.out)
    return EXIT_OK


def _plan(args) -> int:
    instance = read_instance(args.instance)
    k = _budget(args, instance)

    if args.dump_envelope:
        envelopes = [supporting_points(curve).points for curve in instance.arms]
        _emit({"envelopes": [[[d, r] for d, r in points] for points in envelopes]})

    solution = solve_upper_bound(instance, k)
    if args.report_ub:
        _emit({"ub": solution.ub, "x_star": solution.x_star})

    policy = OFFLINE_PLANNERS[args.algo](instance, k)
    policy.verify()
    average = long_run_average(policy, instance)
    document = policy.to_json(
        long_run_average=average,
        ub=solution.ub,
        ratio=average / solution.ub if solution.ub > 0 else 0.0,
    )
    if args.out is None:
        print(document)
    else:
        Path(args.out).write_text(document, encoding="utf-8")
        logger.info("Policy written to %s", args.out)
    return EXIT_OK


def _learn(args) -> int:
    instance = read_instance(args.instance)
    k = _budget(args, instance)

    defaults = PhaseConfig.from_horizon(k, args.t, args.variant)
    config = PhaseConfig(
        phi=args.phi if args.phi is not None else defaults.phi,
        epsilon=args.epsilon if args.epsilon is not None else defaults.epsilon,
        a=best_a(k),
        k_prime=k + 1,
        variant=args.variant,
    )
    summary = run_learner(instance, args.t, config, seed=args.seed, k=k, noise=args.noise)
    if args.out is not None:
        write_results(summary.to_frame(), args.out)

    _emit(
        {
            "horizon": summary.horizon,
            "k": summary.k,
            "phi": config.phi,
            "ub": summary.ub,
            "cumulative_reward": summary.cumulative_reward,
            "ratio": summary.ratio,
            "phases": len(summary.phases),
            "total_samples": summary.total_samples,
        }
    )
    return EXIT_OK


def _simulate(args) -> int:
    instance = read_instance(args.instance)

    if args.policy == "greedy":
        k = _budget(args, instance)
        result = greedy_policy(instance, k, args.t)
        total, average = result.total, result.average
    else:
        if args.policy_file is None:
            raise ValueError("--policy ppp-file needs --policy-file")
        policy = parse_policy(Path(args.policy_file).read_bytes())
        policy.verify()
        k = policy.k
        result = simulate_policy(policy, instance, args.t, seed=args.seed)
        total, average = result.total, result.average

    ub = solve_upper_bound(instance, min(k, instance.n_arms)).ub
    _emit(
        {
            "policy": args.policy,
            "k": k,
            "horizon": args.t,
            "total": total,
            "average": average,
            "ub": ub,
            "ratio": average / ub if ub > 0 else 0.0,
        }
    )
    return EXIT_OK


def _oracle(args) -> int:
    instance = read_instance(args.instance)
    k = _budget(args, instance)
    opt = brute_force_opt(instance, k, args.t)
    ub = solve_upper_bound(instance, k).ub
    _emit({"k": k, "horizon": args.t, "opt": opt, "ub_times_t": ub * args.t})
    return EXIT_OK


def _bench(args) -> int:
    results = run_benchmark(args.suite, seed=args.seed)
    if args.out is None:
        print(results.to_csv(index=False), end="")
    else:
        write_results(results, args.out)
    return EXIT_OK


def _run(args) -> int:
    try:
        data = Path(args.config).read_bytes()
    except OSError as err:
        raise OSError(f"Could not read config {args.config}: {err}") from err
    config = load_config(data)
    if args.out is not None:
        config = config.model_copy(update={"output": args.out})

    results = run_experiment(config)
    if config.output is None:
        print(results.to_csv(index=False), end="")
    return EXIT_OK


def _emit(document: dict) -> None:
    print(json.dumps(document, indent=2))


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
