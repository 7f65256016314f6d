# pylint: disable=missing-docstring
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from recovering_bandits.exceptions import CapacityGuardException
from recovering_bandits.fixtures import greedy_trap_instance
from recovering_bandits.instance import RecoveryInstance, generate_random_instance
from recovering_bandits.planner import offline_plan
from recovering_bandits.policy import PurelyPeriodicPolicy, long_run_average
from recovering_bandits.relaxation import ub_value
from recovering_bandits.simulator import (
    Environment,
    Schedule,
    brute_force_opt,
    greedy_policy,
    simulate_policy,
    step,
    triangular_rewards,
)


class TestEnvironment(unittest.TestCase):
    def setUp(self):
        self.instance = RecoveryInstance.new([[1.0, 3.0], [0.0, 2.0]])

    def test_gaps(self):
        env = Environment(self.instance, seed=0, noise="none")
        first = step(env, [0])
        self.assertEqual(first[0].gap, 1)
        self.assertEqual(first[0].reward, 1.0)
        step(env, [])
        pulls = step(env, [0, 1])
        self.assertEqual([pull.gap for pull in pulls], [2, 3])
        self.assertEqual([pull.reward for pull in pulls], [3.0, 2.0])
        self.assertEqual(env.now, 3)
        np.testing.assert_array_equal(env.last_pull, [3, 3])

    def test_zero_mean_pays_zero(self):
        env = Environment(self.instance, seed=5)
        self.assertEqual(env.step([1])[0].reward, 0.0)

    def test_budget(self):
        env = Environment(self.instance, seed=0, k=1)
        self.assertRaises(ValueError, env.step, [0, 1])

    def test_duplicate_pull(self):
        env = Environment(self.instance, seed=0)
        self.assertRaises(ValueError, env.step, [0, 0])

    def test_unknown_arm(self):
        env = Environment(self.instance, seed=0)
        self.assertRaises(IndexError, env.step, [2])

    def test_unknown_noise_model(self):
        self.assertRaises(ValueError, Environment, self.instance, 0, None, "gaussian")

    def test_deterministic_given_seed(self):
        first, second = Environment(self.instance, seed=9), Environment(self.instance, seed=9)
        for _ in range(20):
            self.assertEqual(first.step([0, 1]), second.step([0, 1]))

    def test_triangular_noise(self):
        rng = np.random.default_rng(3)
        draws = triangular_rewards(rng, np.full(100_000, 2.0))
        self.assertTrue(np.all(draws >= 0.0))
        self.assertTrue(np.all(draws <= 4.0))
        self.assertLess(abs(draws.mean() - 2.0), 0.02)


class TestGreedy(unittest.TestCase):
    def test_trap(self):
        instance = greedy_trap_instance(0.1, 100.0)
        result = greedy_policy(instance, 1, 1000)
        self.assertAlmostEqual(result.total, 1000.0)
        self.assertTrue(all(pulls == [1] for pulls in result.schedule.pulls))
        self.assertLess(result.average / ub_value(instance, 1), 0.03)

    def test_alternating_beats_greedy(self):
        instance = greedy_trap_instance(0.1, 100.0)
        policy = PurelyPeriodicPolicy.new(1, [2, 2], [-1, 0])
        result = simulate_policy(policy, instance, 1000)
        self.assertAlmostEqual(result.total, 50050.0)
        self.assertGreaterEqual(result.total, 50.05 * 999)
        self.assertEqual(result.pull_counts, [500, 500])

    def test_single_arm_pulled_every_step(self):
        instance = RecoveryInstance.new([[1.0, 2.0]])
        result = greedy_policy(instance, 1, 10)
        self.assertEqual(result.schedule.pulls, [[0]] * 10)
        self.assertAlmostEqual(result.total, 10.0)

    def test_expected_total(self):
        instance = RecoveryInstance.new([[1.0, 2.0], [0.5]])
        result = greedy_policy(instance, 2, 6)
        self.assertAlmostEqual(result.schedule.expected_total(instance), result.total)

    def test_schedule_budget(self):
        self.assertRaises(ValueError, Schedule, k=1, pulls=[[0, 1]])

    def test_budget_range(self):
        instance = RecoveryInstance.new([[1.0]])
        self.assertRaises(ValueError, greedy_policy, instance, 2, 5)


class TestSimulatePolicy(unittest.TestCase):
    def test_cadence(self):
        instance = generate_random_instance(5, 2)
        policy = offline_plan(instance, 2)
        horizon = 3 * 2 * 3 * 5 * 7 * 64
        result = simulate_policy(policy, instance, horizon)
        for count, d in zip(result.pull_counts, policy.periods):
            if d is None:
                self.assertEqual(count, 0)
            elif horizon % d == 0:
                self.assertEqual(count, horizon // d)

    def test_average_converges(self):
        instance = RecoveryInstance.new([[0.5], [1.0, 10.0]], r_max=10.0)
        policy = offline_plan(instance, 1)
        result = simulate_policy(policy, instance, 10_000)
        self.assertAlmostEqual(result.average, long_run_average(policy, instance), places=2)

    def test_entry_count_mismatch(self):
        instance = RecoveryInstance.new([[1.0], [1.0]])
        policy = PurelyPeriodicPolicy.new(1, [1])
        self.assertRaises(ValueError, simulate_policy, policy, instance, 10)


class TestBruteForceOpt(unittest.TestCase):
    def test_constant_arm(self):
        instance = RecoveryInstance.new([[2.0]])
        self.assertAlmostEqual(brute_force_opt(instance, 1, 5), 10.0)

    def test_waiting_pays(self):
        instance = RecoveryInstance.new([[0.0, 0.0, 6.0]])
        self.assertAlmostEqual(brute_force_opt(instance, 1, 6), 12.0)

    def test_guard(self):
        instance = RecoveryInstance.new([[1.0]] * 4)
        self.assertRaises(CapacityGuardException, brute_force_opt, instance, 1, 5)
        short = RecoveryInstance.new([[1.0]])
        self.assertRaises(CapacityGuardException, brute_force_opt, short, 1, 13)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(1, 3), seed=st.integers(0, 10_000), horizon=st.integers(1, 8))
    def test_sandwich(self, n, seed, horizon):
        instance = generate_random_instance(n, seed, dmax_cap=4)
        opt = brute_force_opt(instance, 1, horizon)
        greedy = greedy_policy(instance, 1, horizon).total
        self.assertLessEqual(greedy, opt + 1e-9)
        self.assertLessEqual(opt, ub_value(instance, 1) * horizon + 1e-9)


if __name__ == "__main__":
    unittest.main()
