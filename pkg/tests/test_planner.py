# pylint: disable=missing-docstring
import math
import unittest

from recovering_bandits.envelope import supporting_points
from recovering_bandits.fixtures import greedy_trap_instance, primes_from, tightness_fixture
from recovering_bandits.instance import RecoveryInstance, generate_random_instance
from recovering_bandits.periods import PeriodClass
from recovering_bandits.planner import (
    best_a,
    gamma_k,
    offline_plan,
    offline_plan_ensemble,
    offline_plan_refined,
    treat_fractional,
)
from recovering_bandits.policy import long_run_average
from recovering_bandits.relaxation import solve_upper_bound, ub_value


def best_single_class_policy(instance: RecoveryInstance, upper: int) -> float:
    """Best 1-policy on two arms with both periods in one class {(2a-1) * 2^l} + {1}, a <= 4"""
    best = 0.0
    for a in range(1, 5):
        periods = [None] + PeriodClass(a=a, single=True).members(upper)
        for d1 in periods:
            for d2 in periods:
                if d1 is not None and d2 is not None:
                    if math.gcd(d1, d2) < 2 or 1 / d1 + 1 / d2 > 1:
                        continue
                value = sum(
                    instance.mean_reward(arm, d) / d
                    for arm, d in enumerate((d1, d2))
                    if d is not None
                )
                best = max(best, value)
    return best


class TestRatios(unittest.TestCase):
    def test_gamma_k(self):
        self.assertAlmostEqual(gamma_k(1), 0.25)
        self.assertAlmostEqual(gamma_k(4), 4.0 / 9.0)
        self.assertRaises(ValueError, gamma_k, 0)

    def test_gamma_k_increases(self):
        values = [gamma_k(k) for k in range(1, 60)]
        for smaller, larger in zip(values, values[1:]):
            self.assertLess(smaller, larger)
        self.assertLess(values[-1], 1.0)

    def test_best_a(self):
        self.assertEqual(best_a(1), 1)
        self.assertEqual(best_a(4), 2)
        for k in range(1, 200):
            a = best_a(k)
            self.assertAlmostEqual(a / (a + 1) * k / (k + a), gamma_k(k))


class TestTreatFractional(unittest.TestCase):
    def setUp(self):
        self.instance = RecoveryInstance.new([[3.0, 4.0, 4.5], [0.0, 0.0, 0.0, 4.0]])
        self.solution = solve_upper_bound(self.instance, 1)
        self.supports = [supporting_points(curve) for curve in self.instance.arms]

    def test_lift(self):
        x = treat_fractional(self.solution, self.supports, 1)
        self.assertAlmostEqual(x[0], 1.0)
        self.assertAlmostEqual(x[1], 0.25)

    def test_keep(self):
        x = treat_fractional(self.solution, self.supports, 2)
        self.assertAlmostEqual(x[0], 0.75)

    def test_shrink(self):
        x = treat_fractional(self.solution, self.supports, 3)
        self.assertAlmostEqual(x[0], 0.5)

    def test_unknown_treatment(self):
        self.assertRaises(ValueError, treat_fractional, self.solution, self.supports, 4)


class TestOfflinePlans(unittest.TestCase):
    def test_two_arm_example(self):
        instance = RecoveryInstance.new([[0.5], [1.0, 10.0]], r_max=10.0)
        policy = offline_plan(instance, 1)
        self.assertEqual(policy.periods, [2, 2])
        self.assertAlmostEqual(long_run_average(policy, instance), 5.25)
        self.assertTrue(policy.verify())

    def test_single_arm(self):
        instance = RecoveryInstance.new([[1.0, 4.0]])
        for planner in (offline_plan, offline_plan_refined, offline_plan_ensemble):
            policy = planner(instance, 1)
            self.assertAlmostEqual(long_run_average(policy, instance), 2.0)

    def test_greedy_trap(self):
        instance = greedy_trap_instance(0.1, 100.0)
        policy = offline_plan(instance, 1)
        self.assertTrue(policy.verify())
        self.assertGreaterEqual(long_run_average(policy, instance), 50.0)

    def test_guarantees(self):
        for seed in range(3):
            instance = generate_random_instance(8, seed)
            for k in range(1, 9):
                ub = ub_value(instance, k)
                basic = offline_plan(instance, k)
                refined = offline_plan_refined(instance, k)
                ensemble = offline_plan_ensemble(instance, k)
                for policy in (basic, refined, ensemble):
                    self.assertTrue(policy.verify())
                    self.assertLessEqual(long_run_average(policy, instance), ub + 1e-9)

                basic_value = long_run_average(basic, instance)
                self.assertGreaterEqual(basic_value, gamma_k(k) * ub - 1e-9)
                self.assertGreaterEqual(long_run_average(refined, instance), 0.5 * ub - 1e-9)
                self.assertGreaterEqual(long_run_average(ensemble, instance), basic_value - 1e-9)


class TestTightnessFixtures(unittest.TestCase):
    def test_half_ratio_upper_bound(self):
        instance = tightness_fixture("half_ratio", 5)
        self.assertEqual(instance.default_k, 1)
        self.assertAlmostEqual(ub_value(instance, 1), 2.0 - 1.0 / 33.0, places=12)

    def test_half_ratio_is_tight(self):
        instance = tightness_fixture("half_ratio", 5)
        ub = ub_value(instance, 1)
        best = best_single_class_policy(instance, 128)
        self.assertLessEqual(best / ub, (1 + 1 / 33) / (2 - 1 / 33) + 1e-9)

        refined = long_run_average(offline_plan_refined(instance, 1), instance)
        self.assertGreaterEqual(refined, 0.5 * ub - 1e-9)
        self.assertLessEqual(refined, best + 1e-9)

    def test_prime_recovery_fixture_upper_bound(self):
        instance = tightness_fixture("theorem2", 25)
        self.assertEqual(instance.n_arms, 26)
        self.assertEqual([curve.d_max for curve in instance.arms[-2:]], [2, 3])
        expected = 24 / math.sqrt(25 * math.log(25)) + 2
        self.assertAlmostEqual(ub_value(instance, 25), expected, places=12)

    def test_prime_recovery_fixture_recovery_times(self):
        for k in range(2, 101):
            instance = tightness_fixture("theorem2", k)
            largest = max(curve.d_max for curve in instance.arms)
            self.assertLessEqual(largest, 2 * math.sqrt(k * math.log(k)))

    def test_invalid_fixtures(self):
        self.assertRaises(ValueError, tightness_fixture, "theorem2", 1)
        self.assertRaises(ValueError, tightness_fixture, "half_ratio", -1)
        self.assertRaises(ValueError, tightness_fixture, "unknown", 3)
        self.assertRaises(ValueError, greedy_trap_instance, 2.0, 1.5)

    def test_primes_from(self):
        self.assertEqual(primes_from(2, 2), [2, 3])
        self.assertEqual(primes_from(8, 3), [11, 13, 17])
        self.assertEqual(primes_from(0, 1), [2])


if __name__ == "__main__":
    unittest.main()
