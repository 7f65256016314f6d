# pylint: disable=missing-docstring
import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from recovering_bandits.envelope import build_F, eval_F, supporting_points
from recovering_bandits.exceptions import (
    CapacityGuardException,
    InstanceParseException,
    PolicyValidationException,
)
from recovering_bandits.instance import RecoveryInstance, generate_random_instance
from recovering_bandits.periods import (
    PeriodClass,
    class_members,
    odd_class_members,
    round_frequencies,
    round_to_class,
)
from recovering_bandits.policy import PurelyPeriodicPolicy, long_run_average, parse_policy
from recovering_bandits.scheduler import (
    group_periods,
    rs_procedure,
    schedule_periods,
    schedule_single_group,
    split_groups,
)


@st.composite
def class_periods(draw):
    a = draw(st.integers(1, 3))
    period = st.one_of(
        st.none(),
        st.builds(
            lambda j, l: (2 * j - 1) * 2**l, st.integers(1, a), st.integers(0, 4)
        ),
    )
    periods = draw(st.lists(period, min_size=1, max_size=10))
    return a, periods


def pulled_steps(matrix: np.ndarray, arm: int) -> list[int]:
    return [int(step) + 1 for step in np.flatnonzero(matrix[:, arm])]


class TestPeriodClass(unittest.TestCase):
    def test_round_frequencies(self):
        self.assertEqual(round_frequencies([1.0 / 3.0], 1), [4])
        self.assertEqual(round_frequencies([1.0 / 3.0], 2), [3])
        self.assertEqual(round_frequencies([0.0, 1.0, 0.2], 2), [None, 1, 6])

    def test_round_to_class(self):
        self.assertEqual(round_to_class([1.0, 0.5, 0.2, 0.0], 3), [1, 5, 5, None])
        self.assertEqual(round_to_class([0.5], 1), [2])

    def test_membership(self):
        period_class = PeriodClass(a=2)
        self.assertTrue(period_class.contains(12))
        self.assertFalse(period_class.contains(10))
        self.assertTrue(period_class.contains(None))
        self.assertTrue(PeriodClass(a=3, single=True).contains(1))
        self.assertFalse(PeriodClass(a=3, single=True).contains(2))

    def test_members(self):
        self.assertEqual(class_members(2, 12), [1, 2, 3, 4, 6, 8, 12])
        self.assertEqual(class_members(3, 20, single=True), [1, 5, 10, 20])
        self.assertEqual(odd_class_members(2, 24), [3, 6, 12, 24])
        self.assertRaises(ValueError, odd_class_members, 0, 24)

    def test_invalid_frequency(self):
        self.assertRaises(ValueError, PeriodClass(a=1).round_frequency, 1.5)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10_000), a=st.integers(1, 5))
    def test_rounding_keeps_value(self, seed, a):
        instance = generate_random_instance(1, seed)
        support = supporting_points(instance.arms[0])
        f = build_F(support)
        period_class = PeriodClass(a=a)
        for d, reward in support.points:
            if reward <= 0:
                continue
            rounded = period_class.round_frequency(1.0 / d)
            self.assertGreaterEqual(rounded, d)
            value = instance.mean_reward(0, rounded) / rounded
            self.assertGreaterEqual(value / eval_F(f, 1.0 / d), a / (a + 1) - 1e-12)


class TestPolicy(unittest.TestCase):
    def test_pull_times(self):
        policy = PurelyPeriodicPolicy.new(1, [2, 4, 4], [0, -3, -1])
        self.assertEqual(policy.pulls_at(1), [1])
        self.assertEqual(policy.pulls_at(2), [0])
        self.assertEqual(policy.pulls_at(3), [2])
        self.assertEqual(policy.pulls_at(5), [1])
        self.assertTrue(policy.verify())

    def test_collision(self):
        policy = PurelyPeriodicPolicy.new(1, [2, 2], [0, 0])
        with self.assertRaises(PolicyValidationException) as context:
            policy.verify()
        self.assertIn("2 arms pulled at t=2, budget is 1", context.exception.message)

    def test_offset_out_of_range(self):
        report = PurelyPeriodicPolicy.new(1, [3], [-3]).report()
        self.assertFalse(report.ok)
        self.assertIn("arm 0 offset -3 is outside (-3, 0]", report.violations[0])

    def test_window_guard(self):
        policy = PurelyPeriodicPolicy.new(3, [7, 11, 13])
        self.assertRaises(CapacityGuardException, policy.verify, 100)
        self.assertTrue(policy.verify(2000))

    def test_never_pulled(self):
        policy = PurelyPeriodicPolicy.new(1, [None, None])
        self.assertTrue(policy.verify())
        self.assertEqual(policy.scheduled_arms, [])
        self.assertFalse(policy.pull_matrix(10).any())

    def test_long_run_average(self):
        instance = RecoveryInstance.new([[1.0, 2.0, 6.0], [1.0]])
        self.assertEqual(long_run_average(PurelyPeriodicPolicy.new(1, [None, None]), instance), 0)
        policy = PurelyPeriodicPolicy.new(1, [3, None])
        self.assertAlmostEqual(long_run_average(policy, instance), 2.0)

    def test_document_round_trip(self):
        policy = PurelyPeriodicPolicy.new(2, [None, 2, 4], [0, -1, -2])
        document = policy.to_json(ub=3.5)
        self.assertIn('"inf"', document)
        self.assertEqual(parse_policy(document), policy)

    def test_parse_infinite_period(self):
        policy = parse_policy('{"k": 1, "entries": [{"d": "inf", "t": 0}, {"d": 2, "t": -1}]}')
        self.assertEqual(policy.periods, [None, 2])

    def test_parse_malformed(self):
        self.assertRaises(InstanceParseException, parse_policy, '{"k": 1}')
        self.assertRaises(InstanceParseException, parse_policy, '{"k": 1, "entries": [{"d": "x"}]}')


class TestGroups(unittest.TestCase):
    def test_split_groups(self):
        partition = split_groups({0: 2, 1: 4, 2: 4, 3: 8, 4: 8})
        self.assertEqual(partition.groups, [[0, 1, 2], [3, 4]])
        self.assertEqual(partition.loads, [1.0, 0.25])

    def test_split_groups_two_full(self):
        partition = split_groups({0: 2, 1: 2, 2: 4, 3: 4, 4: 8, 5: 8})
        self.assertEqual(partition.groups, [[0, 1], [2, 3, 4, 5]])
        self.assertEqual(partition.loads, [1.0, 0.75])

    def test_split_groups_mixed_odd_parts(self):
        self.assertRaises(ValueError, split_groups, {0: 2, 1: 3})

    def test_schedule_single_group(self):
        self.assertEqual(schedule_single_group({0: 2, 1: 4, 2: 4}), {0: 0, 1: -3, 2: -1})

    def test_schedule_single_group_odd_part(self):
        self.assertEqual(schedule_single_group({0: 3, 1: 6, 2: 6}), {0: 0, 1: -5, 2: -2})

    def test_schedule_single_group_overloaded(self):
        self.assertRaises(ValueError, schedule_single_group, {0: 1, 1: 2})
        self.assertRaises(ValueError, schedule_single_group, {0: 2, 1: 3})

    def test_schedule_single_arm(self):
        self.assertEqual(schedule_single_group({4: 8}), {4: 0})
        self.assertEqual(schedule_single_group({}), {})

    def test_keeps_best_groups(self):
        instance = RecoveryInstance.new([[1.0], [2.0], [1.5]])
        policy = schedule_periods([1, 1, 1], 2, instance)
        self.assertEqual(policy.periods, [None, 1, 1])
        self.assertTrue(policy.verify())

    def test_ties_go_to_smaller_arm(self):
        instance = RecoveryInstance.new([[1.0], [1.0]])
        policy = schedule_periods([1, 1], 1, instance)
        self.assertEqual(policy.periods, [1, None])

    def test_two_arm_example(self):
        instance = RecoveryInstance.new([[0.5], [1.0, 10.0]], r_max=10.0)
        policy = rs_procedure([0.5, 0.5], 1, 1, instance)
        self.assertEqual(policy.periods, [2, 2])
        self.assertAlmostEqual(long_run_average(policy, instance), 5.25)
        self.assertTrue(policy.verify())

    @settings(max_examples=200, deadline=None)
    @given(case=class_periods(), seed=st.integers(0, 10_000))
    def test_rounding_and_scheduling(self, case, seed):
        a, periods = case
        x = [0.0 if d is None else 1.0 / d for d in periods]
        instance = generate_random_instance(len(periods), seed)

        groups = group_periods(round_frequencies(x, a))
        self.assertLess(len(groups), sum(x) + a)
        for group in groups:
            self.assertLessEqual(group.load, 1.0 + 1e-12)

        k = max(1, math.ceil(sum(x)))
        policy = rs_procedure(x, k, a, instance)
        self.assertTrue(policy.verify())

        everything = rs_procedure(x, max(1, len(groups)), a, instance)
        self.assertEqual(everything.periods, periods)
        self.assertTrue(everything.verify())
        matrix = everything.pull_matrix(200)
        for arm, entry in enumerate(everything.entries):
            steps = pulled_steps(matrix, arm)
            if entry.d is None:
                self.assertEqual(steps, [])
                continue
            self.assertEqual(steps[0], entry.first_pull)
            self.assertTrue(1 <= steps[0] <= entry.d)
            self.assertTrue(all(b - a_ == entry.d for a_, b in zip(steps, steps[1:])))


if __name__ == "__main__":
    unittest.main()
