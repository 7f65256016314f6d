# pylint: disable=missing-docstring
import unittest
from unittest.mock import patch

from recovering_bandits.exceptions import CapacityGuardException
from recovering_bandits.knapsack import CandidateItem, brute_force
from recovering_bandits.policy import PurelyPeriodicPolicy
from recovering_bandits.settings import RuntimeSettings, get_settings


class TestRuntimeSettings(unittest.TestCase):
    @patch.dict("os.environ", {}, clear=True)
    def test_defaults(self):
        settings = RuntimeSettings()
        self.assertEqual(settings.log_level, "WARNING")
        self.assertEqual(settings.window_cap, 1_000_000)
        self.assertEqual(settings.enumeration_cap, 1_000_000)
        self.assertEqual(settings.dp_cap, 50_000_000)

    @patch.dict(
        "os.environ",
        {
            "RECOVERING_BANDITS_LOG_LEVEL": "debug",
            "RECOVERING_BANDITS_WINDOW_CAP": "50",
            "RECOVERING_BANDITS_ENUMERATION_CAP": "8",
            "RECOVERING_BANDITS_DP_CAP": "1000",
        },
    )
    def test_from_environment(self):
        settings = get_settings()
        self.assertEqual(settings.log_level, "DEBUG")
        self.assertEqual(settings.window_cap, 50)
        self.assertEqual(settings.enumeration_cap, 8)
        self.assertEqual(settings.dp_cap, 1000)

    @patch.dict("os.environ", {"RECOVERING_BANDITS_WINDOW_CAP": "50"})
    def test_arguments_override_environment(self):
        self.assertEqual(RuntimeSettings(window_cap=7).window_cap, 7)

    @patch.dict("os.environ", {"RECOVERING_BANDITS_DP_CAP": "lots"})
    def test_invalid_integer(self):
        with self.assertRaises(ValueError) as context:
            RuntimeSettings()
        self.assertIn("RECOVERING_BANDITS_DP_CAP", str(context.exception))

    def test_invalid_values(self):
        self.assertRaises(ValueError, RuntimeSettings, "LOUD")
        self.assertRaises(ValueError, RuntimeSettings, None, 0)

    @patch.dict("os.environ", {"RECOVERING_BANDITS_WINDOW_CAP": "10"})
    def test_window_guard_follows_environment(self):
        policy = PurelyPeriodicPolicy.new(2, [3, 4])
        self.assertRaises(CapacityGuardException, policy.verify)

    @patch.dict("os.environ", {"RECOVERING_BANDITS_ENUMERATION_CAP": "3"})
    def test_enumeration_guard_follows_environment(self):
        items = [CandidateItem(arm=arm, d=2, reward_rate=1.0) for arm in range(2)]
        self.assertRaises(CapacityGuardException, brute_force, items, 1.0)


if __name__ == "__main__":
    unittest.main()
