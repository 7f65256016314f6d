# pylint: disable=missing-docstring
import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

import pandas as pd

from recovering_bandits.cli import main
from recovering_bandits.instance import read_instance
from recovering_bandits.policy import parse_policy


def run(*argv: str) -> tuple[int, str, str]:
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = main(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)
        self.instance = str(self.root / "instance.json")
        code, _, _ = run(
            "gen-instance", "--n", "3", "--seed", "1", "--dmax-cap", "4", "--out", self.instance
        )
        self.assertEqual(code, 0)

    def tearDown(self):
        self.directory.cleanup()

    def write(self, name: str, content: str) -> str:
        path = self.root / name
        path.write_text(content, encoding="utf-8")
        return str(path)

    def simulate_file(self, policy: str) -> tuple[int, str, str]:
        return run(
            "simulate",
            "--instance",
            self.instance,
            "--policy",
            "ppp-file",
            "--policy-file",
            policy,
            "--t",
            "40",
        )

    def test_gen_instance(self):
        instance = read_instance(self.instance)
        self.assertEqual(instance.n_arms, 3)
        self.assertTrue(all(curve.d_max <= 4 for curve in instance.arms))

    def test_gen_instance_default_k(self):
        path = str(self.root / "with-k.json")
        self.assertEqual(run("gen-instance", "--n", "3", "--k", "2", "--out", path)[0], 0)
        self.assertEqual(read_instance(path).default_k, 2)
        self.assertEqual(run("gen-instance", "--n", "3", "--k", "4", "--out", path)[0], 2)

    def test_plan(self):
        out = str(self.root / "policy.json")
        code, _, _ = run("plan", "--instance", self.instance, "--k", "2", "--out", out)
        self.assertEqual(code, 0)
        document = json.loads(Path(out).read_text(encoding="utf-8"))
        self.assertTrue(0 < document["ratio"] <= 1.0 + 1e-9)
        policy = parse_policy(Path(out).read_text(encoding="utf-8"))
        self.assertEqual(policy.k, 2)
        self.assertTrue(policy.verify())

    def test_plan_reports(self):
        code, stdout, _ = run(
            "plan",
            "--instance",
            self.instance,
            "--k",
            "1",
            "--algo",
            "refined",
            "--dump-envelope",
            "--report-ub",
        )
        self.assertEqual(code, 0)
        self.assertIn('"envelopes"', stdout)
        self.assertIn('"x_star"', stdout)
        self.assertIn('"entries"', stdout)

    def test_plan_without_budget(self):
        code, _, stderr = run("plan", "--instance", self.instance)
        self.assertEqual(code, 1)
        self.assertIn("error:", stderr)

    def test_budget_above_arm_count(self):
        self.assertEqual(run("plan", "--instance", self.instance, "--k", "4")[0], 1)

    def test_invalid_instance(self):
        path = self.write("bad.json", '{"r_max": 10, "arms": [{"rewards": [3, 1]}]}')
        code, _, stderr = run("plan", "--instance", path, "--k", "1")
        self.assertEqual(code, 2)
        self.assertIn("not non-decreasing", stderr)

    def test_malformed_instance(self):
        path = self.write("broken.json", "{")
        self.assertEqual(run("plan", "--instance", path, "--k", "1")[0], 2)

    def test_missing_file(self):
        missing = str(self.root / "nope.json")
        self.assertEqual(run("plan", "--instance", missing, "--k", "1")[0], 1)

    def test_usage_error(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as context:
                main(["plan"])
        self.assertEqual(context.exception.code, 1)

    def test_simulate_greedy(self):
        code, stdout, _ = run(
            "simulate", "--instance", self.instance, "--k", "1", "--policy", "greedy", "--t", "50"
        )
        self.assertEqual(code, 0)
        document = json.loads(stdout)
        self.assertEqual(document["horizon"], 50)
        self.assertLessEqual(document["ratio"], 1.0 + 1e-9)

    def test_simulate_policy_file(self):
        policy = self.write(
            "policy.json",
            '{"k": 1, "entries": [{"d": 2, "t": 0}, {"d": 2, "t": -1}, {"d": "inf", "t": 0}]}',
        )
        code, stdout, _ = self.simulate_file(policy)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout)["k"], 1)

    def test_simulate_colliding_policy(self):
        policy = self.write(
            "collide.json",
            '{"k": 1, "entries": [{"d": 2, "t": 0}, {"d": 2, "t": 0}, {"d": "inf"}]}',
        )
        code, _, _ = self.simulate_file(policy)
        self.assertEqual(code, 2)

    def test_oracle(self):
        code, stdout, _ = run("oracle", "--instance", self.instance, "--k", "1", "--t", "6")
        self.assertEqual(code, 0)
        document = json.loads(stdout)
        self.assertLessEqual(document["opt"], document["ub_times_t"] + 1e-9)

    def test_oracle_guard(self):
        path = str(self.root / "large.json")
        run("gen-instance", "--n", "5", "--out", path)
        self.assertEqual(run("oracle", "--instance", path, "--k", "1", "--t", "6")[0], 3)

    def test_learn(self):
        out = str(self.root / "phases.csv")
        code, stdout, _ = run(
            "learn",
            "--instance",
            self.instance,
            "--k",
            "1",
            "--t",
            "100",
            "--phi",
            "10",
            "--noise",
            "none",
            "--out",
            out,
        )
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout)["phases"], 10)
        self.assertEqual(len(pd.read_csv(out)), 10)

    def test_run_config(self):
        config = self.write(
            "experiment.json",
            json.dumps(
                {
                    "instance_path": self.instance,
                    "k_values": [1],
                    "policies": ["basic", "greedy"],
                    "horizon": 50,
                }
            ),
        )
        out = str(self.root / "results.csv")
        self.assertEqual(run("run", "--config", config, "--out", out)[0], 0)
        self.assertEqual(len(pd.read_csv(out)), 2)

    def test_run_malformed_config(self):
        config = self.write("experiment.json", '{"k_values": []}')
        self.assertEqual(run("run", "--config", config)[0], 2)

    def test_invalid_log_level(self):
        code, _, _ = run("--log-level", "LOUD", "plan", "--instance", self.instance, "--k", "1")
        self.assertEqual(code, 1)


if __name__ == "__main__":
    unittest.main()
