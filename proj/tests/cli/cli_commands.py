"""Smoke tests for the one-shot subcommands and their exit codes."""

import pathlib
import subprocess
import sys
import unittest

CLI = None
DATA = None


def loopinv(*args, stdin=None):
    return subprocess.run([CLI, *args], input=stdin, capture_output=True, text=True)


class Verify(unittest.TestCase):
    def problem(self, name="p02_fig1"):
        return str(DATA / "problems" / f"{name}.sl")

    def test_valid(self):
        r = loopinv("verify", "--problem", self.problem(), "--invariant", "-",
                    stdin="(and (>= x 1) (>= y 0) (>= x y))")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(r.stdout.strip(), "Valid")

    def test_violated_names_condition(self):
        r = loopinv("verify", "--problem", self.problem(), "--invariant", "-", stdin="(>= x y)")
        self.assertTrue(r.stdout.startswith("Violated(Consecution)"), r.stdout)
        # A failed candidate is a result, not a command failure.
        self.assertEqual(r.returncode, 0, r.stderr)

    def test_ill_formed(self):
        r = loopinv("verify", "--problem", self.problem(), "--invariant", "-", stdin="(>= z 0)")
        self.assertIn("IllFormed(unknown free variable z)", r.stdout)
        self.assertEqual(r.returncode, 0, r.stderr)

    def test_listing_response(self):
        r = loopinv("verify", "--problem", str(DATA / "listings" / "listing1.sl"),
                    "--invariant", str(DATA / "listings" / "listing1.txt"))
        self.assertEqual(r.stdout.strip(), "Valid")

    def test_missing_problem(self):
        r = loopinv("verify", "--problem", "/nonexistent.sl", "--invariant", "-", stdin="true")
        self.assertNotEqual(r.returncode, 0)
        self.assertTrue(r.stderr)


class Retrieve(unittest.TestCase):
    def test_ranking(self):
        r = loopinv("retrieve", "--problem", str(DATA / "similarity" / "query.sl"),
                    "--corpus", str(DATA / "similarity"), "--n", "3")
        self.assertEqual(r.returncode, 0, r.stderr)
        ids = [line.split()[1] for line in r.stdout.splitlines()]
        self.assertEqual(ids[0], "renamed")
        r = loopinv("retrieve", "--problem", str(DATA / "similarity" / "query.sl"),
                    "--corpus", str(DATA / "similarity"), "--metric", "semantic", "--n", "1")
        self.assertEqual(r.stdout.split()[1], "reshaped")


class Usage(unittest.TestCase):
    def test_no_subcommand(self):
        self.assertNotEqual(loopinv().returncode, 0)

    def test_generate_needs_one_provider(self):
        r = loopinv("generate", "--problems", str(DATA / "problems"), "--out", "/dev/null")
        self.assertNotEqual(r.returncode, 0)
        self.assertIn("exactly one of", r.stderr)

    def test_report_on_empty_log(self):
        r = loopinv("report", "--log", "/nonexistent/run.jsonl")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertIn("no generation records", r.stdout)


if __name__ == "__main__":
    CLI, DATA = sys.argv[1], pathlib.Path(sys.argv[2])
    unittest.main(argv=sys.argv[:1], verbosity=2)
