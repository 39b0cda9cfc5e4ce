"""End-to-end checks of the rotgrad command-line tool.

Usage: test_cli.py <rotgrad executable> <report.schema.json>
"""

import csv
import hashlib
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

EXE = None
SCHEMA = None
CSV_HEADER = ["iteration", "mean_deg", "median_deg", "acc5", "acc3", "mean_norm"]


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("ROTGRAD_OUT_DIR", None)
    if env:
        full_env.update(env)
    return subprocess.run([EXE, *map(str, args)], capture_output=True, text=True, env=full_env)


def load(path):
    with open(path) as f:
        return json.load(f)


def git_blob_sha1(text):
    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def validate_report(self, path):
        report = load(path)
        jsonschema.validate(report, SCHEMA)
        config = report["manifest"]["config"]
        canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
        self.assertEqual(report["manifest"]["config_hash"], git_blob_sha1(canonical))
        return report

    def read_csv(self, path):
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], CSV_HEADER)
        return rows[1:]

    def test_fit_reaches_tolerance(self):
        r = run("fit", "--rep", "9d", "--method", "rpmg", "--loss", "l2", "--seed", "0",
                "--out-dir", self.out)
        self.assertEqual(r.returncode, 0, r.stderr)
        report = self.validate_report(self.out / "fit_9d_rpmg_l2_s0.json")
        self.assertEqual(report["kind"], "fit")
        self.assertLess(report["result"]["final_error_rad"], 1e-4)
        self.assertFalse(report["result"]["aborted"])
        rows = self.read_csv(self.out / "fit_9d_rpmg_l2_s0.csv")
        self.assertEqual(len(rows), 2001)
        self.assertEqual([int(row[0]) for row in rows[:3]], [0, 1, 2])

    def test_unknown_names_are_usage_errors(self):
        r = run("fit", "--rep", "bogus", "--out-dir", self.out)
        self.assertEqual(r.returncode, 2)
        for name in ["quat", "6d", "9d", "10d"]:
            self.assertIn(name, r.stderr)
        self.assertEqual(run("fit", "--method", "sgd", "--out-dir", self.out).returncode, 2)
        self.assertEqual(run("train", "--loss", "huber", "--out-dir", self.out).returncode, 2)
        self.assertEqual(run("fit", "--no-such-flag").returncode, 2)
        self.assertEqual(run().returncode, 2)
        self.assertEqual(run("fit", "--lambda", "1.5", "--out-dir", self.out).returncode, 2)
        self.assertEqual(run("fit", "--tau", "0.1", "--tau-init", "0.2").returncode, 2)
        self.assertEqual(run("train", "--loss", "flow", "--iters", "1",
                             "--out-dir", self.out).returncode, 2)

    def test_zero_iterations_reports_initial_state(self):
        r = run("fit", "--iters", "0", "--out-dir", self.out)
        self.assertEqual(r.returncode, 0, r.stderr)
        report = self.validate_report(self.out / "fit_9d_rpmg_l2_s0.json")
        self.assertEqual(report["result"]["iterations"], 0)
        self.assertEqual(len(self.read_csv(self.out / "fit_9d_rpmg_l2_s0.csv")), 1)

        r = run("train", "--iters", "0", "--out-dir", self.out)
        self.assertEqual(r.returncode, 0, r.stderr)
        report = self.validate_report(self.out / "train_9d_rpmg_l2_s0.json")
        self.assertEqual(report["result"]["final"], report["result"]["initial"])

    def test_numeric_failure_exit_code(self):
        r = run("fit", "--lr", "1e300", "--iters", "10", "--out-dir", self.out)
        self.assertEqual(r.returncode, 3)
        report = self.validate_report(self.out / "fit_9d_rpmg_l2_s0.json")
        self.assertTrue(report["result"]["aborted"])
        r = run("train", "--lr", "1e300", "--iters", "10", "--out-dir", self.out)
        self.assertEqual(r.returncode, 3)

    def test_train_is_deterministic(self):
        a, b = self.out / "a", self.out / "b"
        for d in (a, b):
            r = run("train", "--rep", "6d", "--iters", "60", "--seed", "4", "--out-dir", d)
            self.assertEqual(r.returncode, 0, r.stderr)
        name = "train_6d_rpmg_l2_s4"
        ra = self.validate_report(a / f"{name}.json")
        rb = self.validate_report(b / f"{name}.json")
        self.assertEqual(ra["result"], rb["result"])
        self.assertEqual(ra["manifest"]["config_hash"], rb["manifest"]["config_hash"])
        self.assertEqual((a / f"{name}.csv").read_text(), (b / f"{name}.csv").read_text())
        rows = self.read_csv(a / f"{name}.csv")
        self.assertEqual([int(row[0]) for row in rows], [0, 60])

    def test_sweep_writes_one_report_per_method_and_trend(self):
        methods = ["vanilla", "mg", "pmg", "rpmg"]
        r = run("train", "--rep", "quat", "--methods", ",".join(methods), "--seeds", "0,1",
                "--iters", "20", "--jobs", "2", "--out-dir", self.out)
        self.assertEqual(r.returncode, 0, r.stderr)
        medians = {}
        for m in methods:
            for s in (0, 1):
                report = self.validate_report(self.out / f"train_quat_{m}_l2_s{s}.json")
                self.assertEqual(report["manifest"]["config"]["method"], m)
                medians.setdefault(m, []).append(report["result"]["final"]["median_deg"])
        trend = self.validate_report(self.out / "train_quat_l2_trend.json")
        self.assertEqual(trend["kind"], "trend")
        self.assertEqual(trend["result"]["seeds"], [0, 1])
        self.assertEqual(trend["result"]["median_deg"], medians)

    def test_sphere_and_probe(self):
        r = run("train", "--sphere", "--methods", "l2-norm,rpmg", "--iters", "20",
                "--out-dir", self.out)
        self.assertEqual(r.returncode, 0, r.stderr)
        report = self.validate_report(self.out / "sphere_rpmg_s0.json")
        self.assertEqual(report["kind"], "train-sphere")
        self.validate_report(self.out / "sphere_trend.json")
        self.assertEqual(run("train", "--sphere", "--method", "vanilla",
                             "--out-dir", self.out).returncode, 2)

        r = run("probe", "--iters", "20", "--taus", "0.1,1,10", "--out-dir", self.out)
        self.assertEqual(r.returncode, 0, r.stderr)
        report = self.validate_report(self.out / "probe_9d_rpmg_l2_s0.json")
        taus = [p["tau"] for p in report["result"]["probes"]]
        self.assertEqual(taus, [0.1, 1, 10])

    def test_out_dir_from_environment(self):
        target = self.out / "env"
        r = run("fit", "--iters", "5", env={"ROTGRAD_OUT_DIR": str(target)})
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue((target / "fit_9d_rpmg_l2_s0.json").exists())

    def test_config_hash_tracks_config(self):
        run("fit", "--iters", "5", "--out-dir", self.out / "a")
        run("fit", "--iters", "6", "--out-dir", self.out / "b")
        ha = load(self.out / "a" / "fit_9d_rpmg_l2_s0.json")["manifest"]["config_hash"]
        hb = load(self.out / "b" / "fit_9d_rpmg_l2_s0.json")["manifest"]["config_hash"]
        self.assertNotEqual(ha, hb)

    def test_check(self):
        r = run("check", "--filter", "projection", "--cases", "100")
        self.assertEqual(r.returncode, 0, r.stdout + r.stderr)
        lines = [l for l in r.stdout.splitlines() if l.split(" ")[0] in ("PASS", "FAIL", "INFO")]
        self.assertTrue(lines)
        self.assertTrue(all(l.split()[1].startswith("projection.") for l in lines))
        self.assertEqual(run("check", "--filter", "no-such-check").returncode, 2)


if __name__ == "__main__":
    EXE = sys.argv[1]
    with open(sys.argv[2]) as f:
        SCHEMA = json.load(f)
    jsonschema.Draft202012Validator.check_schema(SCHEMA)
    unittest.main(argv=sys.argv[:1], verbosity=2)
