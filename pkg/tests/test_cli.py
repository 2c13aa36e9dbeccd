import json
import subprocess
import sys

import numpy as np
import pytest

from entrate.cli import main

TABLE_STRING = "13131213232331313332"
TABLE_PARSING = "1 | 3 | 131 | 2 | 132 | 323 | 31313 | 332"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParseCommand:
    def test_table_string(self, capsys):
        code, out, _ = run(capsys, "parse", "--text", TABLE_STRING)
        assert code == 0
        assert out.strip() == TABLE_PARSING

    def test_json_report(self, capsys, tmp_path):
        out_path = tmp_path / "parse.json"
        code, _, _ = run(capsys, "parse", "--text", TABLE_STRING, "--json", str(out_path))
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["rendered"] == TABLE_PARSING
        assert report["phrases"][0] == {"start": 0, "length": 1}
        assert report["last_capped"] is False

    def test_file_input(self, capsys, tmp_path):
        path = write(tmp_path, "seq.txt", " ".join(TABLE_STRING))
        code, out, _ = run(capsys, "parse", path)
        assert code == 0
        assert out.strip() == TABLE_PARSING


class TestEstimateCommand:
    def test_alternating_file(self, capsys, tmp_path):
        path = write(tmp_path, "alt.txt", " ".join(["L", "R"] * 500))
        out_json = tmp_path / "report.json"
        code, out, _ = run(
            capsys,
            "estimate",
            path,
            "--method",
            "empirical",
            "--method",
            "swlz",
            "--json",
            str(out_json),
        )
        assert code == 0
        report = json.loads(out_json.read_text())
        values = {r["method"]: r["value_bits"] for r in report["estimates"]}
        assert values["direct_empirical"] == 0.0
        assert 0.0 < values["swlz"] < 0.1
        assert report["schema_version"] == 1
        assert report["input"]["kappa"] == 2

    def test_report_round_trips(self, capsys, tmp_path):
        path = write(tmp_path, "alt.txt", " ".join(["L", "R"] * 20))
        out_json = tmp_path / "report.json"
        run(capsys, "estimate", path, "--json", str(out_json))
        report = json.loads(out_json.read_text())
        assert json.loads(json.dumps(report)) == report

    def test_short_data_warning_surfaces(self, capsys, tmp_path):
        rng = np.random.default_rng(3)
        actions = ["a", "b", "c", "d", "e", "f", "g"]
        toks = []
        while len(toks) < 301:
            t = rng.choice(actions)
            if not toks or toks[-1] != t:
                toks.append(t)
        path = write(tmp_path, "behav.txt", " ".join(toks))
        out_json = tmp_path / "r.json"
        code, _, _ = run(
            capsys, "estimate", path, "--collapse-repeats", "--order", "3",
            "--json", str(out_json),
        )
        assert code == 0
        report = json.loads(out_json.read_text())
        assert any("343" in w for w in report["estimates"][0]["warnings"])

    def test_bootstrap_attached_and_deterministic(self, capsys, tmp_path):
        rng = np.random.default_rng(5)
        path = write(tmp_path, "s.txt", " ".join(str(x) for x in rng.integers(0, 3, 300)))
        j1, j2 = tmp_path / "r1.json", tmp_path / "r2.json"
        for out_json in (j1, j2):
            code, _, _ = run(
                capsys, "estimate", path, "--replicates", "25", "--seed", "9",
                "--json", str(out_json),
            )
            assert code == 0
        assert j1.read_text() == j2.read_text()
        record = json.loads(j1.read_text())["estimates"][0]
        assert record["se"] is not None and record["se"] > 0
        assert record["p_used"] is not None
        assert record["replicates"] == 25

    def test_p_override(self, capsys, tmp_path):
        rng = np.random.default_rng(7)
        path = write(tmp_path, "s.txt", " ".join(str(x) for x in rng.integers(0, 3, 200)))
        out_json = tmp_path / "r.json"
        run(
            capsys, "estimate", path, "--replicates", "10", "--p", "0.5",
            "--json", str(out_json),
        )
        assert json.loads(out_json.read_text())["estimates"][0]["p_used"] == 0.5

    def test_csv_mirror(self, capsys, tmp_path):
        path = write(tmp_path, "alt.txt", " ".join(["L", "R"] * 20))
        out_csv = tmp_path / "report.csv"
        run(capsys, "estimate", path, "--csv", str(out_csv))
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "method,order,value_bits,se,p_used,replicates,warnings"
        assert lines[1].startswith("direct_empirical,1,0.0")

    def test_exclude_boundaries(self, capsys, tmp_path):
        p1 = write(tmp_path, "one.txt", "a b a b\n")
        p2 = write(tmp_path, "two.txt", "b b b a\n")
        ji, je = tmp_path / "inc.json", tmp_path / "exc.json"
        run(capsys, "estimate", p1, p2, "--json", str(ji))
        run(capsys, "estimate", p1, p2, "--exclude-boundaries", "--json", str(je))
        vi = json.loads(ji.read_text())["estimates"][0]["value_bits"]
        ve = json.loads(je.read_text())["estimates"][0]["value_bits"]
        assert vi != ve

    def test_missing_file_is_input_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "estimate", str(tmp_path / "nope.txt"))
        assert code == 1
        assert json.loads(err)["error"]["type"] == "input"

    def test_reducible_eigen_is_numeric_error(self, capsys, tmp_path):
        path = write(tmp_path, "s.txt", " ".join(["0"] * 50 + ["1"]))
        code, _, err = run(capsys, "estimate", path, "--method", "eigen")
        assert code == 2
        assert json.loads(err)["error"]["type"] == "numeric"

    def test_paper_zero_mode_rescues(self, capsys, tmp_path):
        path = write(tmp_path, "s.txt", " ".join(["0"] * 50 + ["1"]))
        out_json = tmp_path / "r.json"
        code, _, _ = run(
            capsys, "estimate", path, "--method", "eigen", "--paper-zero-mode",
            "--json", str(out_json),
        )
        assert code == 0
        record = json.loads(out_json.read_text())["estimates"][0]
        assert record["value_bits"] == 0.0
        assert any("reducible" in w for w in record["warnings"])


class TestBootstrapCommand:
    def test_requires_replicates(self, capsys, tmp_path):
        path = write(tmp_path, "s.txt", "a b a b\n")
        code, _, err = run(capsys, "bootstrap", path)
        assert code == 1
        assert "replicates" in json.loads(err)["error"]["message"]

    def test_constant_sequence_zero_se(self, capsys, tmp_path):
        path = write(tmp_path, "s.txt", "a a a a a a\n")
        out_json = tmp_path / "r.json"
        code, _, _ = run(
            capsys, "bootstrap", path, "--replicates", "10", "--json", str(out_json)
        )
        assert code == 0
        record = json.loads(out_json.read_text())["estimates"][0]
        assert record["se"] == 0.0


class TestSimulateCommand:
    def test_benchmark_deterministic(self, capsys):
        code1, out1, _ = run(capsys, "simulate", "--benchmark", "low", "--length", "25", "--seed", "4")
        code2, out2, _ = run(capsys, "simulate", "--benchmark", "low", "--length", "25", "--seed", "4")
        assert code1 == code2 == 0
        assert out1 == out2
        assert len(out1.split()) == 25

    def test_second_order_generator(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--second-order", "0.1,0.933,0.85,0.2",
            "--length", "30", "--seed", "2",
        )
        assert code == 0
        assert set(out.split()) <= {"A", "B"}

    def test_matrix_file(self, capsys, tmp_path):
        path = write(tmp_path, "m.txt", "0 1\n1 0\n")
        code, out, _ = run(
            capsys, "simulate", "--matrix", path, "--length", "6", "--seed", "0", "--init", "0"
        )
        assert code == 0
        assert out.split() == ["0", "1", "0", "1", "0", "1"]

    def test_out_file(self, capsys, tmp_path):
        dest = tmp_path / "seq.txt"
        code, _, _ = run(
            capsys, "simulate", "--benchmark", "high", "--length", "10",
            "--seed", "1", "--out", str(dest),
        )
        assert code == 0
        assert len(dest.read_text().split()) == 10

    def test_generator_required(self, capsys):
        code, _, err = run(capsys, "simulate", "--length", "5")
        assert code == 1
        assert "generator" in json.loads(err)["error"]["message"]


class TestExperimentCommand:
    @staticmethod
    def plan_dict():
        return {
            "generator": {"matrix": [[0.2, 0.8], [0.7, 0.3]]},
            "lengths": [20, 40],
            "replicates": 3,
            "estimators": [{"method": "empirical", "order": 1}, {"method": "swlz"}],
            "seed": 12,
        }

    def test_report_written_and_deterministic(self, capsys, tmp_path):
        plan_path = write(tmp_path, "plan.json", json.dumps(self.plan_dict()))
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        for out in (out1, out2):
            code, stdout, _ = run(capsys, "experiment", plan_path, "--json", str(out))
            assert code == 0
            assert "length" in stdout
        assert out1.read_text() == out2.read_text()
        report = json.loads(out1.read_text())
        assert len(report["cells"]) == 4
        assert report["plan"] == self.plan_dict()

    def test_default_report_path(self, capsys, tmp_path):
        plan_path = write(tmp_path, "plan.json", json.dumps(self.plan_dict()))
        code, _, _ = run(capsys, "experiment", plan_path)
        assert code == 0
        assert (tmp_path / "plan.report.json").exists()

    def test_single_replicate_collapses_stats(self, capsys, tmp_path):
        plan = self.plan_dict()
        plan["replicates"] = 1
        plan_path = write(tmp_path, "plan.json", json.dumps(plan))
        out = tmp_path / "r.json"
        run(capsys, "experiment", plan_path, "--json", str(out))
        for cell in json.loads(out.read_text())["cells"]:
            assert cell["min"] == cell["mean"] == cell["max"]

    def test_decreasing_lengths_rejected(self, capsys, tmp_path):
        plan = self.plan_dict()
        plan["lengths"] = [40, 20]
        plan_path = write(tmp_path, "plan.json", json.dumps(plan))
        code, _, err = run(capsys, "experiment", plan_path)
        assert code == 1
        assert "lengths" in json.loads(err)["error"]["message"]

    def test_malformed_json_has_position(self, capsys, tmp_path):
        plan_path = write(tmp_path, "plan.json", "{ nope")
        code, _, err = run(capsys, "experiment", plan_path)
        assert code == 1
        assert "invalid JSON" in json.loads(err)["error"]["message"]

    def test_benchmark_generator_in_plan(self, capsys, tmp_path):
        plan = self.plan_dict()
        plan["generator"] = {"benchmark": "high"}
        plan["lengths"] = [30]
        plan_path = write(tmp_path, "plan.json", json.dumps(plan))
        out = tmp_path / "r.json"
        code, _, _ = run(capsys, "experiment", plan_path, "--json", str(out))
        assert code == 0

    def test_csv_mirror(self, capsys, tmp_path):
        plan_path = write(tmp_path, "plan.json", json.dumps(self.plan_dict()))
        out_csv = tmp_path / "r.csv"
        run(capsys, "experiment", plan_path, "--csv", str(out_csv))
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "length,method,order,n_ok,n_failed,min,mean,max,sd"
        assert len(lines) == 5


class TestTtestCommand:
    def test_published_values(self, capsys, tmp_path):
        a = write(tmp_path, "a.txt", "1.5483 1.5107 1.5727 1.6571 1.7552 1.7864\n")
        b = write(tmp_path, "b.txt", "1.6956 1.6285 1.6797 1.6807 1.7916 1.8526\n")
        out_json = tmp_path / "t.json"
        code, out, _ = run(capsys, "ttest", a, b, "--json", str(out_json))
        assert code == 0
        report = json.loads(out_json.read_text())
        assert report["t_statistic"] == pytest.approx(-1.4425, abs=1e-3)
        assert report["df"] == 10
        assert "t = -1.44" in out

    def test_degenerate_is_numeric_error(self, capsys, tmp_path):
        a = write(tmp_path, "a.txt", "1 1 1\n")
        b = write(tmp_path, "b.txt", "1 1\n")
        code, _, err = run(capsys, "ttest", a, b)
        assert code == 2
        assert json.loads(err)["error"]["type"] == "numeric"

    def test_non_numeric_is_input_error(self, capsys, tmp_path):
        a = write(tmp_path, "a.txt", "1 x\n")
        b = write(tmp_path, "b.txt", "1 2\n")
        code, _, _ = run(capsys, "ttest", a, b)
        assert code == 1


class TestEndToEnd:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "entrate", "parse", "--text", TABLE_STRING],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == TABLE_PARSING

    def test_unknown_command_is_input_error(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == 1
