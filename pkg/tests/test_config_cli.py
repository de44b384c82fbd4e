"""Config serialization round-trips and the command-line contract
(subcommands, report documents, exit codes)."""

import json
import subprocess
import sys

import pytest

from equicheck.builtins import BUILTINS
from equicheck.cli import run
from equicheck.config import from_json, to_json
from equicheck.errors import ConfigError


class TestConfigRoundTrip:
    @pytest.mark.parametrize("name", sorted(BUILTINS))
    def test_builtin_round_trips(self, name):
        cfg = BUILTINS[name]
        assert from_json(to_json(cfg)) == cfg

    def test_unknown_kind_rejected(self):
        text = json.dumps(
            {
                "schema_version": 1,
                "name": "bad",
                "group": "p4",
                "input_size": 9,
                "layers": [{"kind": "gconv9", "k": 3, "out_channels": 1}],
            }
        )
        with pytest.raises(ConfigError, match="gconv9"):
            from_json(text)

    def test_group_chain_validated(self):
        text = json.dumps(
            {
                "schema_version": 1,
                "name": "bad",
                "group": "z2",
                "input_size": 9,
                "layers": [{"kind": "gconv_lift", "k": 3, "out_channels": 1}],
            }
        )
        with pytest.raises(ConfigError):
            from_json(text)

    def test_rectangular_input_rejected(self):
        text = json.dumps(
            {
                "schema_version": 1,
                "name": "bad",
                "group": "z2",
                "input_size": [28, 27],
                "layers": [{"kind": "relu"}],
            }
        )
        with pytest.raises(ConfigError, match="square"):
            from_json(text)


def run_cli(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv, "--format", "structured")
    return code, json.loads(out)


class TestAnalyzeCommand:
    def test_exact_builtin_exits_zero(self, capsys):
        code, out = run_cli(capsys, "analyze", "p4cnn")
        assert code == 0
        assert "verdict: exact" in out

    def test_approximate_exits_one(self, capsys):
        code, doc = run_json(capsys, "analyze", "p4cnn", "--input-size", "27")
        assert code == 1
        result = doc["result"]
        assert result["exact"] is False
        pool = next(t["index"] for t in result["trace"] if t["kind"] == "maxpool")
        assert pool in result["violations"]
        assert 28 in result["suggested_sizes"]

    def test_malformed_config_exits_two(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps(
                {
                    "schema_version": 1,
                    "name": "bad",
                    "group": "p4",
                    "input_size": 9,
                    "layers": [{"kind": "gconv9", "k": 3, "out_channels": 1}],
                }
            )
        )
        code = run(["analyze", str(path)])
        assert code == 2

    def test_unknown_reference_exits_two(self):
        assert run(["analyze", "no-such-thing"]) == 2

    def test_custom_config_file(self, capsys, tmp_path):
        path = tmp_path / "net.json"
        path.write_text(to_json(BUILTINS["toy41"]))
        code, out = run_cli(capsys, "analyze", str(path))
        assert code == 0

    def test_no_ansi_when_not_a_tty(self, capsys):
        _, out = run_cli(capsys, "analyze", "p4cnn")
        assert "\033[" not in out


class TestSuggestCommand:
    def test_p4cnn_window(self, capsys):
        code, doc = run_json(capsys, "suggest", "p4cnn", "26", "30")
        assert code == 0
        sizes = doc["result"]["exact_sizes"]
        assert 28 in sizes and 27 not in sizes and 29 not in sizes

    def test_toy_window(self, capsys):
        code, doc = run_json(capsys, "suggest", "toy41", "30", "35")
        assert code == 0
        sizes = doc["result"]["exact_sizes"]
        assert 33 in sizes and 32 not in sizes

    def test_empty_result_still_exits_zero(self, capsys):
        code, doc = run_json(capsys, "suggest", "fig1-maxpool", "3", "3")
        assert code == 0
        assert doc["result"]["exact_sizes"] == []


class TestOracleCommand:
    def test_default_grid_agrees(self, capsys):
        code, doc = run_json(capsys, "oracle")
        assert code == 0
        assert doc["result"]["agreement"] == 1.0

    def test_mirror_grid_identical_verdicts(self, capsys):
        code_r, doc_r = run_json(capsys, "oracle", "--symmetry", "rot")
        code_m, doc_m = run_json(capsys, "oracle", "--symmetry", "mirror")
        assert code_r == code_m == 0
        rot = [(c["i"], c["k"], c["s"], c["holds"]) for c in doc_r["result"]["cells"]]
        mir = [(c["i"], c["k"], c["s"], c["holds"]) for c in doc_m["result"]["cells"]]
        assert rot == mir

    def test_single_cell_counterexample(self, capsys):
        code, doc = run_json(
            capsys, "oracle", "--i-range", "5:5", "--k-range", "2:2", "--s-range", "2:2"
        )
        assert code == 0  # verdict and rule agree that it breaks
        (cell,) = doc["result"]["cells"]
        assert cell["holds"] is False
        assert "counterexample" in cell

    def test_degenerate_range_exits_two(self):
        assert run(["oracle", "--i-range", "5:4"]) == 2


class TestMeasureCommand:
    def test_exact_toy_integer_mode(self, capsys):
        code, doc = run_json(capsys, "measure", "toy41", "--integer-weights")
        assert code == 0
        assert doc["result"]["max_error"] == 0.0
        assert all(e["error"] == 0.0 for e in doc["result"]["entries"])

    def test_broken_toy_exits_one(self, capsys):
        code, doc = run_json(
            capsys, "measure", "toy41", "--input-size", "32", "--integer-weights"
        )
        assert code == 1
        assert doc["result"]["max_error"] > 0

    def test_deterministic_for_seed(self, capsys):
        _, doc_a = run_json(capsys, "measure", "toy41", "--seed", "5")
        _, doc_b = run_json(capsys, "measure", "toy41", "--seed", "5")
        assert doc_a == doc_b

    def test_elements_flag(self, capsys):
        code, doc = run_json(
            capsys, "measure", "toy41", "--integer-weights", "--elements", "r,r2"
        )
        assert code == 0
        assert doc["result"]["elements"] == ["r", "r2"]

    def test_mirror_element_needs_p4m(self):
        assert run(["measure", "toy41", "--elements", "m"]) == 2


class TestSweepCommand:
    def test_exact_toy(self, capsys):
        code, doc = run_json(
            capsys, "sweep", "toy41", "--integer-weights", "--angle-step", "90"
        )
        assert code == 0
        rows = doc["result"]["rows"]
        assert rows[0]["angle"] == 0.0 and rows[0]["discrepancy"] == 0.0
        assert len(rows) == 4

    def test_head_validation(self, capsys, tmp_path):
        cfg = {
            "schema_version": 1,
            "name": "headless",
            "group": "p4",
            "input_size": 9,
            "layers": [{"kind": "gconv_lift", "k": 3, "out_channels": 1}],
        }
        path = tmp_path / "headless.json"
        path.write_text(json.dumps(cfg))
        assert run(["sweep", str(path)]) == 2


class TestReportDocument:
    def test_round_trips_losslessly(self, capsys):
        _, doc = run_json(capsys, "analyze", "p4cnn")
        assert json.loads(json.dumps(doc)) == doc
        assert doc["schema_version"] == 1
        assert doc["tool_version"]
        assert doc["config_digest"]

    def test_out_flag_writes_document(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code, _ = run_cli(capsys, "analyze", "toy41", "--out", str(path))
        assert code == 0
        doc = json.loads(path.read_text())
        assert doc["command"] == "analyze"
        assert doc["result"]["exact"] is True

    def test_list_builtins(self, capsys):
        code, doc = run_json(capsys, "list-builtins")
        assert code == 0
        names = {b["name"] for b in doc["result"]["builtins"]}
        assert names == {"toy41", "p4cnn", "z2cnn", "fig1-maxpool"}


class TestConsoleEntryPoints:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "equicheck", "analyze", "p4cnn"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "verdict: exact" in proc.stdout

    def test_usage_error_exits_two(self):
        proc = subprocess.run(
            [sys.executable, "-m", "equicheck", "frobnicate"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
