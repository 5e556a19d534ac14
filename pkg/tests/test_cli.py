import csv
import io
import json

import jsonschema
import pytest
from fastapi.testclient import TestClient

from evograph.cli import EXIT_INVALID_REGIME, EXIT_OK, EXIT_USAGE, main, parse_grid
from evograph.schema import CSV_COLUMNS, REPORT_SCHEMA
from evograph.service.app import app


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGridParsing:
    def test_comma_list(self):
        assert parse_grid("1,2,5") == [1.0, 2.0, 5.0]
        assert parse_grid("2,4", int) == [2, 4]

    def test_range_syntax(self):
        assert parse_grid("2:10:2", int) == [2, 4, 6, 8, 10]
        assert parse_grid("1:2:0.5") == [1.0, 1.5, 2.0]

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            parse_grid("1:2")
        with pytest.raises(ValueError):
            parse_grid("1:2:0")


class TestSubcommands:
    def test_trainlen_row(self, capsys):
        code, out, _ = run_cli(capsys, "trainlen", "--r", "2", "--H", "3")
        assert code == EXIT_OK
        rows = json.loads(out)
        assert rows[0]["T"] == pytest.approx(4 / 3)
        assert rows[0]["dp_check"]["agrees"] is True

    def test_trainlen_grid(self, capsys):
        code, out, _ = run_cli(capsys, "trainlen", "--r", "1.5,2", "--H", "2:4:1")
        rows = json.loads(out)
        assert len(rows) == 6

    def test_bounds_paper_point(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--r", "2", "--B", "5000", "--L", "5000",
            "--H", "50", "--delta", "70",
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["bounds"]["lower"] == pytest.approx(0.985323, abs=5e-4)
        assert doc["bounds"]["upper"] == pytest.approx(0.995375, abs=1e-4)

    def test_bounds_invalid_regime_exit_3(self, capsys):
        code, out, _ = run_cli(
            capsys, "bounds", "--r", "1.1", "--B", "4", "--L", "4", "--H", "3"
        )
        assert code == EXIT_INVALID_REGIME
        assert json.loads(out)["valid_regime"] is False

    def test_simulate_byte_identical(self, capsys):
        args = (
            "simulate", "--family", "cycle", "--n", "5", "--r", "1",
            "--trials", "1000", "--seed", "7",
        )
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == EXIT_OK
        assert out1 == out2
        est = json.loads(out1)["estimate"]
        assert 0.1 < est["p"] < 0.3  # neutral cycle fixes ~1/5

    def test_exact_subcommand(self, capsys):
        code, out, _ = run_cli(
            capsys, "exact", "--family", "complete", "--n", "4", "--r", "2"
        )
        assert code == EXIT_OK
        assert json.loads(out)["exact"]["average"] == pytest.approx(8 / 15, abs=1e-12)

    def test_one_to_two_subcommand(self, capsys):
        code, out, _ = run_cli(
            capsys, "one-to-two", "--B", "3", "--L", "3", "--H", "2",
            "--r", "2", "--trials", "500", "--seed", "1",
        )
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["growth_bias"] == pytest.approx(16 / 17)

    def test_graph_export(self, capsys):
        code, out, _ = run_cli(
            capsys, "graph", "--family", "superstar", "--B", "2", "--L", "1", "--H", "2"
        )
        doc = json.loads(out)
        assert doc["n"] == 7

    def test_missing_superstar_flags_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "exact", "--family", "superstar", "--r", "2")
        assert code == EXIT_USAGE
        assert "error" in err

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bounds", "--r", "2", "--nope", "1"])
        assert exc.value.code == 2

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "--format", "csv", "bounds", "--r", "2", "--B", "100",
            "--L", "100", "--H", "3",
        )
        assert code == EXIT_OK
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == CSV_COLUMNS
        header_idx = {name: i for i, name in enumerate(rows[0])}
        assert float(rows[1][header_idx["T"]]) == pytest.approx(4 / 3)


class TestOutputFile:
    def test_out_writes_file(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, out, _ = run_cli(
            capsys, "--out", str(out_path), "bounds", "--r", "2", "--B", "100",
            "--L", "100", "--H", "3",
        )
        assert code == EXIT_OK
        assert out == ""
        assert json.loads(out_path.read_text())["valid_regime"] is True


class TestSweep:
    def test_sweep_stdout(self, capsys):
        code, out, err = run_cli(
            capsys, "sweep", "--op", "trainlen", "--r", "1.5,2", "--H", "2:3:1"
        )
        assert code == EXIT_OK
        assert "4 jobs" in err
        rows = json.loads(out)
        assert [r["grid_index"] for r in rows] == [0, 1, 2, 3]

    def test_sweep_resume_skips_done_rows(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.jsonl"
        code, _, _ = run_cli(
            capsys, "--out", str(out_path), "sweep", "--op", "bounds",
            "--r", "1.5,2", "--B", "100", "--L", "100", "--H", "3",
        )
        assert code == EXIT_OK
        lines = out_path.read_text().splitlines()
        assert len(lines) == 2

        # drop the second row, rerun: only the missing row is recomputed
        out_path.write_text(lines[0] + "\n")
        code, _, err = run_cli(
            capsys, "--out", str(out_path), "sweep", "--op", "bounds",
            "--r", "1.5,2", "--B", "100", "--L", "100", "--H", "3",
        )
        assert code == EXIT_OK
        assert "resuming" in err
        redone = out_path.read_text().splitlines()
        assert len(redone) == 2
        assert json.loads(redone[1])["grid_index"] == 1

    def test_sweep_simulate_family_grid(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--op", "simulate", "--family", "cycle",
            "--n", "4,5", "--r", "1", "--rule", "Bd,dB",
            "--trials", "200", "--seed", "5",
        )
        assert code == EXIT_OK
        rows = json.loads(out)
        assert len(rows) == 4


class TestThinClientOverHttp:
    def test_server_mode_matches_in_process(self, capsys):
        args = ("bounds", "--r", "2", "--B", "5000", "--L", "5000", "--H", "50")
        code_local, out_local, _ = run_cli(capsys, *args)

        client = TestClient(app)
        code_http = main(["--server", "http://testserver", *args], client=client)
        out_http = capsys.readouterr().out
        assert code_local == code_http == EXIT_OK
        assert json.loads(out_local) == json.loads(out_http)

    def test_server_mode_simulate(self, capsys):
        client = TestClient(app)
        args = (
            "simulate", "--family", "cycle", "--n", "5", "--r", "1",
            "--trials", "300", "--seed", "7",
        )
        code = main(["--server", "http://testserver", *args], client=client)
        out_http = capsys.readouterr().out
        code2, out_local, _ = run_cli(capsys, *args)
        assert code == code2 == EXIT_OK
        assert json.loads(out_http) == json.loads(out_local)
