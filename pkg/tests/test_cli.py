import json

import pytest

import cleanval as cv
import cleanval.cli as cli


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Benchmark data plus a small-but-complete config file."""
    root = tmp_path_factory.mktemp("cli")
    manifest_path, data_path = cv.write_benchmark(str(root / "data"), n=400, seed=2, fraud_rate=0.08)
    out_dir = root / "out"
    config = {
        "manifest": manifest_path,
        "data": data_path,
        "output_dir": str(out_dir),
        "base_model": {"n_rounds": 5, "max_depth": 2},
        "micro_model": {"n_rounds": 3, "max_depth": 2},
        "n_micromodels": 2,
        "fpr_targets": [0.05, 0.1],
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config))
    return root, str(config_path), str(out_dir)


class TestRun:
    def test_writes_all_artifacts(self, workspace, capsys):
        root, config_path, out_dir = workspace
        assert cli.main(["run", "--config", config_path]) == cli.EXIT_OK
        out = capsys.readouterr().out
        for name in ("results.csv", "tables.md", "noise_report.json", "result.json", "timings.json"):
            assert name in out
            assert (root / "out" / name).exists()

    def test_missing_config(self, tmp_path, capsys):
        code = cli.main(["run", "--config", str(tmp_path / "none.json")])
        assert code == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"manifest": "m", "data": "d", "bogus": 1}))
        assert cli.main(["run", "--config", str(path)]) == cli.EXIT_CONFIG

    def test_missing_data_file(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"manifest": str(tmp_path / "m.json"), "data": str(tmp_path / "d.csv")}))
        assert cli.main(["run", "--config", str(path)]) == cli.EXIT_DATA
        assert "error" in capsys.readouterr().err


class TestTheoryCheck:
    def test_small_run(self, tmp_path, capsys):
        report_path = tmp_path / "theory_report.json"
        code = cli.main(
            ["theory-check", "--trials", "5", "--n-max", "8", "--output", str(report_path)]
        )
        assert code == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "calibration_balance:" in out
        assert "[ok]" in out
        report = json.loads(report_path.read_text())
        assert report["passed"] is True
        assert report["trials"] == 5

    def test_bad_trials(self, capsys):
        assert cli.main(["theory-check", "--trials", "0"]) == cli.EXIT_CONFIG

    def test_bad_n_max(self, capsys):
        assert cli.main(["theory-check", "--n-max", "3"]) == cli.EXIT_CONFIG

    def test_failing_checks_exit_code(self, tmp_path, capsys, monkeypatch):
        def fake_suite(seed, trials, n_max):
            return {
                "seed": seed,
                "trials": trials,
                "n_max": n_max,
                "checks": {"fpr_gap": {"runs": 1, "failures": 1}},
                "failures": [{"check": "fpr_gap"}],
                "passed": False,
            }

        monkeypatch.setattr(cli, "run_theory_suite", fake_suite)
        code = cli.main(["theory-check", "--trials", "1", "--output", str(tmp_path / "r.json")])
        assert code == cli.EXIT_CHECK
        captured = capsys.readouterr()
        assert "[FAIL]" in captured.out
        assert "FAILED" in captured.err


class TestEmit:
    def test_round_trips_run_outputs(self, workspace, tmp_path, capsys):
        root, config_path, out_dir = workspace
        assert cli.main(["run", "--config", config_path]) == cli.EXIT_OK
        capsys.readouterr()
        result_path = str(root / "out" / "result.json")
        for fmt, name in (("csv", "results.csv"), ("markdown", "tables.md")):
            code = cli.main(
                ["emit", "--result", result_path, "--format", fmt, "--output-dir", str(tmp_path)]
            )
            assert code == cli.EXIT_OK
            assert (tmp_path / name).read_bytes() == (root / "out" / name).read_bytes()

    def test_missing_result(self, tmp_path, capsys):
        code = cli.main(["emit", "--result", str(tmp_path / "r.json"), "--format", "csv"])
        assert code == cli.EXIT_DATA

    def test_malformed_result(self, tmp_path, capsys):
        path = tmp_path / "result.json"
        path.write_text(json.dumps({"config_hash": "x"}))
        code = cli.main(["emit", "--result", str(path), "--format", "csv", "--output-dir", str(tmp_path)])
        assert code == cli.EXIT_DATA
        assert "malformed" in capsys.readouterr().err


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            cli.main([])

    def test_emit_format_choices(self):
        with pytest.raises(SystemExit):
            cli.main(["emit", "--result", "r.json", "--format", "latex"])
