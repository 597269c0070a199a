import io
import re
from pathlib import Path

import pytest

from railassist.domain import read_delays_csv, read_schedules_csv
from railassist.service.cli import main

GOLDEN = Path(__file__).parent / "data" / "fig1_transcript.golden"


@pytest.fixture(scope="module")
def demo_workspace(tmp_path_factory):
    """CLI-built workspace: demo CSVs plus a trained bundle."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert main(["generate", "--scenario", "demo", "--out", str(data)]) == 0
    bundle = root / "model.bundle"
    assert (
        main(
            [
                "train", "--data", str(data), "--out", str(bundle),
                "--n-trees", "8", "--max-depth", "6", "--seed", "3", "--split-seed", "1",
            ]
        )
        == 0
    )
    return data, bundle


class TestGenerate:
    def test_writes_all_three_csvs(self, tmp_path, capsys):
        out = tmp_path / "gen"
        code = main(["generate", "--scenario", "bottlenecked", "--seed", "42", "--out", str(out),
                     "--n-known", "3", "--n-unknown", "1"])
        assert code == 0
        assert (out / "schedules.csv").exists()
        assert (out / "delays.csv").exists()
        assert (out / "ground_truth.csv").exists()
        catalog = read_schedules_csv(out / "schedules.csv")
        assert len(catalog.trains) == 4
        observations = read_delays_csv(out / "delays.csv")
        assert observations

    def test_deterministic_across_runs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["generate", "--scenario", "smooth", "--seed", "42", "--out", str(out),
                         "--n-known", "2", "--n-unknown", "1"]) == 0
        assert (a / "schedules.csv").read_bytes() == (b / "schedules.csv").read_bytes()
        assert (a / "delays.csv").read_bytes() == (b / "delays.csv").read_bytes()

    def test_unknown_scenario_fails_cleanly(self, tmp_path, capsys):
        code = main(["generate", "--scenario", "nope", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestTrainEval:
    def test_eval_prints_coverage_matching_direct_call(self, demo_workspace, capsys):
        data, bundle = demo_workspace
        assert main(["eval", "--data", str(data), "--bundle", str(bundle), "--ci", "99"]) == 0
        printed = float(capsys.readouterr().out.strip())

        from railassist.predictor import evaluate_ci_accuracy, load_registry
        from railassist.synthdata import split_dataset

        catalog = read_schedules_csv(data / "schedules.csv")
        observations = read_delays_csv(data / "delays.csv")
        split = split_dataset(observations, (0.6, 0.2, 0.2), seed=0)
        registry = load_registry(bundle)
        want = evaluate_ci_accuracy(registry, catalog, observations, sorted(split.test), 99)
        assert printed == pytest.approx(want, abs=1e-6)
        assert 0.0 <= printed <= 1.0

    def test_missing_data_dir_fails(self, tmp_path, capsys):
        code = main(["train", "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "m.bundle")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestAnalyze:
    def test_profile_csv_on_stdout(self, demo_workspace, capsys):
        data, _ = demo_workspace
        assert main(["analyze", "--data", str(data), "--train", "12307"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "train_number,station_code,mean_late_min,n_observations"
        assert len(lines) == 9
        assert lines[1].startswith("12307,HWH,")


class TestChat:
    def test_figure_one_transcript_matches_golden(self, demo_workspace, capsys, monkeypatch):
        data, bundle = demo_workspace
        script = (
            "Is train 12307 on time?\n"
            "How about for Varanasi?\n"
            "No, I meant for Allahabad.\n"
            "What is the average train delay?\n"
        )
        monkeypatch.setattr("sys.stdin", io.StringIO(script))
        code = main(["chat", "--data", str(data), "--bundle", str(bundle), "--today", "2018-09-21"])
        assert code == 0
        transcript = capsys.readouterr().out
        assert transcript == GOLDEN.read_text()


class TestBenchCommand:
    def test_tiny_tradeoff_run(self, tmp_path, capsys):
        out = tmp_path / "results.csv"
        code = main([
            "bench", "--mode", "tradeoff", "--out", str(out),
            "--tree-counts", "1,2", "--repetitions", "3", "--n-stations", "6", "--n-days", "40", "--seed", "1",
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n_trees,fit_s,predict_ms_per_journey,rmse"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "1"
        assert float(first[2]) > 0


class TestServeFlags:
    def test_same_named_flags_override_config(self):
        from railassist.service.cli import build_parser, serve_overrides
        from railassist.service import load_config

        args = build_parser().parse_args(
            ["serve", "--server.port", "9001", "--model.kind", "ridge", "--set", "ci.default_level=95"]
        )
        config = load_config(None, serve_overrides(args))
        assert config.server_port == 9001
        assert config.model_kind == "ridge"
        assert config.ci_default_level == 95

    def test_missing_bundle_fails_with_message(self, tmp_path, capsys):
        code = main(["serve", "--model.bundle_path", str(tmp_path / "missing.bundle"), "--data.dir", str(tmp_path)])
        assert code == 1
        assert "cannot start service" in capsys.readouterr().err


class TestUsage:
    def test_unknown_flag_exits_2(self, demo_workspace):
        data, bundle = demo_workspace
        with pytest.raises(SystemExit) as err:
            main(["eval", "--data", str(data), "--bundle", str(bundle), "--bogus"])
        assert err.value.code == 2

    def test_no_command_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
