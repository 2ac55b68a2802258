import hashlib
import json
from pathlib import Path

import pytest

from activesearch.cli import main, parse_config_file


def run_cli(*argv):
    return main([str(a) for a in argv])


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    assert run_cli("synth", "--modes", 2, "--n", 200, "--prevalence", 0.1,
                   "--seed", 3, "--out", path) == 0
    return path


class TestIngest:
    def test_writes_artifacts_idempotently(self, corpus_file, tmp_path):
        out = tmp_path / "features"
        assert run_cli("ingest", "--corpus", corpus_file, "--out", out) == 0
        first = {p.name: file_hash(p) for p in out.iterdir()}
        assert "vocabulary.tsv" in first and "doc_ids.txt" in first
        assert run_cli("ingest", "--corpus", corpus_file, "--out", out) == 0
        second = {p.name: file_hash(p) for p in out.iterdir()}
        assert first == second

    def test_missing_file_names_path(self, tmp_path, capsys):
        rc = run_cli("ingest", "--corpus", tmp_path / "nope.jsonl", "--out", tmp_path / "x")
        assert rc != 0
        assert "nope.jsonl" in capsys.readouterr().err


class TestCluster:
    def test_cluster_and_import_round_trip(self, corpus_file, tmp_path):
        features = tmp_path / "features"
        run_cli("ingest", "--corpus", corpus_file, "--out", features)
        memberships = tmp_path / "memberships.tsv"
        assert run_cli("cluster", "--features", features, "--k", 4,
                       "--seed", 1, "--out", memberships) == 0
        validated = tmp_path / "validated.tsv"
        assert run_cli("cluster", "--features", features, "--import", memberships,
                       "--out", validated) == 0
        assert file_hash(memberships) == file_hash(validated)

    def test_import_bad_row_fails(self, corpus_file, tmp_path, capsys):
        features = tmp_path / "features"
        run_cli("ingest", "--corpus", corpus_file, "--out", features)
        bad = tmp_path / "bad.tsv"
        bad.write_text("m0-00000\t0\t0.4\n")
        rc = run_cli("cluster", "--features", features, "--import", bad,
                     "--out", tmp_path / "x.tsv")
        assert rc != 0
        assert "0.4" in capsys.readouterr().err


class TestRun:
    def test_run_then_manifest_replay_identical(self, corpus_file, tmp_path):
        out1 = tmp_path / "out1"
        assert run_cli("run", "--corpus", corpus_file, "--cluster-k", 3,
                       "--strategy", "mab,greedy", "--gamma", "0.9",
                       "--budget", "0.3", "--pseudo-negatives", 20,
                       "--epochs", 50, "--runs", 2, "--seed", 11,
                       "--recall-targets", "0.5,0.9",
                       "--out", out1) == 0
        manifest_path = out1 / "manifest.json"
        assert manifest_path.exists()
        report1 = file_hash(out1 / "report.tsv")
        trajectories1 = sorted(p.name for p in out1.glob("trajectory_*.tsv"))
        assert len(trajectories1) == 4  # 2 strategies x 2 runs

        out2 = tmp_path / "out2"
        assert run_cli("run", "--manifest", manifest_path, "--out", out2) == 0
        assert file_hash(out2 / "report.tsv") == report1
        for name in trajectories1:
            assert file_hash(out1 / name) == file_hash(out2 / name)
        for curve in out1.glob("curve_*.tsv"):
            assert file_hash(curve) == file_hash(out2 / curve.name)

    def test_manifest_records_seeds(self, corpus_file, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--corpus", corpus_file, "--cluster-k", 3,
                "--strategy", "mab", "--gamma", "0.9", "--budget", "0.2",
                "--epochs", 40, "--runs", 2, "--seed", 5, "--out", out)
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["runs"]) == 2
        for run in manifest["runs"]:
            seed_ids = run["seed_ids"]["relevant"]
            assert len(seed_ids) == 3
            assert all(i.startswith("m") for i in seed_ids)
        assert manifest["runs"][0]["seed_ids"] != manifest["runs"][1]["seed_ids"]

    def test_config_file_and_flag_precedence(self, corpus_file, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text("gamma = 0.8\nn_pseudo = 15   # resampled each round\n"
                          "budget = 0.25\nepochs = 30\n")
        parsed = parse_config_file(config)
        assert parsed == {"gamma": 0.8, "n_pseudo": 15, "budget": 0.25, "epochs": 30}
        out = tmp_path / "out"
        assert run_cli("run", "--corpus", corpus_file, "--cluster-k", 3,
                       "--strategy", "greedy", "--config", config,
                       "--runs", 1, "--seed", 2, "--out", out) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["base_config"]["gamma"] == 0.8
        assert manifest["base_config"]["n_pseudo"] == 15

    def test_topic_without_enough_relevant_fails(self, tmp_path, capsys):
        corpus = tmp_path / "tiny.jsonl"
        lines = [json.dumps({"id": f"d{i}", "text": f"alpha beta w{i % 4}",
                             "labels": {"rare": 1 if i == 0 else 0}})
                 for i in range(12)]
        corpus.write_text("".join(l + "\n" for l in lines))
        rc = run_cli("run", "--corpus", corpus, "--cluster-k", 2, "--strategy", "mab",
                     "--runs", 1, "--seed", 0, "--out", tmp_path / "out")
        assert rc != 0
        assert "rare" in capsys.readouterr().err


class TestSynth:
    def test_synth_deterministic(self, tmp_path):
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        run_cli("synth", "--modes", 3, "--n", 150, "--prevalence", 0.1, "--seed", 9, "--out", a)
        run_cli("synth", "--modes", 3, "--n", 150, "--prevalence", 0.1, "--seed", 9, "--out", b)
        assert file_hash(a) == file_hash(b)
