import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from wspdfuse.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main


@pytest.fixture
def points_file(tmp_path):
    path = tmp_path / "pts.csv"
    assert main(["generate", "--dist", "gaussian", "--dim", "3", "--count", "50", "--seed", "4", "-o", str(path)]) == 0
    return path


def distances(text):
    return [row["path_distance"] for row in csv.DictReader(io.StringIO(text))]


def test_generate_to_stdout(capsys):
    assert main(["generate", "--dim", "2", "--count", "5", "--min", "-1", "--max", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# dim=2\n# count=5\n# seed=0\n")
    assert len(out.splitlines()) == 8


def test_generate_invalid_params(tmp_path, capsys):
    target = tmp_path / "x.csv"
    assert main(["generate", "--dim", "1", "--count", "5", "-o", str(target)]) == EXIT_INVALID
    assert "ConfigError" in capsys.readouterr().err
    assert not target.exists()


def test_tree(points_file, capsys):
    assert main(["tree", "-i", str(points_file), "--with-balls"]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    assert d["num_points"] == 50 and d["node_count"] == 99
    assert all("ball" in n for n in d["nodes"])


def test_wspd_two_points(tmp_path, capsys):
    f = tmp_path / "two.csv"
    f.write_text("0,0\n3,4\n")
    assert main(["wspd", "-i", str(f), "--s", "2"]) == EXIT_OK
    cap = capsys.readouterr()
    assert len(cap.out.splitlines()) == 1
    assert json.loads(cap.err)["num_pairs"] == 1


def test_wspd_summary_file(points_file, tmp_path, capsys):
    pairs, summary = tmp_path / "pairs.jsonl", tmp_path / "summary.json"
    assert main(["wspd", "-i", str(points_file), "--s", "1", "-o", str(pairs), "--summary", str(summary)]) == 0
    assert len(pairs.read_text().splitlines()) == json.loads(summary.read_text())["num_pairs"]


def test_knn_pruned_full_equals_oracle(points_file, capsys):
    assert main(["knn", "-i", str(points_file), "-K", "5", "--power", "3", "--k-prune", "N-1"]) == 0
    pruned = capsys.readouterr().out
    assert main(["knn", "-i", str(points_file), "-K", "5", "--power", "3", "--oracle"]) == 0
    oracle = capsys.readouterr().out
    assert distances(pruned) == distances(oracle)
    assert pruned == oracle
    assert len(pruned.splitlines()) == 1 + 50 * 5


def test_knn_bad_k_prune(points_file, capsys):
    assert main(["knn", "-i", str(points_file), "--k-prune", "lots"]) == EXIT_INVALID


def test_cluster(points_file, capsys):
    assert main(["cluster", "-i", str(points_file), "--k-prune", "10", "--num-clusters", "3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 50
    assert {r["cluster_id"] for r in rows} == {"0", "1", "2"}


def test_cluster_disconnected_is_runtime_error(tmp_path, capsys):
    f = tmp_path / "far.csv"
    f.write_text("0,0\n0,1\n100,0\n100,1\n")
    out = tmp_path / "labels.csv"
    code = main(["cluster", "-i", str(f), "--k-prune", "1", "--num-clusters", "1", "-o", str(out)])
    assert code == EXIT_RUNTIME
    assert "DisconnectedGraphError" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize(
    "content, name",
    [("1,2\n1,2,3\n", "PointSetError"), ("1,x\n2,3\n", "ValueError"), ("1,1\n1,1\n", "PointSetError")],
)
def test_malformed_csv(tmp_path, capsys, content, name):
    f = tmp_path / "bad.csv"
    f.write_text(content)
    assert main(["knn", "-i", str(f)]) == EXIT_INVALID
    assert name in capsys.readouterr().err


def test_missing_input_file(tmp_path, capsys):
    assert main(["tree", "-i", str(tmp_path / "nope.csv")]) == EXIT_INVALID


def test_fuse_bundled_config_echo(capsys):
    assert main(["fuse", "--config", "fig10"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["caption_parameters"] == {
        "distribution": "uniform", "min": -500.0, "max": 500.0, "dim": 6, "count": 500,
        "s": 4.0, "numClusters": 2, "numNeighbors": 4, "powerWeighting": 6.0,
    }
    assert report["num_points"] == 500


def test_fuse_output_dir(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["fuse", "--dim", "2", "--count", "60", "--seed", "1", "--s", "0.5", "-K", "3", "--k-prune", "10",
            "--output-dir", str(out)]
    assert main(args) == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["knn.csv", "labels.csv", "points.csv", "projection.csv", "report.json"]
    report = json.loads((out / "report.json").read_text())
    proj = list(csv.DictReader((out / "projection.csv").open()))
    assert sum(int(r["selected"]) for r in proj) == report["num_selected_points"]


def test_fuse_failure_leaves_no_files(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["fuse", "--dim", "2", "--count", "50", "--s", "50", "-K", "40", "--output-dir", str(out)]
    assert main(args) == EXIT_INVALID
    assert "select" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


def test_fuse_needs_config_or_flags(capsys):
    assert main(["fuse", "--dim", "2"]) == EXIT_INVALID


def test_bench_json_and_table(tmp_path, capsys):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text(
        'label = "tiny"\n[data]\nfamily = "uniform"\ndim = 2\ncount = 30\nseed = 1\n'
        "[wspd]\ns = 0.5\n[path]\nnum_neighbors = 2\npower_weighting = 2.0\nk_prune = 8\n"
        "[cluster]\nnum_clusters = 2\n"
    )
    target = tmp_path / "bench.json"
    assert main(["bench", "-c", str(cfg), "--iterations", "2", "-o", str(target)]) == EXIT_OK
    assert "p-wspm w pruning (WSPD)" in capsys.readouterr().out
    (rep,) = json.loads(target.read_text())
    assert rep["iterations"] == 2 and rep["config_label"].startswith("tiny-")


def test_unknown_config(capsys):
    assert main(["bench", "-c", "fig99"]) == EXIT_INVALID


def test_unknown_flag_exits_nonzero():
    proc = subprocess.run(
        [sys.executable, "-m", "wspdfuse", "generate", "--dim", "2", "--count", "3", "--bogus"],
        capture_output=True, text=True,
    )
    assert proc.returncode != 0
    assert "unrecognized arguments" in proc.stderr


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "wspdfuse", "generate", "--dim", "2", "--count", "3"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert np.loadtxt(io.StringIO(proc.stdout), delimiter=",", comments="#").shape == (3, 2)
