import numpy as np
import pytest

from collective_recourse.cli import cli_main, parse_eps_grid
from collective_recourse.harness import read_report_csv
from collective_recourse.model import load_centroids_csv


def test_parse_eps_grid_inclusive_endpoints():
    grid = parse_eps_grid("0:1:0.1")
    assert len(grid) == 11
    assert grid[0] == 0.0
    assert grid[-1] == 1.0  # snapped to the stop endpoint exactly
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_parse_eps_grid_single_point():
    assert parse_eps_grid("0.5:0.5:0.1") == [0.5]


def test_parse_eps_grid_rejects_garbage():
    for bad in ("0:1", "0:1:0", "a:1:0.1", "0:-1:0.1", "-0.2:1:0.1", "1:0:0.1"):
        with pytest.raises(ValueError):
            parse_eps_grid(bad)


def test_cli_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    assert "fit" in capsys.readouterr().out


def test_cli_unknown_flag(capsys):
    assert cli_main(["fit", "--data", "x.csv", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_cli_missing_required_flag(capsys):
    assert cli_main(["fit"]) == 1
    assert "usage" in capsys.readouterr().err


def test_cli_missing_data_file(tmp_path, capsys):
    code = cli_main(["fit", "--data", str(tmp_path / "nope.csv"), "--label-col", "x"])
    assert code == 2
    assert "missing file" in capsys.readouterr().err


def test_cli_fit(iris_path, tmp_path, capsys):
    out = tmp_path / "centroids.csv"
    code = cli_main(
        ["fit", "--data", str(iris_path), "--label-col", "species", "--out", str(out)]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert text.startswith("config: command=fit")
    assert "training_accuracy=0.92666666666666664" in text
    assert text.count("centroid[") == 3
    assert load_centroids_csv(out).num_classes == 3


def test_cli_fit_embeddings_without_label_col(embeddings_path, capsys):
    assert cli_main(["fit", "--data", str(embeddings_path)]) == 0
    assert "classes=10" in capsys.readouterr().out


def test_cli_features_requires_label_col(embeddings_path, capsys):
    code = cli_main(["fit", "--data", str(embeddings_path), "--features", "e0,e1"])
    assert code == 1
    assert "--features requires --label-col" in capsys.readouterr().err


def test_cli_feature_subset(iris_path, capsys):
    code = cli_main(
        [
            "fit",
            "--data", str(iris_path),
            "--label-col", "species",
            "--features", "sepal_length,sepal_width",
        ]
    )
    assert code == 0
    assert "dim=2" in capsys.readouterr().out


def test_cli_query(iris_path, capsys):
    code = cli_main(
        [
            "query",
            "--data", str(iris_path),
            "--label-col", "species",
            "--goal-class", "1",
            "--base-class", "2",
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "base_prediction=2" in text
    assert "needs_flip=true" in text


def test_cli_query_class_alias(iris_path, capsys):
    code = cli_main(
        [
            "query",
            "--data", str(iris_path),
            "--label-col", "species",
            "--class-a", "1",
            "--class-b", "2",
        ]
    )
    assert code == 0
    assert "goal_class=1" in capsys.readouterr().out


def test_cli_recourse_deterministic_stdout(iris_path, capsys):
    argv = [
        "recourse",
        "--data", str(iris_path),
        "--label-col", "species",
        "--goal-class", "1",
        "--base-class", "2",
        "--kind", "collective",
        "--epsilon", "0.3",
        "--seed", "1",
    ]
    assert cli_main(argv) == 0
    first = capsys.readouterr().out
    assert cli_main(argv) == 0
    assert capsys.readouterr().out == first
    assert "achieved_loss=" in first
    assert "flipped=" in first


def test_cli_recourse_individual_writes_delta(iris_path, tmp_path, capsys):
    out = tmp_path / "delta.csv"
    argv = [
        "recourse",
        "--data", str(iris_path),
        "--label-col", "species",
        "--goal-class", "1",
        "--base-class", "2",
        "--kind", "individual",
        "--epsilon", "0.25",
        "--out", str(out),
    ]
    assert cli_main(argv) == 0
    capsys.readouterr()
    rows = np.loadtxt(out, delimiter=",", skiprows=1, ndmin=2)
    assert rows.shape == (1, 4)
    assert np.linalg.norm(rows[0]) <= 0.25 + 1e-9


def test_cli_recourse_negative_epsilon(iris_path, capsys):
    argv = [
        "recourse",
        "--data", str(iris_path),
        "--label-col", "species",
        "--goal-class", "1",
        "--base-class", "2",
        "--kind", "individual",
        "--epsilon", "-0.5",
    ]
    assert cli_main(argv) == 1
    assert "usage error" in capsys.readouterr().err


def test_cli_sweep_writes_report_and_plot(iris_path, tmp_path, capsys):
    out, plot = tmp_path / "report.csv", tmp_path / "plot.svg"
    argv = [
        "sweep",
        "--data", str(iris_path),
        "--label-col", "species",
        "--goal-class", "1",
        "--base-class", "2",
        "--eps-grid", "0:0.4:0.2",
        "--out", str(out),
        "--plot", str(plot),
    ]
    assert cli_main(argv) == 0
    capsys.readouterr()
    report = read_report_csv(out)
    assert report.epsilons() == [0.0, 0.2, 0.4]
    zero = report.rows[0]
    assert zero.individual_loss == zero.baseline_loss
    assert zero.collective_loss == zero.baseline_loss
    assert plot.read_text().startswith("<svg")


def test_cli_sweep_bad_grid(iris_path, capsys):
    argv = [
        "sweep",
        "--data", str(iris_path),
        "--label-col", "species",
        "--goal-class", "1",
        "--base-class", "2",
        "--eps-grid", "0:1",
        "--out", "/tmp/never.csv",
    ]
    assert cli_main(argv) == 1
    assert "usage error" in capsys.readouterr().err


def test_cli_sweep_standardize_and_sphere(iris_path, tmp_path, capsys):
    out = tmp_path / "report.csv"
    argv = [
        "sweep",
        "--data", str(iris_path),
        "--label-col", "species",
        "--goal-class", "1",
        "--base-class", "2",
        "--eps-grid", "0.2:0.4:0.2",
        "--mode", "sphere",
        "--standardize",
        "--steps", "50",
        "--out", str(out),
    ]
    assert cli_main(argv) == 0
    assert "standardize=true" in capsys.readouterr().out
    assert len(read_report_csv(out).rows) == 2
