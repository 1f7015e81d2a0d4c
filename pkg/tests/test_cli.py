import pytest

from dermforge.main import main

RUN_FILES = {
    "best.dfn", "final.dfn", "history.csv", "report.json", "report.txt", "roc.csv", "curves.svg", "roc.svg",
}


def data_args(blob_dir) -> list[str]:
    data_dir, metadata = blob_dir
    return ["--data-dir", str(data_dir), "--metadata", str(metadata)]


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "gradcheck" in capsys.readouterr().out


def test_analyze_dx(blob_dir, capsys):
    assert main(["analyze", *data_args(blob_dir)]) == 0
    assert "nv (Melanocytic nevi): 6 of 42 images (14.29%)" in capsys.readouterr().out


def test_analyze_rejects_unknown_facet(blob_dir):
    assert main(["analyze", *data_args(blob_dir), "--facet", "bogus"]) == 2


def test_analyze_into_missing_directory(blob_dir, tmp_path):
    target = tmp_path / "missing" / "dx.csv"
    assert main(["analyze", *data_args(blob_dir), "--out", str(target)]) == 1
    assert not target.exists()


@pytest.mark.parametrize("argv", [
    ["train", "--epochs", "0"],
    ["train", "--val-fraction", "1"],
    ["train", "--lr", "-1"],
    ["predict", "--checkpoint", "best.dfn"],
    ["gradcheck", "--layers", "lstm"],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_eval_missing_checkpoint(blob_dir, tmp_path):
    assert main(["eval", "--checkpoint", str(tmp_path / "nothing.dfn"), *data_args(blob_dir)]) == 1


def test_gradcheck_command(capsys):
    assert main(["gradcheck", "--layers", "dense"]) == 0
    assert "ok" in capsys.readouterr().out
    assert main(["gradcheck", "--layers", "softmax_cce", "--tolerance", "0"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_train_eval_predict(blob_dir, tmp_path, capsys):
    out = tmp_path / "run"
    argv = ["train", *data_args(blob_dir), "--epochs", "1", "--batch-size", "16", "--no-augment", "--out", str(out)]
    assert main(argv) == 0
    assert {p.name for p in out.iterdir()} >= RUN_FILES
    assert "best checkpoint (epoch 1)" in capsys.readouterr().out

    assert main(["eval", "--checkpoint", str(out / "best.dfn"), *data_args(blob_dir)]) == 0
    assert "loss" in capsys.readouterr().out

    image = blob_dir[0] / "ISIC_0000000.png"
    assert main(["predict", "--checkpoint", str(out / "best.dfn"), str(image)]) == 0
    path, code, _, probabilities = capsys.readouterr().out.strip().split("\t")
    assert path == str(image)
    values = dict(pair.split("=") for pair in probabilities.split())
    assert code in values
    assert sum(float(v) for v in values.values()) == pytest.approx(1.0, abs=1e-4)


def test_predict_reports_undecodable_images(blob_dir, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["train", *data_args(blob_dir), "--epochs", "1", "--batch-size", "32", "--no-augment",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    broken = tmp_path / "broken.jpg"
    broken.write_bytes(b"\xff\xd8 truncated")
    good = blob_dir[0] / "ISIC_0000001.png"
    assert main(["predict", "--checkpoint", str(out / "final.dfn"), str(good), str(broken)]) == 1
    captured = capsys.readouterr()
    assert captured.out.startswith(str(good))
    assert str(broken) in captured.err


@pytest.mark.slow
def test_training_is_reproducible(blob_dir, tmp_path):
    histories = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["train", *data_args(blob_dir), "--epochs", "2", "--batch-size", "16", "--out", str(out)]) == 0
        histories.append((out / "history.csv").read_bytes())
    assert histories[0] == histories[1]
