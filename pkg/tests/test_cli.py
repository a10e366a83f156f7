import json
import zipfile

import pandas as pd
import pytest

from cli.config import apply_overrides, build_run_config, load_run_config
from cli.main import main
from core.errors import ConfigError
from data.archive import MANIFEST, load_feature_archive, write_feature_archive
from tests.helpers import make_dataset

RUN = {
    "model": {"hidden_dims": {"t": 8, "a": 4, "v": 4}},
    "train": {"batch_size": 8, "max_epochs": 2, "early_stop_patience": 3},
}


@pytest.fixture(scope="module")
def archive(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.zip"
    assert main(["synth", "--out", str(path), "--n-labeled", "40", "--n-unlabeled", "20", "--seed", "3"]) == 0
    return path


def _write_config(directory, archive, **extra):
    data = dict(RUN, archive=str(archive), output_dir=str(directory / "run"))
    data.update(extra)
    path = directory / "run.json"
    path.write_text(json.dumps(data))
    return path


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory, archive):
    directory = tmp_path_factory.mktemp("train")
    config = _write_config(directory, archive)
    assert main(["train", "--config", str(config), "--semi", "--seed", "42"]) == 0
    return directory / "run"


# --- config ---

def test_overrides_are_dotted_json():
    data = apply_overrides({"train": {"batch_size": 4}}, ["train.batch_size=16", "train.mode=semi",
                                                          "model.hidden_dims.t=8"])
    assert data == {"train": {"batch_size": 16, "mode": "semi"}, "model": {"hidden_dims": {"t": 8}}}


@pytest.mark.parametrize("data, key", [
    ({"archive": "a.zip", "trian": {}}, "trian"),
    ({"archive": "a.zip", "train": {"batchsize": 4}}, "train.batchsize"),
    ({"archive": "a.zip", "train": {"loss_weights": {"beta": {"t": 1}}}}, "train.loss_weights.beta.t"),
    ({"archive": "a.zip", "model": {"dropout": 2}}, "model.dropout"),
    ({"train": {}}, "archive"),
])
def test_config_errors_name_the_key(data, key):
    with pytest.raises(ConfigError, match=key):
        build_run_config(data)


def test_load_run_config(tmp_path):
    path = _write_config(tmp_path, "toy.zip", seed=7)
    config = load_run_config(str(path), ["train.mode=semi"])
    assert config.seed == 7 and config.train.mode == "semi"
    assert config.model.hidden_dims == {"t": 8, "a": 4, "v": 4}


def test_single_hidden_dim_override(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"archive": "toy.zip"}))
    config = load_run_config(str(path), ["model.hidden_dims.t=16"])
    assert config.model.hidden_dims == {"t": 16, "a": 32, "v": 64}


# --- synth ---

def test_synth_counts(tmp_path):
    path = tmp_path / "toy.zip"
    assert main(["synth", "--out", str(path), "--n-labeled", "300", "--n-unlabeled", "600", "--seed", "1"]) == 0
    dataset = load_feature_archive(str(path))
    assert len(dataset) == 900
    assert dataset.stats.n_unsupervised == 600


def test_synth_is_deterministic(tmp_path):
    a, b = tmp_path / "a.zip", tmp_path / "b.zip"
    for path in (a, b):
        assert main(["synth", "--out", str(path), "--n-labeled", "10", "--n-unlabeled", "5", "--seed", "9"]) == 0
    with zipfile.ZipFile(a) as za, zipfile.ZipFile(b) as zb:
        assert za.read(MANIFEST) == zb.read(MANIFEST)
    assert a.read_bytes() == b.read_bytes()


# --- aggregate ---

def test_aggregate(tmp_path, capsys):
    src, out = tmp_path / "scores.csv", tmp_path / "labels.csv"
    src.write_text("x,0,0,0,0,0,0,0\ny,3,3,3,3,3,3,3\nz,2,2,2,2,2,1,3\n")
    assert main(["aggregate", str(src), str(out)]) == 0
    assert out.read_text().splitlines() == ["id,label", "x,0.0", "y,1.0", "z,0.6"]


def test_aggregate_malformed_row(tmp_path, capsys):
    src, out = tmp_path / "scores.csv", tmp_path / "labels.csv"
    src.write_text("x,0,0,0,0,0,0,0\ny,0,0,0\n")
    assert main(["aggregate", str(src), str(out)]) == 2
    assert "row 2" in capsys.readouterr().err
    assert not out.exists()


# --- train ---

def test_train_writes_run_directory(trained_run):
    for name in ("best.ckpt", "last.ckpt", "history.jsonl", "report.json", "run_config.json"):
        assert (trained_run / name).exists()
    report = json.loads((trained_run / "report.json").read_text())
    assert report[0]["task"] == "multimodal"
    assert json.loads((trained_run / "run_config.json").read_text())["train"]["mode"] == "semi"


def test_train_replay_gives_same_validation_mae(tmp_path, archive, trained_run):
    config = _write_config(tmp_path, archive)
    assert main(["train", "--config", str(config), "--semi", "--seed", "42"]) == 0
    first = json.loads((trained_run / "report.json").read_text())[0]["mae"]
    second = json.loads((tmp_path / "run" / "report.json").read_text())[0]["mae"]
    assert abs(first - second) < 1e-6


def test_train_ablation_forces_beta(tmp_path, archive):
    config = _write_config(tmp_path, archive)
    assert main(["train", "--config", str(config), "--ablate", "mixup-a", "--set", "train.max_epochs=1"]) == 0
    run_config = json.loads((tmp_path / "run" / "run_config.json").read_text())
    assert run_config["train"]["loss_weights"]["beta"] == {"a": 0.0, "v": 1.0}
    assert run_config["train"]["max_epochs"] == 1


def test_train_config_error_exit_code(tmp_path, archive, capsys):
    config = _write_config(tmp_path, archive)
    assert main(["train", "--config", str(config), "--set", "train.learning_rate=0.1"]) == 1
    assert "train.learning_rate" in capsys.readouterr().err
    assert not (tmp_path / "run").exists()


def test_train_missing_archive(tmp_path):
    config = _write_config(tmp_path, tmp_path / "missing.zip")
    assert main(["train", "--config", str(config)]) == 2


def test_usage_error():
    assert main(["train"]) == 1
    assert main(["frobnicate"]) == 1


# --- eval / predict / stats / compare ---

def test_eval_unimodal_reports(tmp_path, archive, trained_run, capsys):
    out = tmp_path / "eval.json"
    code = main(["eval", "--checkpoint", str(trained_run / "best.ckpt"), "--archive", str(archive),
                 "--split", "test", "--tasks", "t,a,v", "--label-source", "unimodal", "--out", str(out)])
    assert code == 0
    reports = json.loads(out.read_text())
    assert [r["task"] for r in reports] == ["text", "acoustic", "visual"]
    assert all(r["label_source"] == "unimodal" for r in reports)
    assert len(capsys.readouterr().out.strip().splitlines()) == 3


def test_eval_unknown_split(tmp_path, archive, trained_run):
    out = tmp_path / "eval.json"
    code = main(["eval", "--checkpoint", str(trained_run / "best.ckpt"), "--archive", str(archive),
                 "--split", "dev", "--out", str(out)])
    assert code == 2
    assert not out.exists()


def test_eval_multimodal_task_with_unimodal_labels(tmp_path, archive, trained_run, capsys):
    out = tmp_path / "eval.json"
    code = main(["eval", "--checkpoint", str(trained_run / "best.ckpt"), "--archive", str(archive),
                 "--tasks", "m", "--label-source", "unimodal", "--out", str(out)])
    assert code == 2
    assert "nothing to evaluate" in capsys.readouterr().err
    assert not out.exists()


def test_eval_spec_mismatch_names_modality(tmp_path, trained_run, capsys):
    other = tmp_path / "tiny.zip"
    write_feature_archive(make_dataset(n_train=2, n_test=2), str(other))
    code = main(["eval", "--checkpoint", str(trained_run / "best.ckpt"), "--archive", str(other),
                 "--out", str(tmp_path / "eval.json")])
    assert code == 2
    assert "text" in capsys.readouterr().err


def test_predict_writes_csv(tmp_path, archive, trained_run):
    out = tmp_path / "pred.csv"
    code = main(["predict", "--checkpoint", str(trained_run / "best.ckpt"), "--archive", str(archive),
                 "--split", "test", "--out", str(out)])
    assert code == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["id", "prediction", "label"]
    assert len(frame) == load_feature_archive(str(archive)).stats.per_split["test"]


def test_stats(tmp_path, archive, capsys):
    out = tmp_path / "stats.csv"
    assert main(["stats", "--archive", str(archive), "--out", str(out)]) == 0
    table = pd.read_csv(out)
    assert list(table["split"]) == ["train", "valid", "test", "all"]
    assert table.loc[table["split"] == "all", "Total"].item() == 40
    assert "unlabeled: 20" in capsys.readouterr().out


def test_compare(tmp_path, archive):
    config = _write_config(tmp_path, archive)
    out = tmp_path / "compare.csv"
    code = main(["compare", "--config", str(config), "--set", "train.max_epochs=1",
                 "--variants", "av-mc,w/o mixup-av", "--seeds", "0,1", "--out", str(out)])
    assert code == 0
    results = pd.read_csv(out)
    assert len(results) == 4
    assert set(results["variant"]) == {"av-mc", "w/o mixup-av"}


def test_compare_unknown_variant(tmp_path, archive):
    config = _write_config(tmp_path, archive)
    assert main(["compare", "--config", str(config), "--variants", "nope", "--out", str(tmp_path / "c.csv")]) == 1
