import json
from os import path

import numpy as np
import pandas as pd
import pytest

from eeg_probe.main import main
from eeg_probe.video_metrics import write_clip

TINY_SPEC = ["n_subjects=2", "n_classes=3", "segments_per_class_per_subject=5", "channels=4", "signal_region=left",
             "class_freqs_hz=[6.0,12.0,18.0]", "snr_db=10.0"]
TINY_TRAIN = ["epochs=2", "batch_size=12", "kmeans_restarts=2"]
TINY_ENCODER = ["in_channels=4", "gat_dim=4", "conv_channels=2", "conv_stride=25"]
# noise-free synth spec and hand-checked expected outputs
GOLDEN_DIR = path.join(path.dirname(__file__), "fixtures", "golden")


@pytest.fixture
def workspace(tmp_path):
    cap = tmp_path / "cap.json"
    cap.write_text(json.dumps({"name": "cap", "n_channels": 4, "regions": {"all": [1, 2, 3, 4], "left": [1, 2],
                                                                           "right": [3, 4]}}))
    return tmp_path


@pytest.fixture
def split_segments(workspace):
    montage = str(workspace / "cap.json")
    segs, split = str(workspace / "segs"), str(workspace / "split")
    assert main(["synth", "--out", segs, "--set", f'montage={montage}', *TINY_SPEC]) == 0
    assert main(["split", "--segs", segs, "--out", split, "--seed", "0"]) == 0
    return split


@pytest.fixture
def model(workspace, split_segments):
    fn = str(workspace / "model.bin")
    argv = ["train", "--segs", split_segments, "--montage", str(workspace / "cap.json"), "--out", fn,
            "--history", str(workspace / "history.csv"), "--set", *TINY_TRAIN, "--encoder-set", *TINY_ENCODER]
    assert main(argv) == 0
    return fn


def read_json(fn):
    with open(fn, encoding="utf-8") as f:
        return json.load(f)


def test_synth_and_split_write_manifests(workspace, split_segments):
    manifest = read_json(path.join(split_segments, "run_manifest.json"))
    assert manifest["subcommand"] == "split"
    assert manifest["seeds"] == {"seed": 0}
    synth_manifest = read_json(str(workspace / "segs" / "run_manifest.json"))
    assert synth_manifest["config"]["n_classes"] == 3
    assert synth_manifest["argv"][0] == "synth"


def test_train_eval_embed_condition(workspace, split_segments, model):
    cap = str(workspace / "cap.json")
    manifest = read_json(model + ".manifest.json")
    assert manifest["config"]["encoder"]["in_channels"] == 4
    assert manifest["wall_clock_s"] >= 0.0
    assert len(pd.read_csv(workspace / "history.csv")) == 2

    result_fn = str(workspace / "kmeans.json")
    assert main(["eval", "kmeans", "--model", model, "--segs", split_segments, "--montage", cap, "--out",
                 result_fn]) == 0
    result = read_json(result_fn)
    assert result["k"] == 3
    assert 0.0 <= result["accuracy"] <= 1.0

    emb_fn = str(workspace / "emb.csv")
    assert main(["embed", "--model", model, "--segs", split_segments, "--montage", cap, "--out", emb_fn]) == 0
    emb = pd.read_csv(emb_fn)
    assert emb.shape == (30, 1027)

    cond_fn = str(workspace / "cond.csv")
    assert main(["condition", "--emb", emb_fn, "--frames", "2", "--out", cond_fn]) == 0
    cond = pd.read_csv(cond_fn)
    assert len(cond) == 60
    assert "c1044" in cond.columns


def test_eval_probe_and_features(workspace, split_segments, model, capsys):
    cap = str(workspace / "cap.json")
    assert main(["eval", "probe", "--model", model, "--segs", split_segments, "--montage", cap, "--epochs",
                 "20"]) == 0
    probe = json.loads(capsys.readouterr().out)
    assert probe["n_train"] == 24 and probe["n_test"] == 3
    assert main(["eval", "features", "--model", model, "--segs", split_segments, "--montage", cap, "--split",
                 "all", "--restarts", "2"]) == 0
    features = json.loads(capsys.readouterr().out)
    assert set(features["clustering"]) == {"video", "emotion", "subject"}


def test_timestep_ablation(workspace, split_segments, model):
    out = str(workspace / "timesteps.csv")
    assert main(["ablate", "timesteps", "--model", model, "--segs", split_segments, "--montage",
                 str(workspace / "cap.json"), "--windows", "100:300,0:400", "--out", out]) == 0
    report = pd.read_csv(out, dtype={"region": str})
    assert report["region"].tolist() == ["0:0", "100:300", "0:400"]
    # a fully masked batch embeds to identical rows: one cluster, one test segment per class
    assert report.set_index("region").loc["0:400", "accuracy"] == pytest.approx(1 / 3)
    assert read_json(str(workspace / "timesteps.json"))["kind"] == "timestep"


@pytest.mark.parametrize("windows", ["0:0", "300:100", "0:401"])
def test_timestep_ablation_rejects_windows(windows, workspace, split_segments, model, capsys):
    argv = ["ablate", "timesteps", "--model", model, "--segs", split_segments, "--montage",
            str(workspace / "cap.json"), "--windows", windows, "--out", str(workspace / "timesteps.csv")]
    assert main(argv) == 4
    assert "error=ContractError code=4" in capsys.readouterr().err
    assert not (workspace / "timesteps.csv").exists()


def test_region_ablation(workspace, split_segments):
    out = str(workspace / "regions.csv")
    argv = ["ablate", "regions", "--segs", split_segments, "--montage", str(workspace / "cap.json"), "--regions",
            "left,right", "--out", out, "--set", *TINY_TRAIN, "--encoder-set", *TINY_ENCODER]
    assert main(argv) == 0
    report = pd.read_csv(out)
    assert report["region"].tolist() == ["left", "right"]
    assert (report["chance"] == 1 / 3).all()


def test_training_is_reproducible(workspace, split_segments, model):
    again = str(workspace / "again.bin")
    argv = ["train", "--segs", split_segments, "--montage", str(workspace / "cap.json"), "--out", again,
            "--set", *TINY_TRAIN, "--encoder-set", *TINY_ENCODER]
    assert main(argv) == 0
    with open(model, "rb") as a, open(again, "rb") as b:
        assert a.read() == b.read()


def test_metrics(tmp_path, rng):
    clip = rng.integers(0, 256, size=(3, 16, 16)) / 255.0
    write_clip(str(tmp_path / "gt"), clip)
    write_clip(str(tmp_path / "gen"), clip)
    out = str(tmp_path / "metrics.json")
    assert main(["metrics", "--gt", str(tmp_path / "gt"), "--gen", str(tmp_path / "gen"), "--iterations", "10",
                 "--keyframes", "2", "--out", out]) == 0
    result = read_json(out)
    assert result["psnr"] == "inf"
    assert result["ssim"] == pytest.approx(1.0)
    assert result["keyframes_gt"] == result["keyframes_gen"]
    assert len(result["keyframes_gt"]) == 2


@pytest.mark.parametrize("argv, error, code", [
    (["split", "--segs", "{tmp}/missing", "--out", "{tmp}/out"], "FormatError", 3),
    (["split", "--segs", "{tmp}/same", "--out", "{tmp}/same"], "UsageError", 2),
    (["synth", "--out", "{tmp}/segs", "--set", "n_classes=0"], "ConfigError", 2),
    (["synth", "--out", "{tmp}/segs", "--set", "no_such_field=1"], "ConfigError", 2),
    (["metrics", "--gt", "{tmp}", "--gen", "{tmp}"], "FormatError", 3),
])
def test_errors(argv, error, code, tmp_path, capsys):
    assert main([a.replace("{tmp}", str(tmp_path)) for a in argv]) == code
    line = capsys.readouterr().err.strip().splitlines()[-1]
    assert line.startswith(f'error={error} code={code} message=')


def golden(name):
    return path.join(GOLDEN_DIR, name)


def test_golden_run(tmp_path):
    cap = golden("cap.json")
    segs, model_fn = str(tmp_path / "segs"), str(tmp_path / "model.bin")
    assert main(["synth", "--spec", golden("synth.yaml"), "--out", segs]) == 0
    assert main(["train", "--segs", segs, "--montage", cap, "--out", model_fn, "--seed", "0", "--set", *TINY_TRAIN,
                 "--encoder-set", *TINY_ENCODER]) == 0

    result_fn = str(tmp_path / "kmeans.json")
    assert main(["eval", "kmeans", "--model", model_fn, "--segs", segs, "--montage", cap, "--split", "all",
                 "--out", result_fn]) == 0
    result, expected = read_json(result_fn), read_json(golden("kmeans.json"))
    assert result.pop("accuracy") == pytest.approx(expected.pop("accuracy"), abs=0.02)
    assert result == expected

    # classes embed to three distinct points, masking 100:300 leaves identical all-zero segments and the
    # other windows only zero samples that are zero already
    report_fn = str(tmp_path / "timesteps.csv")
    assert main(["ablate", "timesteps", "--model", model_fn, "--segs", segs, "--montage", cap, "--split", "all",
                 "--windows", "0:100,100:300,300:400", "--out", report_fn]) == 0
    with open(report_fn, "rb") as a, open(golden("timesteps.csv"), "rb") as b:
        assert a.read() == b.read()


def test_golden_conditioning(tmp_path):
    out = str(tmp_path / "cond.csv")
    assert main(["condition", "--emb", golden("embeddings.csv"), "--frames", "1", "--enc-dim", "1", "--out",
                 out]) == 0
    with open(out, "rb") as a, open(golden("conditioning.csv"), "rb") as b:
        assert a.read() == b.read()


def test_region_mismatch(workspace, split_segments, model, capsys):
    assert main(["eval", "kmeans", "--model", model, "--segs", split_segments, "--montage", "seed_v1"]) == 3
    assert "error=MontageError code=3" in capsys.readouterr().err


@pytest.mark.slow
def test_planted_pipeline(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["run", "eeg_probe.pipelines.planted", "--persist_cache", "--cache_dir", "cache"]) == 0
    assert list((tmp_path / "cache").glob("*.pkl"))
    out_dir = tmp_path / "results" / "planted"

    def accuracies(name):
        frame = pd.read_csv(out_dir / f'{name}.csv', dtype={"region": str})
        assert (frame["chance"] == 0.2).all()
        return dict(zip(frame["region"], frame["accuracy"]))

    history = pd.read_csv(out_dir / "history.csv")
    assert np.isfinite(history["mean_loss"]).all()
    assert history["val_kmeans_acc"].max() >= 0.9

    # untrained features cluster by subject, trained ones by class
    features = pd.read_csv(out_dir / "features.csv").set_index(["encoder", "labels"])
    untrained_subject = features.loc[("untrained", "subject")]
    assert untrained_subject["accuracy"] > 2 * untrained_subject["chance"]
    trained_subject = features.loc[("trained", "subject")]
    assert trained_subject["accuracy"] < 1.5 * trained_subject["chance"]
    assert features.loc[("trained", "video"), "accuracy"] >= 0.9

    timesteps = accuracies("timesteps")
    assert list(timesteps) == ["0:0", "0:100", "100:300", "300:400"]
    baseline = timesteps["0:0"]
    assert baseline >= 0.9
    assert baseline - timesteps["100:300"] >= 0.3
    assert baseline - timesteps["0:100"] < 0.1

    # the class signal only lives on the left channels
    regions = accuracies("regions")
    assert list(regions) == ["noseback_left", "noseback_right"]
    assert regions["noseback_left"] - regions["noseback_right"] >= 0.2

    leave_two = accuracies("leave_two")["all"]
    assert 0.2 < leave_two < baseline
