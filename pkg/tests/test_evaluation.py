import itertools
import json
from os import path

import numpy as np
import pandas as pd
import pytest

from eeg_probe.encoder import init_params
from eeg_probe.errors import ContractError, DataError, DimensionError, FormatError, MontageError
from eeg_probe.evaluation import AblationReport, AblationRow, cluster_accuracy, contingency_matrix, \
    export_embeddings, feature_space_probe, kmeans, linear_probe, parse_window, read_embeddings, region_ablation, \
    timestep_ablation, window_label, write_frame
from eeg_probe.montage import load_builtin
from eeg_probe.preprocess import split_within
from eeg_probe.signal_io import SegmentSet, synth_dataset

GOLDEN_DIR = path.join(path.dirname(__file__), "fixtures", "golden")


def blobs(rng, centers, n_per, spread):
    centers = np.asarray(centers, dtype=np.float64)
    points = np.concatenate([c + spread * rng.standard_normal((n_per, len(c))) for c in centers])
    return points, np.repeat(np.arange(len(centers)), n_per)


def test_kmeans_single_cluster_is_the_mean(rng):
    x = rng.standard_normal((20, 3))
    result = kmeans(x, 1, restarts=2)
    np.testing.assert_allclose(result.centroids[0], x.mean(axis=0), atol=1e-12)
    assert result.inertia == pytest.approx(((x - x.mean(axis=0)) ** 2).sum())
    np.testing.assert_array_equal(result.assignments, 0)


def test_kmeans_separated_blobs(rng):
    x, labels = blobs(rng, [[0, 0], [10, 0], [0, 10]], 15, 0.3)
    result = kmeans(x, 3, seed=1)
    assert cluster_accuracy(result.assignments, labels) == 1.0
    assert len(np.unique(result.assignments)) == 3


def test_kmeans_inertia_is_consistent(rng):
    x = rng.standard_normal((60, 4))
    result = kmeans(x, 5, restarts=3, seed=2)
    recomputed = ((x - result.centroids[result.assignments]) ** 2).sum()
    assert result.inertia == pytest.approx(recomputed, rel=1e-9)
    assert result.n_iter >= 1


def test_kmeans_finds_exhaustive_optimum(rng):
    x, _ = blobs(rng, [[0, 0], [5, 5]], 4, 0.5)
    best = np.inf
    for bits in itertools.product([0, 1], repeat=len(x)):
        bits = np.array(bits)
        if bits.min() == bits.max():
            continue
        best = min(best, sum(((x[bits == c] - x[bits == c].mean(axis=0)) ** 2).sum() for c in (0, 1)))
    assert kmeans(x, 2, seed=0).inertia == pytest.approx(best, rel=1e-9)


def test_kmeans_is_deterministic(rng):
    x = rng.standard_normal((40, 3))
    a, b = kmeans(x, 4, seed=7), kmeans(x, 4, seed=7)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    assert a.inertia == b.inertia


def test_kmeans_rejects_bad_k(rng):
    with pytest.raises(DimensionError):
        kmeans(rng.standard_normal((3, 2)), 4)
    with pytest.raises(DimensionError):
        kmeans(rng.standard_normal(5), 1)


@pytest.mark.parametrize("x, k", [(np.zeros((6, 4)), 3), (np.tile(np.eye(8)[2], (20, 1)), 5)])
def test_kmeans_duplicate_points(x, k):
    result = kmeans(x, k, restarts=3)
    assert result.inertia == 0.0
    np.testing.assert_array_equal(result.centroids, np.broadcast_to(x[0], result.centroids.shape))
    assert cluster_accuracy(result.assignments, np.arange(len(x)) % k) == pytest.approx(1 / k)


def test_kmeans_more_clusters_than_distinct_points():
    x = np.concatenate([np.zeros((5, 2)), np.ones((1, 2))])
    result = kmeans(x, 3, restarts=4, seed=3)
    assert result.inertia == 0.0
    assert np.all(np.isfinite(result.centroids))
    assert result.assignments[-1] != result.assignments[0]


def test_cluster_accuracy_examples():
    assert cluster_accuracy([2, 2, 0, 0, 1, 1], [0, 0, 1, 1, 2, 2]) == 1.0
    assert cluster_accuracy([0, 0, 0, 1], [0, 0, 1, 1]) == 0.75
    with pytest.raises(DimensionError):
        cluster_accuracy([0, 1], [0])


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 7])
def test_hungarian_matches_brute_force(k):
    rng = np.random.default_rng(k)
    n = 8 * k
    assignments = np.concatenate([np.arange(k), rng.integers(k, size=n - k)])
    labels = np.concatenate([rng.permutation(k), rng.integers(k, size=n - k)])
    matrix = contingency_matrix(assignments, labels)
    brute = max(matrix[np.arange(k), list(perm)].sum() for perm in itertools.permutations(range(k)))
    assert cluster_accuracy(assignments, labels) == pytest.approx(brute / n)


def test_cluster_accuracy_relabel_invariant(rng):
    assignments = rng.integers(5, size=50)
    labels = rng.integers(5, size=50)
    base = cluster_accuracy(assignments, labels)
    assert cluster_accuracy(rng.permutation(5)[assignments], labels) == base
    assert cluster_accuracy(assignments, 10 + rng.permutation(5)[labels]) == base


@pytest.mark.parametrize("k", [3, 13, 15, 40])
def test_random_labels_sit_at_chance(k):
    rng = np.random.default_rng(k)
    n = 40000
    accuracy = cluster_accuracy(rng.integers(k, size=n), rng.integers(k, size=n))
    # the best matching never falls below the mean over all matchings; its excess shrinks as 1/sqrt(n)
    assert accuracy >= 1.0 / k - 1e-12
    assert accuracy <= 1.0 / k + 4.0 / np.sqrt(n)


def test_linear_probe_separable(rng):
    train_x, train_y = blobs(rng, [[3, 0, 0, 0, 0], [-3, 0, 0, 0, 0]], 20, 0.3)
    test_x, test_y = blobs(rng, [[3, 0, 0, 0, 0], [-3, 0, 0, 0, 0]], 10, 0.3)
    assert linear_probe(train_x, train_y + 4, test_x, test_y + 4) == 1.0


def subject_dominated(rng, n_per):
    # three classes on small separated centers, two subjects far apart along another axis
    classes = np.repeat(np.arange(3), 2 * n_per)
    subjects = np.tile(np.repeat([-1.0, 1.0], n_per), 3)
    emb = 0.3 * rng.standard_normal((len(classes), 6))
    emb[np.arange(len(classes)), classes] += 2.0
    emb[:, 4] += 6.0 * subjects
    return emb, classes


def test_linear_classifier_beats_kmeans_on_frozen_embeddings(rng):
    train_x, train_y = subject_dominated(rng, 20)
    test_x, test_y = subject_dominated(rng, 10)
    linear_accuracy = linear_probe(train_x, train_y, test_x, test_y)
    kmeans_accuracy = cluster_accuracy(kmeans(test_x, 3).assignments, test_y)
    assert linear_accuracy >= 0.9
    assert linear_accuracy >= kmeans_accuracy


def test_linear_classifier_shuffled_labels_sit_at_chance(rng):
    train_x, train_y = subject_dominated(rng, 50)
    test_x, test_y = subject_dominated(rng, 50)
    accuracy = linear_probe(train_x, rng.permutation(train_y), test_x, rng.permutation(test_y))
    assert abs(accuracy - 1 / 3) <= 3 / np.sqrt(len(test_y))


def test_linear_probe_errors(rng):
    x = rng.standard_normal((6, 3))
    with pytest.raises(DataError):
        linear_probe(x, np.zeros(6), x, np.zeros(6))
    with pytest.raises(DimensionError):
        linear_probe(x, np.arange(6) % 2, x[:, :2], np.arange(6) % 2)


def test_feature_space_probe(tiny_spec, rng):
    segments = synth_dataset(tiny_spec)
    emb = rng.standard_normal((len(segments), 8))
    result = feature_space_probe(emb, segments, restarts=2)
    assert list(result) == ["video", "emotion", "subject"]
    for accuracy, chance in result.values():
        assert 0.0 <= accuracy <= 1.0
    assert result["video"][1] == pytest.approx(1 / 3)
    assert result["subject"][1] == 0.5
    with pytest.raises(DimensionError):
        feature_space_probe(emb[:3], segments)


def test_feature_space_probe_without_emotion(tiny_spec, rng):
    tiny_spec.emotion_classes = 0
    segments = synth_dataset(tiny_spec)
    assert list(feature_space_probe(rng.standard_normal((len(segments), 4)), segments, restarts=1)) == \
        ["video", "subject"]


def test_feature_clustering_golden_embeddings():
    emb, labels = read_embeddings(path.join(GOLDEN_DIR, "embeddings.csv"))
    segments = SegmentSet(segments=np.zeros((len(emb), 1, 400)), split=["train"] * len(emb), **labels)
    with open(path.join(GOLDEN_DIR, "embedding_clusters.json")) as f:
        expected = json.load(f)
    result = feature_space_probe(emb, segments)
    assert list(result) == list(expected)
    for kind, accuracy in expected.items():
        assert result[kind][0] == pytest.approx(accuracy, abs=0.02)


def test_export_embeddings(tmp_path, rng):
    emb = rng.standard_normal((5, 1024))
    emb /= np.linalg.norm(emb, axis=1, keepdims=True)
    fn = str(tmp_path / "emb.csv")
    export_embeddings(emb, np.arange(5), np.zeros(5), np.full(5, 3), fn)
    frame = pd.read_csv(fn)
    assert frame.shape == (5, 1027)
    assert list(frame.columns[:2]) == ["f0", "f1"]
    assert list(frame.columns[-3:]) == ["video_label", "emotion_label", "subject_id"]
    loaded, labels = read_embeddings(fn)
    np.testing.assert_allclose(loaded, emb, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(labels["subject_id"], 3)


def test_write_frame_keeps_full_precision(tmp_path, caplog):
    frame = pd.DataFrame({"x": [0.1 + 0.2, 1 / 3], "n": [1, 2]})
    fn = str(tmp_path / "frame.csv")
    with caplog.at_level("INFO"):
        write_frame(frame, fn, what="values")
    assert "wrote 2 values to" in caplog.text
    loaded = pd.read_csv(fn, float_precision="round_trip")
    assert list(loaded.columns) == ["x", "n"]
    assert loaded["x"].tolist() == [0.1 + 0.2, 1 / 3]


def test_export_errors(tmp_path, rng):
    with pytest.raises(DimensionError):
        export_embeddings(rng.standard_normal((3, 4)), np.arange(2), np.arange(3), np.arange(3),
                          str(tmp_path / "x.csv"))
    with pytest.raises(FormatError):
        read_embeddings(str(tmp_path / "missing.csv"))


def test_ablation_report_files(tmp_path):
    report = AblationReport(kind="region", rows=[
        AblationRow(region="all", regime="all_subject", accuracy=0.8125, n_test=16, chance=1 / 3),
        AblationRow(region="lobes_frontal", regime="all_subject", accuracy=0.1 + 0.2, n_test=16, chance=1 / 3),
    ])
    assert report.accuracy("lobes_frontal") == 0.1 + 0.2
    with pytest.raises(KeyError):
        report.accuracy("nope")
    csv_fn, json_fn = str(tmp_path / "r.csv"), str(tmp_path / "r.json")
    report.to_csv(csv_fn)
    assert list(pd.read_csv(csv_fn).columns) == ["region", "regime", "accuracy", "n_test", "chance"]
    assert AblationReport.from_csv(csv_fn, "region").rows == report.rows
    report.to_json(json_fn)
    with open(json_fn, encoding="utf-8") as f:
        data = json.load(f)
    assert data["kind"] == "region"
    assert data["rows"][0]["n_test"] == 16
    with pytest.raises(ContractError):
        AblationReport(kind="channels")


def test_windows():
    assert parse_window("100:300") == (100, 300)
    assert window_label((0, 0)) == "0:0"
    with pytest.raises(ContractError):
        parse_window("100-300")


def test_timestep_ablation(tiny_spec, tiny_encoder_config):
    segments = synth_dataset(tiny_spec)
    params = init_params(tiny_encoder_config)
    report = timestep_ablation(params, tiny_encoder_config, segments, [(100, 300), (0, 400)], restarts=2)
    assert [row.region for row in report.rows] == ["0:0", "100:300", "0:400"]
    assert all(row.n_test == len(segments) and row.chance == pytest.approx(1 / 3) for row in report.rows)
    parallel = timestep_ablation(params, tiny_encoder_config, segments, [(100, 300), (0, 400)], restarts=2,
                                 n_jobs=2)
    assert parallel.rows == report.rows


def test_timestep_ablation_full_mask_is_chance(tiny_spec, tiny_encoder_config, rng):
    segments = synth_dataset(tiny_spec)
    params = init_params(tiny_encoder_config)
    params.conv_bias = rng.standard_normal(params.conv_bias.shape)
    params.linear_bias = rng.standard_normal(params.linear_bias.shape)
    report = timestep_ablation(params, tiny_encoder_config, segments, [(0, 400)], restarts=3)
    # identical embeddings end up in a single cluster
    assert report.accuracy("0:400") == pytest.approx(1 / 3)


@pytest.mark.parametrize("window", [(0, 0), (300, 100), (0, 401), (-1, 10)])
def test_timestep_ablation_rejects_bad_windows(window, tiny_spec, tiny_encoder_config):
    with pytest.raises(ContractError):
        timestep_ablation(init_params(tiny_encoder_config), tiny_encoder_config, synth_dataset(tiny_spec),
                          [window])


def test_timestep_ablation_rejects_unknown_regime(tiny_spec, tiny_encoder_config):
    with pytest.raises(ContractError):
        timestep_ablation(init_params(tiny_encoder_config), tiny_encoder_config, synth_dataset(tiny_spec),
                          [(0, 100)], regime="cross_site")


def test_region_ablation(tiny_spec, tiny_encoder_config, fast_train_config):
    tiny_spec.channels = 62
    tiny_spec.signal_indices = None
    tiny_spec.signal_region = "lobes_temporal_left"
    segments = split_within(synth_dataset(tiny_spec), seed=0)
    montage = load_builtin("seed_v1")
    report = region_ablation(segments, montage, "all_subject", fast_train_config, tiny_encoder_config,
                             regions=["lobes_temporal_left"])
    (row,) = report.rows
    assert row.region == "lobes_temporal_left"
    assert row.n_test == segments.split_counts()["test"]
    assert 0.0 <= row.accuracy <= 1.0


def test_region_ablation_rejects_unknown_keys(tiny_spec, tiny_encoder_config, fast_train_config):
    segments = split_within(synth_dataset(tiny_spec), seed=0)
    with pytest.raises(MontageError):
        region_ablation(segments, load_builtin("seed_v1"), "all_subject", fast_train_config, tiny_encoder_config,
                        regions=["lobes_nowhere"])
    with pytest.raises(ContractError):
        region_ablation(segments, load_builtin("seed_v1"), "sometimes", fast_train_config, tiny_encoder_config)
