import dataclasses
import itertools

import numpy as np
import pytest

from eeg_probe.autodiff import Tape, Tensor, backward, finite_diff_check
from eeg_probe.encoder import EncoderParams, as_param_tensors, encode, init_params
from eeg_probe.errors import ConfigError, ContractError, TrainingError
from eeg_probe.metric_learning import AdamState, TrainConfig, TripletBatch, adam_step, class_balanced_batches, \
    mine_multisimilarity, train, train_step, triplet_loss
from eeg_probe.montage import load_builtin
from eeg_probe.preprocess import split_within
from eeg_probe.signal_io import synth_dataset


def unit_rows(x):
    x = np.asarray(x, dtype=np.float64)
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def triples(*abc) -> TripletBatch:
    a, p, n = zip(*abc)
    return TripletBatch(anchor=np.array(a), positive=np.array(p), negative=np.array(n))


def test_triplet_loss_examples():
    # a = p, |a - n|^2 = 1
    emb = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    assert triplet_loss(emb, triples((0, 1, 2)), margin=0.2).item() == 0.0
    # a = n, |a - p|^2 = 0.5
    emb = np.array([[0.0, 0.0], [0.5, 0.5], [0.0, 0.0]])
    assert triplet_loss(emb, triples((0, 1, 2)), margin=0.2).item() == pytest.approx(0.7)


def test_triplet_loss_empty_and_negative_margin(caplog):
    with caplog.at_level("WARNING"):
        assert triplet_loss(np.zeros((2, 2)), TripletBatch.empty()).item() == 0.0
    assert "empty triplet set" in caplog.text
    with pytest.raises(ContractError):
        triplet_loss(np.zeros((3, 2)), triples((0, 1, 2)), margin=-0.1)


def test_triplet_loss_rotation_invariant(rng):
    emb = unit_rows(rng.standard_normal((6, 5)))
    batch = triples((0, 1, 2), (3, 4, 5), (1, 0, 4))
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    assert triplet_loss(emb @ q, batch).item() == pytest.approx(triplet_loss(emb, batch).item(), abs=1e-12)


def test_triplet_loss_gradient(rng):
    emb = unit_rows(rng.standard_normal((6, 8)))
    batch = triples((0, 1, 2), (3, 4, 5), (1, 0, 4), (2, 5, 0))
    assert finite_diff_check(lambda t: triplet_loss(t, batch, margin=1.0), Tensor(emb)) < 1e-5


def test_mining_separated_classes_is_empty():
    emb = np.array([[1.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [-1.0, 0.0]])
    assert len(mine_multisimilarity(emb, np.array([0, 0, 1, 1]), epsilon=0.1)) == 0


def test_mining_single_class_is_empty(rng):
    assert len(mine_multisimilarity(unit_rows(rng.standard_normal((4, 3))), np.zeros(4))) == 0


def test_mining_picks_mixed_up_negative():
    emb = unit_rows([[1.0, 0.0], [0.0, 1.0], [0.9, 0.1], [-1.0, 0.0]])
    labels = np.array([0, 0, 1, 1])
    mined = mine_multisimilarity(emb, labels, epsilon=0.1)
    assert (0, 1, 2) in mined.as_set()
    assert (0, 1, 3) not in mined.as_set()


def test_mining_yields_valid_triples_deterministically(rng):
    emb = unit_rows(rng.standard_normal((24, 6)))
    labels = np.repeat(np.arange(4), 6)
    mined = mine_multisimilarity(emb, labels, epsilon=0.1, max_per_anchor=5)
    assert len(mined) > 0
    valid = {(a, p, n) for a, p, n in itertools.product(range(24), repeat=3)
             if a != p and labels[a] == labels[p] and labels[a] != labels[n]}
    assert mined.as_set() <= valid
    assert max(np.bincount(mined.anchor)) <= 5
    again = mine_multisimilarity(emb, labels, epsilon=0.1, max_per_anchor=5)
    np.testing.assert_array_equal(mined.anchor, again.anchor)
    np.testing.assert_array_equal(mined.negative, again.negative)


def test_adam_zero_grad_shrinks_by_weight_decay():
    p = {"w": np.array([2.0, -1.0])}
    lr, wd, eps = 0.1, 0.01, 1e-8
    new, state = adam_step(p, {"w": np.zeros(2)}, AdamState.zeros(p), lr=lr, weight_decay=wd, eps=eps)
    # coupled decay: the decay term passes through the moment normalization
    expected = p["w"] - lr * wd * p["w"] / (wd * np.abs(p["w"]) + eps)
    np.testing.assert_allclose(new["w"], expected, rtol=1e-12)
    assert state.step == 1
    np.testing.assert_array_equal(p["w"], [2.0, -1.0])


def test_adam_first_step_closed_form():
    p = {"w": np.array([1.0])}
    g = {"w": np.array([0.5])}
    new, state = adam_step(p, g, AdamState.zeros(p), lr=0.01)
    # m_hat = g, v_hat = g^2
    assert new["w"][0] == pytest.approx(1.0 - 0.01 * 0.5 / (0.5 + 1e-8), rel=1e-12)
    new2, _ = adam_step(new, g, state, lr=0.01)
    m = 0.9 * 0.05 + 0.1 * 0.5
    v = 0.999 * 0.00025 + 0.001 * 0.25
    step = 0.01 * (m / (1 - 0.81)) / (np.sqrt(v / (1 - 0.999 ** 2)) + 1e-8)
    assert new2["w"][0] == pytest.approx(new["w"][0] - step, rel=1e-12)


def test_class_balanced_batches():
    labels = np.repeat([0, 1, 2], [10, 3, 7])
    batches = class_balanced_batches(labels, 6, np.random.default_rng(0))
    assert len(batches) == 4
    for idx in batches:
        assert set(labels[idx].tolist()) == {0, 1, 2}
        assert len(idx) <= 6


def test_train_step_matches_finite_differences(rng, tiny_spec, tiny_encoder_config):
    segments = synth_dataset(tiny_spec)
    idx = np.array([0, 1, 5, 6, 10, 11])
    batch, labels = segments.segments[idx], segments.video_label[idx]
    params = init_params(tiny_encoder_config)
    config = TrainConfig(margin=1.0)
    loss, grads = train_step(params, batch, labels, config, tiny_encoder_config)
    assert loss is not None and np.isfinite(loss)
    # freeze the mined triples at the evaluation point
    mined = mine_multisimilarity(encode(batch, params, tiny_encoder_config), labels, config.ms_epsilon)
    fixed = as_param_tensors(params)

    def f(t):
        return triplet_loss(encode(batch, {**fixed, "conv_weight": t}, tiny_encoder_config), mined, config.margin)

    assert finite_diff_check(f, Tensor(params.conv_weight), max_coords=15) < 1e-4
    leaf = Tensor(params.conv_weight, requires_grad=True)
    with Tape() as tape:
        value = f(leaf)
    backward(value, tape)
    np.testing.assert_allclose(grads["conv_weight"], leaf.grad, rtol=1e-10, atol=1e-14)


def test_adam_steps_reduce_fixed_triplet_loss(tiny_spec, tiny_encoder_config):
    segments = synth_dataset(tiny_spec)
    batch, labels = segments.segments[:15], segments.video_label[:15]
    params = init_params(tiny_encoder_config)
    mined = mine_multisimilarity(encode(batch, params, tiny_encoder_config), labels)

    def loss_and_grads(p: EncoderParams):
        tensors = as_param_tensors(p, requires_grad=True)
        with Tape() as tape:
            loss = triplet_loss(encode(batch, tensors, tiny_encoder_config), mined, margin=1.0)
        backward(loss, tape)
        return loss.item(), {k: t.grad for k, t in tensors.items()}

    start, grads = loss_and_grads(params)
    state = AdamState.zeros(params.as_dict())
    for _ in range(5):
        new, state = adam_step(params.as_dict(), grads, state, lr=1e-4)
        params = EncoderParams.from_dict(new)
        current, grads = loss_and_grads(params)
    assert current < start


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(label_mode="subject").validate()
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=1).validate()


def test_train_rejects_single_class(tiny_spec, tiny_encoder_config, fast_train_config):
    segments = synth_dataset(tiny_spec)
    with pytest.raises(TrainingError):
        train(segments.subset(segments.video_label == 0), fast_train_config, tiny_encoder_config)
    with pytest.raises(TrainingError):
        train(segments.replace(split=np.full(len(segments), "test")), fast_train_config, tiny_encoder_config)


def test_train_is_deterministic(tiny_spec, tiny_encoder_config, fast_train_config):
    segments = split_within(synth_dataset(tiny_spec), seed=0)
    params_a, history_a = train(segments, fast_train_config, tiny_encoder_config)
    params_b, history_b = train(segments, fast_train_config, tiny_encoder_config)
    for name, value in params_a.as_dict().items():
        np.testing.assert_array_equal(value, params_b.as_dict()[name])
    frame = history_a.to_frame()
    assert list(frame.columns) == ["epoch", "mean_loss", "val_kmeans_acc", "skipped_steps"]
    assert len(frame) == fast_train_config.epochs
    assert np.all(np.isfinite(frame["mean_loss"]))
    assert frame.equals(history_b.to_frame())
    assert 1 <= history_a.best_epoch <= fast_train_config.epochs


def test_train_adapts_channels_to_region(tiny_spec, tiny_encoder_config, fast_train_config):
    tiny_spec.channels = 62
    tiny_spec.signal_indices = None
    tiny_spec.signal_region = "lobes_temporal_left"
    segments = split_within(synth_dataset(tiny_spec), seed=0)
    config = dataclasses.replace(fast_train_config, epochs=1)
    params, history = train(segments, config, tiny_encoder_config, montage=load_builtin("seed_v1"),
                            region="lobes_temporal_left")
    assert history.encoder_config.in_channels == 3
    assert params.conv_weight.shape[1] == 3
