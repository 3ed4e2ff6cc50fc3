"""Model-level surrogate tests: contracts, training behavior, checkpoints."""

import numpy as np
import pytest

from qsurrogate import datagen, surrogate
from qsurrogate.codec import FeatureKind
from qsurrogate.datagen import CircuitFamily, DatasetRecord
from qsurrogate.surrogate import (
    EncoderDecoderRegressor,
    ModelConfig,
    SurrogateModel,
    TrainingDiverged,
    grad_check,
    load_model,
    save_model,
    train,
)
from qsurrogate.surrogate.training import forward, predict, predict_batch

TINY = dict(d_model=16, n_heads=2, n_encoder_layers=1, n_decoder_layers=1, d_ff=24)


def _fresh_model(input_len=3, output_len=4, seed=0, **overrides):
    cfg = ModelConfig(input_len=input_len, output_len=output_len, seed=seed, **{**TINY, **overrides})
    net = EncoderDecoderRegressor(cfg, np.random.default_rng(cfg.seed))
    return SurrogateModel(
        config=cfg,
        net=net,
        family="ONE_Q",
        target_kind=FeatureKind.STATE_1Q,
        input_mean=np.zeros(input_len),
        input_scale=np.ones(input_len),
        target_mean=np.zeros(output_len),
        target_scale=np.ones(output_len),
    )


def _constant_records(n, x, y):
    return [DatasetRecord(family="ONE_Q", seed=i, input=np.asarray(x, float), target=np.asarray(y, float)) for i in range(n)]


class TestForwardContract:
    def test_output_length_matches_config(self):
        model = _fresh_model(input_len=3, output_len=4)
        out = forward(model, [0.1, 0.2, 0.3])
        assert out.shape == (4,)

    def test_two_qubit_noisy_shape(self):
        model = _fresh_model(input_len=12, output_len=16)
        assert forward(model, np.zeros(12)).shape == (16,)

    def test_teacher_equals_autoregressive_on_own_outputs(self):
        model = _fresh_model(seed=5)
        x = np.array([0.3, -0.7, 1.1])
        free = forward(model, x)
        forced = forward(model, x, teacher_targets=free)
        np.testing.assert_array_equal(free, forced)

    def test_length_mismatch_rejected(self):
        model = _fresh_model()
        with pytest.raises(ValueError):
            forward(model, [1.0, 2.0])
        with pytest.raises(ValueError):
            forward(model, [1.0, 2.0, 3.0], teacher_targets=[1.0])

    def test_attention_rows_sum_to_one(self):
        model = _fresh_model()
        forward(model, [0.5, 0.5, 0.5])
        for probs in model.net.attention_maps():
            sums = probs.sum(axis=-1)
            np.testing.assert_allclose(sums, np.ones_like(sums), atol=1e-6)

    def test_predict_wraps_family_kind(self):
        model = _fresh_model()
        fv = predict(model, [0.0, 0.0, 0.0])
        assert fv.kind is FeatureKind.STATE_1Q
        assert fv.values.shape == (4,)

    def test_predict_batch_matches_single(self):
        model = _fresh_model(seed=9)
        xs = np.array([[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]])
        batch = predict_batch(model, xs)
        for i, x in enumerate(xs):
            np.testing.assert_array_equal(batch[i], forward(model, x))


class TestTraining:
    def test_memorizes_identical_records(self):
        x, y = [0.4, 1.2, -0.3], [0.1, 0.9, -0.2, 0.5]
        records = _constant_records(10, x, y)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=150, learning_rate=3e-3, batch_size=10, seed=1, **TINY)
        model, report = train(records, cfg, target_kind=FeatureKind.STATE_1Q)
        out = forward(model, x, teacher_targets=y)
        assert float(np.mean((out - np.asarray(y)) ** 2)) < 1e-3

    def test_loss_sequence_sane(self):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 300, master_seed=3)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=12, seed=2, **TINY)
        model, report = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
        vals = [v for _, v in report.epochs]
        assert all(np.isfinite(v) for v in vals)
        assert vals[-1] <= vals[0]

    def test_empty_dataset_rejected(self):
        cfg = ModelConfig(input_len=3, output_len=4, **TINY)
        with pytest.raises(ValueError):
            train([], cfg)

    def test_divergence_reports_epoch(self):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 64, master_seed=4)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=30, learning_rate=1e200, seed=0, **TINY)
        with np.errstate(all="ignore"):
            with pytest.raises(TrainingDiverged) as err:
                train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
        assert err.value.epoch >= 0

    def test_bit_reproducible_for_fixed_seed(self):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 200, master_seed=5)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=4, seed=7, **TINY)
        m1, _ = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
        m2, _ = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
        for (n1, p1, _), (n2, p2, _) in zip(m1.net.tensors(), m2.net.tensors()):
            assert n1 == n2
            np.testing.assert_array_equal(p1, p2)

    def test_data_parallel_mode_is_deterministic(self):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 200, master_seed=6)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=3, seed=7, batch_size=64, **TINY)
        m1, _ = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q, n_workers=2)
        m2, _ = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q, n_workers=2)
        for (_, p1, _), (_, p2, _) in zip(m1.net.tensors(), m2.net.tensors()):
            np.testing.assert_array_equal(p1, p2)

    def test_normalization_round_trip(self):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 100, master_seed=8)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=1, seed=0, **TINY)
        model, _ = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
        rng = np.random.default_rng(0)
        y = rng.normal(size=(5, 4))
        np.testing.assert_allclose(model.denormalize_output(model.normalize_target(y)), y, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 20, master_seed=9)
        cfg = ModelConfig(input_len=5, output_len=4, **TINY)
        with pytest.raises(ValueError):
            train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)


class TestGradCheck:
    def test_fresh_model_passes(self):
        model = _fresh_model(seed=11)
        rng = np.random.default_rng(1)
        err = grad_check(model, (rng.normal(size=3), rng.normal(size=4)), fraction=0.05)
        assert err <= 1e-4

    def test_zero_loss_on_self_targets(self):
        model = _fresh_model(seed=12)
        x = np.array([0.2, -0.4, 0.9])
        own = forward(model, x)
        again = forward(model, x, teacher_targets=own)
        assert float(np.mean((again - own) ** 2)) == 0.0

    def test_central_difference_epsilon_order(self):
        model = _fresh_model(seed=13)
        rng = np.random.default_rng(2)
        x, y = rng.normal(size=3), rng.normal(size=4)
        xn = model.normalize_input(x.reshape(1, -1))
        yn = model.normalize_target(y.reshape(1, -1))
        prev = np.zeros_like(yn)
        prev[:, 1:] = yn[:, :-1]
        p = model.net.head.w

        def loss():
            return float(np.mean((model.net.forward(xn, prev) - yn) ** 2))

        def fd(eps):
            orig = p.flat[0]
            p.flat[0] = orig + eps
            hi = loss()
            p.flat[0] = orig - eps
            lo = loss()
            p.flat[0] = orig
            return (hi - lo) / (2 * eps)

        f1, f2 = fd(1e-4), fd(2e-4)
        # central differences: estimate shifts by O(eps^2) when eps doubles
        assert abs(f2 - f1) < 1e-6 * max(1.0, abs(f1))

    def test_oversized_model_rejected(self):
        model = _fresh_model(d_model=128, d_ff=1024, n_encoder_layers=6, n_decoder_layers=6)
        assert model.net.n_parameters() > 10**5
        with pytest.raises(ValueError):
            grad_check(model, (np.zeros(3), np.zeros(4)))


class TestCheckpoint:
    def test_round_trip_preserves_predictions(self, tmp_path):
        _, records = datagen.generate_records(CircuitFamily.ONE_Q, 100, master_seed=10)
        cfg = ModelConfig(input_len=3, output_len=4, max_epochs=2, seed=3, **TINY)
        model, _ = train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
        path = tmp_path / "model.qsm"
        save_model(model, path)
        loaded = load_model(path)
        x = np.array([0.5, 1.5, -2.0])
        np.testing.assert_array_equal(forward(model, x), forward(loaded, x))
        assert loaded.family == model.family
        assert loaded.target_kind is model.target_kind

    def test_checkpoint_bytes_deterministic(self, tmp_path):
        model = _fresh_model(seed=4)
        p1, p2 = tmp_path / "a.qsm", tmp_path / "b.qsm"
        save_model(model, p1)
        save_model(model, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.qsm"
        path.write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(ValueError):
            load_model(path)

    def test_truncated_tensor_rejected(self, tmp_path):
        model = _fresh_model(seed=4)
        path = tmp_path / "model.qsm"
        save_model(model, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 16])
        with pytest.raises(Exception):
            load_model(path)


class TestConfig:
    def test_heads_must_divide(self):
        with pytest.raises(ValueError):
            ModelConfig(input_len=3, output_len=4, d_model=30, n_heads=4)

    def test_lengths_positive(self):
        with pytest.raises(ValueError):
            ModelConfig(input_len=0, output_len=4)

    def test_dict_round_trip(self):
        cfg = ModelConfig(input_len=3, output_len=4, **TINY)
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg
