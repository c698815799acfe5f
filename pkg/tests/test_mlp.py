import numpy as np
import pytest

from neurologic import errors, mlp
from neurologic.store import LabeledDataset, split_dataset


def tiny_dataset(seed=0, n=40, d=3, num_classes=2):
    rng = np.random.default_rng(seed)
    return LabeledDataset(
        features=rng.normal(size=(n, d)),
        labels=np.concatenate([[0, 1], rng.integers(0, num_classes, n - 2)]).astype(np.uint32),
        num_classes=num_classes,
    )


class TestGenerateXor:
    def test_label_rule_on_known_rows(self):
        ds = mlp.generate_xor(200, seed=3)
        for x, label in zip(ds.features, ds.labels):
            assert label == (int(x[0] >= 0.5) ^ int(x[1] >= 0.5))

    def test_explicit_corner_cases(self):
        # round(0.9) xor round(0.1) = 1;  round(0.6) xor round(0.7) = 0
        assert (0.9 >= 0.5) ^ (0.1 >= 0.5)
        ds = mlp.generate_xor(1, seed=0)
        assert ds.features.shape == (1, 10)

    def test_class_balance(self):
        ds = mlp.generate_xor(1000, seed=11)
        assert 0.45 <= ds.labels.mean() <= 0.55

    def test_determinism(self):
        a = mlp.generate_xor(50, seed=5)
        b = mlp.generate_xor(50, seed=5)
        assert np.array_equal(a.features, b.features)


class TestForward:
    def test_zero_model_ties_break_low(self):
        config = mlp.MlpConfig(layer_sizes=[2, 3, 2], epochs=0)
        model = mlp.MlpModel(
            weights=[np.zeros((2, 3)), np.zeros((3, 2))],
            biases=[np.zeros(3), np.zeros(2)],
            config=config,
        )
        result = mlp.forward(model, [1.0, -1.0])
        assert result.predicted == 0
        assert np.all(result.hidden[0] == 0.0)

    def test_rectifier_clamps_negative(self):
        config = mlp.MlpConfig(layer_sizes=[1, 1, 1], epochs=0)
        model = mlp.MlpModel(
            weights=[np.array([[1.0]]), np.array([[1.0]])],
            biases=[np.zeros(1), np.zeros(1)],
            config=config,
        )
        result = mlp.forward(model, [-2.0])
        assert result.hidden[0][0] == 0.0

    def test_shape_mismatch(self):
        model = mlp.init_model(mlp.MlpConfig(layer_sizes=[3, 2, 2]))
        with pytest.raises(errors.ShapeMismatch):
            mlp.forward(model, [1.0, 2.0])

    def test_logits_match_triple_loop_oracle(self):
        config = mlp.MlpConfig(layer_sizes=[4, 5, 3], seed=9)
        model = mlp.init_model(config)
        rng = np.random.default_rng(1)
        for _ in range(10):
            x = rng.normal(size=4)
            result = mlp.forward(model, x)

            h = [0.0] * 5
            for j in range(5):
                z = model.biases[0][j]
                for i in range(4):
                    z += x[i] * model.weights[0][i, j]
                h[j] = max(z, 0.0)
            logits = [0.0] * 3
            for j in range(3):
                z = model.biases[1][j]
                for i in range(5):
                    z += h[i] * model.weights[1][i, j]
                logits[j] = z
            assert np.allclose(result.logits, logits, atol=1e-5)

    def test_softmax_probabilities_sum_to_one(self):
        rng = np.random.default_rng(2)
        logits = rng.normal(size=(20, 4)) * 10
        probs = mlp._softmax(logits)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


class TestTraining:
    def test_zero_epochs_equals_initialization(self):
        ds = tiny_dataset()
        config = mlp.MlpConfig(layer_sizes=[3, 4, 2], seed=7, epochs=0)
        trained = mlp.train_mlp(config, ds).model
        init = mlp.init_model(config)
        for a, b in zip(trained.weights, init.weights):
            assert np.array_equal(a, b)

    def test_same_seed_bitwise_identical(self):
        ds = tiny_dataset()
        config = mlp.MlpConfig(layer_sizes=[3, 4, 2], seed=7, epochs=3)
        a = mlp.train_mlp(config, ds).model
        b = mlp.train_mlp(config, ds).model
        for wa, wb in zip(a.weights, b.weights):
            assert wa.tobytes() == wb.tobytes()
        for ba, bb in zip(a.biases, b.biases):
            assert ba.tobytes() == bb.tobytes()

    def test_shape_mismatches_rejected(self):
        ds = tiny_dataset(d=3, num_classes=2)
        with pytest.raises(errors.ShapeMismatch):
            mlp.train_mlp(mlp.MlpConfig(layer_sizes=[4, 4, 2]), ds)
        with pytest.raises(errors.ShapeMismatch):
            mlp.train_mlp(mlp.MlpConfig(layer_sizes=[3, 4, 3]), ds)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")  # overflow is the point
    def test_divergence_reports_epoch(self):
        ds = tiny_dataset()
        config = mlp.MlpConfig(layer_sizes=[3, 4, 2], seed=1, epochs=50, learning_rate=1e6)
        with pytest.raises(errors.NonFiniteLoss) as info:
            mlp.train_mlp(config, ds)
        assert info.value.epoch >= 0

    def test_loss_decreases_on_xor(self):
        ds = mlp.generate_xor(300, seed=2)
        config = mlp.MlpConfig(layer_sizes=[10, 16, 2], seed=2, epochs=30)
        history = mlp.train_mlp(config, ds).loss_history
        assert history[-1] < history[0]

    def test_xor_reaches_95_percent(self):
        ds = mlp.generate_xor(1000, seed=7)
        train, test = split_dataset(ds, 0.2, seed=7)
        config = mlp.MlpConfig(
            layer_sizes=[10, 64, 32, 2], seed=7, learning_rate=0.05, epochs=200, batch_size=32
        )
        model = mlp.train_mlp(config, train).model
        acc = (mlp.predict_batch(model, test.features) == test.labels).mean()
        assert acc >= 0.95


def collect_gradient_points(count, hidden=(2,), d=2, num_classes=2, batch=8):
    """Deterministic (model, X, y) tuples whose hidden pre-activations stay
    clear of the rectifier kink, so central differences are trustworthy."""
    points = []
    seed = 0
    while len(points) < count:
        seed += 1
        config = mlp.MlpConfig(layer_sizes=[d, *hidden, num_classes], seed=seed)
        model = mlp.init_model(config)
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(batch, d))
        y = rng.integers(0, num_classes, size=batch)
        pre = X @ model.weights[0] + model.biases[0]
        if np.abs(pre).min() < 1e-3:
            continue
        points.append((model, X, y))
    return points


def finite_difference_grads(model, X, y, eps=1e-4):
    grads_w = [np.zeros_like(w) for w in model.weights]
    grads_b = [np.zeros_like(b) for b in model.biases]
    for store, grads in ((model.weights, grads_w), (model.biases, grads_b)):
        for l, param in enumerate(store):
            flat = param.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up, _, _ = mlp.loss_and_grads(model, X, y)
                flat[i] = orig - eps
                down, _, _ = mlp.loss_and_grads(model, X, y)
                flat[i] = orig
                grads[l].reshape(-1)[i] = (up - down) / (2 * eps)
    return grads_w, grads_b


def rel_err(a, b):
    scale = max(abs(a), abs(b))
    if scale < 1e-10:
        return 0.0
    return abs(a - b) / scale


def test_gradient_check_2_2_2():
    for model, X, y in collect_gradient_points(5):
        _, gw, gb = mlp.loss_and_grads(model, X, y)
        fw, fb = finite_difference_grads(model, X, y)
        for analytic, numeric in zip(gw + gb, fw + fb):
            worst = max(
                rel_err(a, n)
                for a, n in zip(analytic.reshape(-1), numeric.reshape(-1))
            )
            assert worst < 1e-3


class TestDumpActivations:
    def test_shape_and_prediction_consistency(self):
        ds = tiny_dataset(n=12)
        config = mlp.MlpConfig(layer_sizes=[3, 5, 4, 2], seed=3, epochs=2)
        model = mlp.train_mlp(config, ds).model
        dump = mlp.dump_activations(model, ds, layer=0)
        assert (dump.n, dump.h) == (12, 5)
        for i in range(ds.n):
            result = mlp.forward(model, ds.features[i])
            assert dump.predictions[i] == result.predicted
            assert np.allclose(dump.values[i], result.hidden[0], atol=1e-6)

    def test_layers_differ_for_random_model(self):
        ds = tiny_dataset(n=12)
        config = mlp.MlpConfig(layer_sizes=[3, 5, 5, 2], seed=4, epochs=1)
        model = mlp.train_mlp(config, ds).model
        d0 = mlp.dump_activations(model, ds, layer=0)
        d1 = mlp.dump_activations(model, ds, layer=1)
        assert not np.array_equal(d0.values, d1.values)

    def test_layer_out_of_range(self):
        model = mlp.init_model(mlp.MlpConfig(layer_sizes=[3, 4, 2]))
        ds = tiny_dataset()
        with pytest.raises(errors.LayerOutOfRange):
            mlp.dump_activations(model, ds, layer=1)


def test_model_json_round_trip(tmp_path):
    config = mlp.MlpConfig(layer_sizes=[3, 4, 2], seed=5)
    model = mlp.init_model(config)
    path = tmp_path / "model.json"
    mlp.save_model(model, path)
    back = mlp.load_model(path)
    for a, b in zip(model.weights, back.weights):
        assert a.tobytes() == b.tobytes()
