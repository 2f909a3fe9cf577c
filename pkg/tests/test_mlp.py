import math

import numpy as np
import pytest

from specinfo.errors import (
    DimensionMismatchError,
    LengthMismatchError,
    NonOneHotTargetError,
)
from specinfo.mlp import (
    LearningCurve,
    MlpNetwork,
    MlpTopology,
    TrainConfig,
    average_curves,
    backprop_gradients,
    classify,
    forward,
    init_network,
    load_curve_csv,
    load_network,
    save_curve_csv,
    save_network,
    train,
    train_repeated,
)

TOY_TOPOLOGY = MlpTopology(5, 3, 2)
TOY_INPUTS = np.array(
    [
        [1.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 1.0, 1.0],
    ]
)
TOY_TARGETS = np.array([[1.0, 0.0], [0.0, 1.0]])


class TestInitNetwork:
    def test_same_seed_identical(self):
        a = init_network(TOY_TOPOLOGY, 7)
        b = init_network(TOY_TOPOLOGY, 7)
        assert np.array_equal(a.hidden_weights, b.hidden_weights)
        assert np.array_equal(a.output_weights, b.output_weights)

    def test_different_seeds_differ(self):
        a = init_network(TOY_TOPOLOGY, 7)
        b = init_network(TOY_TOPOLOGY, 8)
        assert not np.array_equal(a.hidden_weights, b.hidden_weights)

    def test_weight_range(self):
        net = init_network(MlpTopology(5, 3, 2), 123)
        for w in (net.hidden_weights, net.output_weights):
            assert np.all(np.abs(w) <= 0.1)

    def test_shapes(self):
        net = init_network(MlpTopology(4, 6, 3), 0)
        assert net.hidden_weights.shape == (6, 5)
        assert net.output_weights.shape == (3, 7)


class TestForward:
    def test_zero_weights_give_half(self):
        net = MlpNetwork(
            TOY_TOPOLOGY, np.zeros((3, 6)), np.zeros((2, 4)), rng_seed=0
        )
        out = forward(net, np.array([3.0, -1.0, 2.0, 0.0, 5.0]))
        assert np.allclose(out, 0.5)

    def test_outputs_in_open_unit_interval(self):
        rng = np.random.default_rng(0)
        net = init_network(MlpTopology(6, 4, 3), 1)
        for _ in range(100):
            out = forward(net, rng.normal(size=6))
            assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_matches_hand_computed_chain(self):
        # 3-2-2 network with fixed weights, evaluated by scalar arithmetic
        hw = np.array([[0.2, -0.1, 0.4, 0.05], [0.3, 0.1, -0.2, -0.05]])
        ow = np.array([[0.5, -0.4, 0.1], [-0.3, 0.2, 0.0]])
        net = MlpNetwork(MlpTopology(3, 2, 2), hw, ow, rng_seed=0)
        x = [0.5, -1.0, 0.25]

        def sig(z):
            return 1.0 / (1.0 + math.exp(-z))

        h1 = sig(0.2 * 0.5 + -0.1 * -1.0 + 0.4 * 0.25 + 0.05)
        h2 = sig(0.3 * 0.5 + 0.1 * -1.0 + -0.2 * 0.25 + -0.05)
        y1 = sig(0.5 * h1 + -0.4 * h2 + 0.1)
        y2 = sig(-0.3 * h1 + 0.2 * h2 + 0.0)
        out = forward(net, np.array(x))
        assert out == pytest.approx([y1, y2], abs=1e-15)

    def test_dimension_mismatch(self):
        net = init_network(TOY_TOPOLOGY, 0)
        with pytest.raises(DimensionMismatchError):
            forward(net, np.zeros(4))


def sse_loss(net, x, target):
    y = forward(net, x)
    return float(np.sum((y - target) ** 2))


class TestGradients:
    def test_backprop_matches_central_differences(self):
        rng = np.random.default_rng(42)
        net = init_network(MlpTopology(5, 3, 2), 5)
        x = rng.normal(size=5)
        target = np.array([1.0, 0.0])
        grad_h, grad_o = backprop_gradients(net, x, target)

        h = 1e-5
        for grads, attr in ((grad_h, "hidden_weights"), (grad_o, "output_weights")):
            weights = getattr(net, attr)
            for idx in np.ndindex(weights.shape):
                w_plus = weights.copy()
                w_plus[idx] += h
                w_minus = weights.copy()
                w_minus[idx] -= h
                net_plus = MlpNetwork(
                    net.topology,
                    w_plus if attr == "hidden_weights" else net.hidden_weights,
                    w_plus if attr == "output_weights" else net.output_weights,
                    0,
                )
                net_minus = MlpNetwork(
                    net.topology,
                    w_minus if attr == "hidden_weights" else net.hidden_weights,
                    w_minus if attr == "output_weights" else net.output_weights,
                    0,
                )
                numeric = (
                    sse_loss(net_plus, x, target) - sse_loss(net_minus, x, target)
                ) / (2 * h)
                analytic = grads[idx]
                scale = max(abs(numeric), abs(analytic), 1e-8)
                assert abs(numeric - analytic) / scale < 1e-4


class TestTrain:
    def test_toy_task_converges(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=10_000,
                          target_max_bit_error=0.1)
        net, curve = train(init_network(TOY_TOPOLOGY, 3), TOY_INPUTS,
                           TOY_TARGETS, cfg)
        assert curve.max_bit_error[-1] <= 0.1

    def test_trivial_target_stops_after_one_epoch(self):
        cfg = TrainConfig(max_epochs=500, target_max_bit_error=1.0)
        _, curve = train(init_network(TOY_TOPOLOGY, 3), TOY_INPUTS,
                         TOY_TARGETS, cfg)
        assert len(curve.max_bit_error) == 1

    def test_zero_step_size_changes_nothing(self):
        net = init_network(TOY_TOPOLOGY, 4)
        cfg = TrainConfig(step_size=0.0, max_epochs=50)
        trained, curve = train(net, TOY_INPUTS, TOY_TARGETS, cfg)
        assert np.array_equal(trained.hidden_weights, net.hidden_weights)
        assert np.array_equal(trained.output_weights, net.output_weights)
        assert np.all(curve.max_bit_error == curve.max_bit_error[0])

    def test_deterministic(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=200)
        a_net, a_curve = train(init_network(TOY_TOPOLOGY, 9), TOY_INPUTS,
                               TOY_TARGETS, cfg)
        b_net, b_curve = train(init_network(TOY_TOPOLOGY, 9), TOY_INPUTS,
                               TOY_TARGETS, cfg)
        assert np.array_equal(a_net.hidden_weights, b_net.hidden_weights)
        assert np.array_equal(a_net.output_weights, b_net.output_weights)
        assert np.array_equal(a_curve.max_bit_error, b_curve.max_bit_error)

    def test_error_declines_on_separable_task(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=5_000)
        _, curve = train(init_network(TOY_TOPOLOGY, 11), TOY_INPUTS,
                         TOY_TARGETS, cfg)
        assert curve.max_bit_error[-1] < curve.max_bit_error[0]

    def test_full_accuracy_when_error_below_half(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=10_000,
                          target_max_bit_error=0.4)
        net, curve = train(init_network(TOY_TOPOLOGY, 3), TOY_INPUTS,
                           TOY_TARGETS, cfg)
        if curve.max_bit_error[-1] < 0.5:
            assert curve.final_accuracy == 1.0
            for x, t in zip(TOY_INPUTS, TOY_TARGETS):
                assert classify(net, x) == int(np.argmax(t))

    def test_rejects_non_one_hot(self):
        cfg = TrainConfig(max_epochs=1)
        bad = np.array([[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(NonOneHotTargetError):
            train(init_network(TOY_TOPOLOGY, 0), TOY_INPUTS, bad, cfg)

    def test_rejects_wrong_input_width(self):
        cfg = TrainConfig(max_epochs=1)
        with pytest.raises(DimensionMismatchError):
            train(init_network(TOY_TOPOLOGY, 0), np.ones((2, 4)), TOY_TARGETS, cfg)


class TestClassify:
    def test_argmax_semantics(self):
        net = init_network(MlpTopology(4, 3, 3), 2)
        x = np.array([0.3, -0.2, 0.8, 0.1])
        assert classify(net, x) == int(np.argmax(forward(net, x)))

    def test_tie_breaks_to_lowest_index(self):
        net = MlpNetwork(
            TOY_TOPOLOGY, np.zeros((3, 6)), np.zeros((2, 4)), rng_seed=0
        )
        # all outputs are exactly 0.5
        assert classify(net, np.ones(5)) == 0

    def test_argmax_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            outputs = rng.uniform(0.01, 0.99, size=6)
            transformed = np.log(outputs / (1 - outputs)) * 2.0 + 1.0
            assert np.argmax(outputs) == np.argmax(transformed)


class TestTrainRepeated:
    def test_identical_seeds_equal_single_run(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=100, n_repeats=4)
        averaged = train_repeated(TOY_TOPOLOGY, TOY_INPUTS, TOY_TARGETS, cfg,
                                  seeds=[5, 5, 5, 5])
        _, single = train(init_network(TOY_TOPOLOGY, 5), TOY_INPUTS,
                          TOY_TARGETS, cfg)
        assert np.allclose(averaged.max_bit_error, single.max_bit_error,
                           atol=1e-15)

    def test_single_repeat_is_identity(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=80, n_repeats=1)
        averaged = train_repeated(TOY_TOPOLOGY, TOY_INPUTS, TOY_TARGETS, cfg,
                                  seeds=[6])
        _, single = train(init_network(TOY_TOPOLOGY, 6), TOY_INPUTS,
                          TOY_TARGETS, cfg)
        assert np.array_equal(averaged.max_bit_error, single.max_bit_error)

    def test_average_within_envelope(self):
        cfg = TrainConfig(step_size=0.01, max_epochs=150, n_repeats=4)
        seeds = [1, 2, 3, 4]
        curves = [
            train(init_network(TOY_TOPOLOGY, s), TOY_INPUTS, TOY_TARGETS, cfg)[1]
            for s in seeds
        ]
        averaged = train_repeated(TOY_TOPOLOGY, TOY_INPUTS, TOY_TARGETS, cfg,
                                  seeds=seeds)
        stacked = np.stack([c.max_bit_error for c in curves])
        assert np.all(averaged.max_bit_error <= stacked.max(axis=0) + 1e-12)
        assert np.all(averaged.max_bit_error >= stacked.min(axis=0) - 1e-12)

    def test_seed_count_must_match(self):
        cfg = TrainConfig(max_epochs=10, n_repeats=4)
        with pytest.raises(LengthMismatchError):
            train_repeated(TOY_TOPOLOGY, TOY_INPUTS, TOY_TARGETS, cfg, seeds=[1])

    def test_padding_uses_final_value(self):
        short = LearningCurve(np.array([0.5, 0.2]), 1.0)
        long = LearningCurve(np.array([0.6, 0.5, 0.4, 0.4]), 1.0)
        averaged = average_curves([short, long])
        assert len(averaged.max_bit_error) == 4
        assert averaged.max_bit_error[3] == pytest.approx((0.2 + 0.4) / 2)


class TestPersistence:
    def test_network_roundtrip(self, tmp_path):
        net = init_network(MlpTopology(4, 3, 2), 77)
        path = tmp_path / "net.json"
        save_network(net, path)
        back = load_network(path)
        assert back.topology == net.topology
        assert back.rng_seed == net.rng_seed
        assert np.array_equal(back.hidden_weights, net.hidden_weights)
        assert np.array_equal(back.output_weights, net.output_weights)

    def test_curve_csv_roundtrip(self, tmp_path):
        curve = LearningCurve(np.array([0.9, 0.5, 0.31]), 0.75)
        path = tmp_path / "curve.csv"
        save_curve_csv(curve, path)
        assert np.array_equal(load_curve_csv(path), curve.max_bit_error)
