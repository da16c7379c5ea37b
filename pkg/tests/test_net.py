import math

import numpy as np
import pytest
import torch

from cpdag_discovery_tool.errors import NumericError, ValidationError
from cpdag_discovery_tool.graph import dag_to_cpdag
from cpdag_discovery_tool.models.network import Hyperparameters
from cpdag_discovery_tool.net import (
    bce_loss,
    build_network,
    forward,
    gradient,
    parameter_count,
    train,
)
from cpdag_discovery_tool.sim import (
    analytic_correlation,
    generate_pairs,
    make_pair,
    sample_dag,
    sample_sem,
)


def test_parameter_counts():
    # dense layer of 4p^2 units
    assert parameter_count(build_network(Hyperparameters(5))) == 54_593
    assert parameter_count(build_network(Hyperparameters(10))) == 1_321_588
    assert Hyperparameters(5).dense_units == 100
    assert Hyperparameters(10).expected_parameter_count() == 1_321_588


def test_hyperparameters_validate():
    with pytest.raises(ValidationError):
        Hyperparameters(2)
    with pytest.raises(ValidationError):
        Hyperparameters(5, dropout_rate=1.0)
    assert Hyperparameters(5).override(epochs=3, batch_size=None).epochs == 3


def test_build_network_depends_only_on_seed():
    before = torch.get_rng_state()
    a = build_network(Hyperparameters(4), seed=1)
    b = build_network(Hyperparameters(4), seed=1)
    c = build_network(Hyperparameters(4), seed=2)
    assert torch.equal(torch.get_rng_state(), before)
    for (name, x), (_, y), (_, z) in zip(a.state_dict().items(), b.state_dict().items(),
                                         c.state_dict().items()):
        assert torch.equal(x, y)
        if name.endswith("weight"):
            assert not torch.equal(x, z)


def test_forward_infer_is_deterministic(rng):
    net = build_network(Hyperparameters(5), seed=0)
    c = make_pair(5, 100, rng).feature
    o = forward(net, c)
    assert o.shape == (5, 5)
    assert np.all((o > 0) & (o < 1))
    np.testing.assert_array_equal(o, forward(net, c))
    batch = forward(net, np.stack([c, c, c]))
    assert batch.shape == (3, 5, 5)
    np.testing.assert_allclose(batch[1], o, rtol=1e-5)


def test_forward_train_mode_draws_masks_from_generator(rng):
    net = build_network(Hyperparameters(5), seed=0)
    was_training = net.training
    c = make_pair(5, 100, rng).feature
    first = forward(net, c, mode="train", generator=torch.Generator().manual_seed(9))
    again = forward(net, c, mode="train", generator=torch.Generator().manual_seed(9))
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, forward(net, c))
    assert net.training == was_training


def test_forward_rejects_bad_inputs():
    net = build_network(Hyperparameters(4))
    with pytest.raises(ValidationError):
        forward(net, np.eye(5))
    with pytest.raises(ValidationError):
        forward(net, np.eye(4), mode="eval")
    bad = np.eye(4)
    bad[0, 1] = np.nan
    with pytest.raises(NumericError):
        forward(net, bad)


def test_bce_loss_values():
    half = torch.full((3, 3), 0.5)
    assert bce_loss(half, np.eye(3)).item() == pytest.approx(math.log(2))
    # probabilities are clamped, so certainty costs at most -log(1e-7)
    zeros = torch.zeros((2, 2), dtype=torch.float64)
    assert bce_loss(zeros, np.zeros((2, 2))).item() == pytest.approx(0.0, abs=1e-6)
    assert bce_loss(zeros, np.ones((2, 2))).item() == pytest.approx(-math.log(1e-7))
    with pytest.raises(ValidationError):
        bce_loss(half, np.eye(2))


def test_gradient_matches_finite_differences(rng):
    hyper = Hyperparameters(3)
    net = build_network(hyper, seed=4, dtype=torch.float64)
    features, labels = [], []
    for _ in range(2):
        dag = sample_dag(3, rng)
        features.append(analytic_correlation(sample_sem(dag, rng)))
        labels.append(dag_to_cpdag(dag).m)
    batch = (np.stack(features), np.stack(labels))
    x = torch.as_tensor(batch[0])
    y = torch.as_tensor(batch[1], dtype=torch.float64)

    analytic = gradient(net, batch, torch.Generator().manual_seed(7))

    def loss():
        with torch.no_grad():
            return bce_loss(net(x, torch.Generator().manual_seed(7)), y).item()

    eps = 1e-6
    worst = 0.0
    net.train()
    for name, param in net.named_parameters():
        flat = param.data.view(-1)
        numeric = torch.zeros_like(flat)
        for k in range(flat.numel()):
            original = flat[k].item()
            flat[k] = original + eps
            upper = loss()
            flat[k] = original - eps
            lower = loss()
            flat[k] = original
            numeric[k] = (upper - lower) / (2 * eps)
        exact = analytic[name].reshape(-1)
        scale = torch.clamp(torch.maximum(exact.abs(), numeric.abs()), min=1e-3)
        worst = max(worst, ((exact - numeric).abs() / scale).max().item())
    assert worst < 1e-4


def test_output_bias_gradient_at_even_odds():
    p = 4
    net = build_network(Hyperparameters(p), seed=1, dtype=torch.float64)
    with torch.no_grad():
        net.output.weight.zero_()
        net.output.bias.zero_()
    batch = (np.eye(p)[None], np.zeros((1, p, p)))
    grads = gradient(net, batch, torch.Generator().manual_seed(0))
    # every output sits at 0.5, so d(loss)/d(bias) = (0.5 - 0) / p^2
    expected = torch.full((p * p,), 0.5 / p ** 2, dtype=torch.float64)
    torch.testing.assert_close(grads["output.bias"], expected)


def test_duplicated_pair_gives_the_same_gradient(rng):
    net = build_network(Hyperparameters(3, dropout_rate=0.0), seed=2, dtype=torch.float64)
    pair = make_pair(3, 200, rng)
    once = gradient(net, (pair.feature[None], pair.label.m[None]))
    twice = gradient(net, (np.stack([pair.feature] * 2), np.stack([pair.label.m] * 2)))
    for name, value in once.items():
        torch.testing.assert_close(twice[name], value)


def test_train_is_reproducible():
    pairs = generate_pairs(4, 100, 40, seed=8)
    hyper = Hyperparameters(4, epochs=2, batch_size=16)
    net_a, log_a = train(pairs, hyper, seed=3)
    net_b, log_b = train(pairs, hyper, seed=3)
    assert list(log_a.columns) == ["epoch", "mean_loss", "wall_seconds"]
    assert log_a["epoch"].tolist() == [0, 1]
    assert log_a["mean_loss"].tolist() == log_b["mean_loss"].tolist()
    for x, y in zip(net_a.state_dict().values(), net_b.state_dict().values()):
        assert torch.equal(x, y)
    assert not net_a.training


def test_train_rejects_mismatched_corpus():
    pairs = generate_pairs(4, 100, 4, seed=0)
    with pytest.raises(ValidationError):
        train(pairs, Hyperparameters(5, epochs=1))
    with pytest.raises(ValidationError):
        train([], Hyperparameters(5, epochs=1))


def test_train_rejects_non_finite_features():
    features = np.zeros((4, 3, 3), dtype=np.float32)
    features[0, 0, 1] = np.inf
    labels = np.zeros((4, 3, 3), dtype=np.uint8)
    with pytest.raises(NumericError):
        train((features, labels), Hyperparameters(3, epochs=1, batch_size=4))


@pytest.mark.slow
def test_network_memorizes_one_pair():
    pair = generate_pairs(5, 1000, 1, seed=12)[0]
    features = np.repeat(pair.feature[None], 512, axis=0)
    labels = np.repeat(pair.label.m[None], 512, axis=0)
    net, log = train((features, labels), Hyperparameters(5), seed=0)
    assert len(log) == 150
    # past the first ten epochs the 5-epoch block means keep falling
    smoothed = log["mean_loss"].iloc[10:].groupby(np.arange(140) // 5).mean()
    assert (smoothed.diff().dropna() <= 1e-3).all()
    o = torch.as_tensor(forward(net, pair.feature))
    assert bce_loss(o, pair.label).item() < 0.05
