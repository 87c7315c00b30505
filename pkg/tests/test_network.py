"""Tests for the feed-forward ReLU networks and their gradients."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dplqr.errors import ConfigError, DataError
from dplqr.network import (NetworkParams, backward, backward_batch, forward,
                           forward_batch, init_params, relu)
from dplqr.rng import make_rng


def test_relu_values():
    assert relu(-1.0) == 0.0
    assert relu(0.0) == 0.0
    assert relu(2.5) == 2.5
    assert_allclose(relu(np.array([-3.0, 0.0, 4.0])), [0.0, 0.0, 4.0])


def test_depth_one_is_affine():
    # single layer, weights (2, -1) and bias 0.5 acting on z = (1, 1)
    params = NetworkParams((2, 1), [np.array([[2.0, -1.0, 0.5]])])
    assert forward(params, np.array([1.0, 1.0])) == 1.5
    assert forward(params, np.array([0.0, 0.0])) == 0.5


def test_two_layer_relu_kills_negative_unit():
    # hidden unit 1 gets pre-activation +2, unit 2 gets -2 and is zeroed;
    # output layer doubles the sum
    w1 = np.array([[1.0, 1.0, 0.0],
                   [-1.0, -1.0, 0.0]])
    w2 = np.array([[2.0, 2.0, 0.0]])
    params = NetworkParams((2, 2, 1), [w1, w2])
    assert forward(params, np.array([1.0, 1.0])) == 4.0


def test_forward_batch_matches_forward():
    rng = make_rng(3)
    params = init_params((4, 8, 1), rng)
    z = np.random.default_rng(0).normal(size=(20, 4))
    batch = forward_batch(params, z)
    single = np.array([forward(params, row) for row in z])
    assert_allclose(batch, single, rtol=1e-12)


def test_input_width_checked():
    params = init_params((3, 2, 1), make_rng(0))
    with pytest.raises(DataError):
        forward(params, np.array([1.0, 2.0]))
    with pytest.raises(DataError):
        forward_batch(params, np.ones((5, 4)))


def test_width_chain_validation():
    with pytest.raises(ConfigError):
        init_params((3,), make_rng(0))
    with pytest.raises(ConfigError):
        init_params((3, 2), make_rng(0))  # output width must be 1
    with pytest.raises(ConfigError):
        init_params((3, 0, 1), make_rng(0))


def test_init_bounds_and_zero_bias():
    for seed in range(5):
        params = init_params((10, 6, 1), make_rng(seed))
        for w, fan_in, fan_out in zip(params.layers, (10, 6), (6, 1)):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            assert np.all(np.abs(w[:, :-1]) <= bound)
            assert np.all(w[:, -1] == 0.0)


def test_init_deterministic_from_seed():
    a = init_params((5, 4, 1), make_rng(8))
    b = init_params((5, 4, 1), make_rng(8))
    for wa, wb in zip(a.layers, b.layers):
        assert_allclose(wa, wb, rtol=0)


def test_backward_affine_layer():
    # depth 1: d(u * (w . (z, 1))) / dw = u * (z, 1)
    params = NetworkParams((2, 1), [np.array([[2.0, -1.0, 0.5]])])
    grads = backward(params, np.array([3.0, 4.0]), 2.0)
    assert_allclose(grads[0], [[6.0, 8.0, 2.0]])


def _hidden_preactivations(params, z):
    """Pre-activation values of every hidden unit for one input vector."""
    a = np.atleast_1d(np.asarray(z, dtype=float))
    pre = []
    for w in params.layers[:-1]:
        s = w[:, :-1] @ a + w[:, -1]
        pre.append(s)
        a = np.maximum(s, 0.0)
    return np.concatenate(pre) if pre else np.array([])


def test_backward_matches_finite_differences():
    # central differences on every weight of small nets; draws whose
    # hidden pre-activations sit within 1e-3 of a relu kink are skipped
    # up front, so every remaining comparison is asserted strictly
    rng = make_rng(12)
    data_rng = np.random.default_rng(5)
    h = 1e-6
    checked = 0
    for trial in range(20):
        params = init_params((3, 5, 4, 1), rng)
        # move biases off zero so kinks are not sitting at the data
        for w in params.layers:
            w[:, -1] = data_rng.normal(size=w.shape[0]) * 0.3
        z = data_rng.normal(size=3)
        upstream = data_rng.normal()
        pre = _hidden_preactivations(params, z)
        if np.min(np.abs(pre)) < 1e-3:
            continue
        grads = backward(params, z, upstream)
        for k, w in enumerate(params.layers):
            flat = w.ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + h
                up = upstream * forward(params, z)
                flat[idx] = orig - h
                down = upstream * forward(params, z)
                flat[idx] = orig
                fd = (up - down) / (2 * h)
                got = grads[k].ravel()[idx]
                assert_allclose(got, fd, rtol=1e-4, atol=1e-7)
                checked += 1
    assert checked > 300


def test_backward_batch_sums_per_row_gradients():
    params = init_params((2, 3, 1), make_rng(1))
    z = np.array([[0.3, -0.2], [1.0, 0.5], [-0.4, 0.9]])
    u = np.array([1.0, -2.0, 0.5])
    batch = backward_batch(params, z, u)
    acc = [np.zeros_like(w) for w in params.layers]
    for row, weight in zip(z, u):
        for k, g in enumerate(backward(params, row, weight)):
            acc[k] += g
    for got, want in zip(batch, acc):
        assert_allclose(got, want, rtol=1e-10)


def test_upstream_length_checked():
    params = init_params((2, 1), make_rng(0))
    with pytest.raises(DataError):
        backward_batch(params, np.ones((3, 2)), np.ones(2))


def test_relu_network_positive_homogeneity():
    # scaling every weight matrix of a depth-2 net by c > 0 scales the
    # zero-bias output by c**2
    rng = make_rng(21)
    params = init_params((3, 6, 1), rng)
    z = np.array([0.7, -0.3, 1.2])
    base = forward(params, z)
    for c in (0.5, 2.0, 3.0):
        scaled = NetworkParams(params.widths,
                               [w * c for w in params.layers])
        assert_allclose(forward(scaled, z), c ** 2 * base, rtol=1e-10)
