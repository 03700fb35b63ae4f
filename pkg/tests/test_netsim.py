import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from gaussnet import (
    ActivationSpec,
    DegenerateOutputError,
    ParameterError,
    PointCloud,
    RandomGaussianLayer,
    apply_layer,
    forward_stack,
    make_identity_layer,
    make_layer,
    validate_semi_truncated,
)
from gaussnet.metrics import pairwise_distances
from gaussnet.netsim import layer_stack_from_config

finite = st.floats(-1e3, 1e3, allow_nan=False)
bounds = st.one_of(st.just(math.inf), st.floats(1e-3, 1e3))
slopes = st.floats(1e-3, 1.0)


def test_scalar_layer():
    layer = make_layer(1, 1, "identity", seed=0)
    assert layer.matrix_.shape == (1, 1)
    assert apply_layer(layer, np.array([1.0]))[0] == layer.matrix_[0, 0]


def test_entry_variance():
    layer = make_layer(64, 1024, "relu", seed=4)
    var = layer.matrix_.var()
    assert abs(var * 1024 - 1.0) < 0.2
    assert abs(layer.matrix_.mean()) < 1e-3


def test_norm_concentration(rng):
    layer = make_layer(64, 1024, "identity", seed=3)
    X = rng.standard_normal((100, 64))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    norms = np.linalg.norm(layer.transform(X), axis=1)
    assert np.sum((norms >= 0.9) & (norms <= 1.1)) >= 99


def test_expected_squared_norm(rng):
    x = rng.standard_normal(32)
    x /= np.linalg.norm(x)
    sq = [np.sum(apply_layer(make_layer(32, 64, "identity", seed=s), x) ** 2) for s in range(400)]
    # mean of chi2_64/64 over 400 draws: sd = sqrt(2/64)/20 ~ 0.009
    assert abs(np.mean(sq) - 1.0) < 0.035


def test_layer_deterministic_and_nested():
    a = make_layer(16, 64, seed=9)
    b = make_layer(16, 64, seed=9)
    wide = make_layer(16, 256, seed=9)
    assert np.array_equal(a.matrix_, b.matrix_)
    assert np.allclose(wide.matrix_[:64] * math.sqrt(256), a.matrix_ * math.sqrt(64), rtol=0, atol=1e-12)


def test_invalid_dims():
    with pytest.raises(ParameterError):
        make_layer(0, 4)
    with pytest.raises(ParameterError):
        make_layer(4, 0)


def test_apply_layer_basics():
    relu = make_layer(8, 32, "relu", seed=1)
    ident = RandomGaussianLayer(32, "identity", random_state=1).fit(np.zeros((1, 8)))
    assert np.all(apply_layer(relu, np.zeros(8)) == 0)
    x = np.linspace(-1, 1, 8)
    assert np.array_equal(apply_layer(ident, x), ident.matrix_ @ x)
    out, pre = apply_layer(relu, x), relu.matrix_ @ x
    assert np.all(out >= 0)
    assert np.array_equal(out[pre > 0], pre[pre > 0])
    with pytest.raises(ParameterError):
        apply_layer(relu, np.zeros(7))


def test_sklearn_api():
    layer = RandomGaussianLayer(16, "relu", random_state=2)
    X = np.eye(4)
    Y = layer.fit_transform(X)
    assert Y.shape == (4, 16)
    assert clone(layer).get_params() == layer.get_params()
    assert np.array_equal(clone(layer).fit(X).matrix_, layer.matrix_)
    with pytest.raises(ParameterError):
        layer.transform(np.eye(5))


def test_identity_weights():
    layer = make_identity_layer(5)
    assert np.array_equal(layer.matrix_, np.eye(5))
    with pytest.raises(ParameterError):
        RandomGaussianLayer(4, weights="identity").fit(np.eye(5))


@settings(max_examples=50, deadline=None)
@given(s=slopes, a=bounds, b=bounds, u=st.lists(finite, min_size=5, max_size=5), v=st.lists(finite, min_size=5, max_size=5))
def test_activation_is_nonexpansive(s, a, b, u, v):
    act = ActivationSpec.truncated(s, -a, b)
    u, v = np.array(u), np.array(v)
    assert np.all(np.abs(act(u) - act(v)) <= np.abs(u - v) + 1e-12)


class TestValidateSemiTruncated:
    def test_relu_passes(self):
        assert validate_semi_truncated(ActivationSpec.relu(), 1000).passed

    def test_identity_passes(self):
        assert validate_semi_truncated(ActivationSpec.identity(), 200)

    @settings(max_examples=60, deadline=None)
    @given(s=slopes, a=bounds, b=bounds)
    def test_truncated_family_passes(self, s, a, b):
        assert validate_semi_truncated(ActivationSpec.truncated(s, -a, b), 400).passed

    def test_slope_two_fails(self):
        report = validate_semi_truncated(lambda x: 2 * x, 200)
        assert not report.positive_bound and not report.passed

    def test_offset_fails(self):
        report = validate_semi_truncated(lambda x: x + 0.1, 200)
        assert not report.zero_at_origin and not report.passed

    def test_sigmoid_shape_fails_linearity(self):
        report = validate_semi_truncated(np.tanh, 200)
        assert report.positive_bound and report.negative_bound
        assert not report.linear_then_constant

    def test_leaky_relu_fails_linearity(self):
        report = validate_semi_truncated(lambda x: np.where(x > 0, x, 0.1 * x), 200)
        assert not report.linear_then_constant

    def test_small_grid_rejected(self):
        with pytest.raises(ParameterError):
            validate_semi_truncated(ActivationSpec.relu(), 50)


def test_activation_spec_validation():
    with pytest.raises(ParameterError):
        ActivationSpec.truncated(0.0)
    with pytest.raises(ParameterError):
        ActivationSpec.truncated(1.0, lower=0.5)
    assert ActivationSpec.parse("relu") == ActivationSpec.relu()


class TestForwardStack:
    def test_empty_stack(self, gmm_cloud):
        out = forward_stack([], gmm_cloud)
        assert out == [gmm_cloud]

    def test_identity_layer_renormalized(self, gmm_cloud):
        layer = make_layer(128, 64, "identity", seed=5)
        (out,) = forward_stack([layer], gmm_cloud, renormalize=True)
        raw = gmm_cloud.points @ layer.matrix_.T
        assert np.allclose(out.points, raw / np.linalg.norm(raw, axis=1, keepdims=True))
        assert out.is_unit(1e-12)
        assert np.allclose(out.scales, np.linalg.norm(raw, axis=1))

    def test_without_renormalization(self, gmm_cloud):
        layers = [make_layer(128, 64, "relu", seed=1), make_layer(64, 32, "relu", seed=2)]
        outs = forward_stack(layers, gmm_cloud, renormalize=False)
        assert [o.dim for o in outs] == [64, 32]
        assert outs[0].scales is None
        assert np.allclose(outs[1].points, layers[1].transform(layers[0].transform(gmm_cloud.points)))

    def test_dimension_mismatch(self, gmm_cloud):
        with pytest.raises(ParameterError):
            forward_stack([make_layer(64, 32, seed=0)], gmm_cloud)

    def test_zero_output_raises(self):
        layer = make_layer(2, 1, "relu", seed=0)
        w = layer.matrix_[0]
        x = -w / np.linalg.norm(w)
        cloud = PointCloud(np.stack([w / np.linalg.norm(w), x]))
        with pytest.raises(DegenerateOutputError) as info:
            forward_stack([layer], cloud, renormalize=True)
        assert info.value.layer == 0 and info.value.index == 1

    def test_deterministic(self, gmm_cloud):
        layers = [make_layer(128, 256, seed=0), make_layer(256, 256, seed=9)]
        a = forward_stack(layers, gmm_cloud)
        b = forward_stack(layers, gmm_cloud)
        assert all(np.array_equal(x.points, y.points) for x, y in zip(a, b))

    def test_config_stack(self):
        layers = layer_stack_from_config(
            [{"m": 32, "activation": "relu", "seed": 1}, {"n": 32, "m": 16, "activation": "truncated_linear", "slope": 0.5, "a": -1, "b": 1}],
            n=8,
        )
        assert [(l.n, l.m) for l in layers] == [(8, 32), (32, 16)]
        with pytest.raises(ParameterError):
            layer_stack_from_config([{"n": 9, "m": 4}], n=8)


def test_distances_contract_for_large_m(gmm_cloud):
    d0 = pairwise_distances(gmm_cloud, "euclidean")
    deltas = []
    for m in (64, 1024):
        out = make_layer(128, m, "identity", seed=2).transform(gmm_cloud.points)
        deltas.append(np.max(np.abs(pairwise_distances(out, "euclidean") / d0 - 1)))
    assert deltas[1] < deltas[0]
