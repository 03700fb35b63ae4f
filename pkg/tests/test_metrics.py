import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussnet import (
    ParameterError,
    distortion_report,
    empirical_covering,
    geodesic_distance,
    hamming_variant,
    make_identity_layer,
    make_layer,
    verify_covering_recursion,
)
from gaussnet.metrics import Metric, greedy_net, pairwise_distances

vectors = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=8)


class TestHamming:
    def test_examples(self):
        assert hamming_variant([1, 2], [3, 4]) == 0
        assert hamming_variant([1, -1, 2], [3, -2, -1]) == pytest.approx(1 / 3)
        assert hamming_variant(np.ones(6), -np.ones(6)) == 1

    def test_zero_is_not_positive(self):
        assert hamming_variant([0.0, 1.0], [-1.0, 1.0]) == 0

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            hamming_variant([1, 2], [1, 2, 3])

    def test_exhaustive_patterns_small_dim(self):
        # every pattern over {-1, 0, 1}^3, all triples
        pats = [np.array(p, dtype=float) for p in itertools.product((-1, 0, 1), repeat=3)]
        for u, v in itertools.product(pats, repeat=2):
            assert hamming_variant(u, v) == hamming_variant(v, u)
        for u, v, w in itertools.product(pats, repeat=3):
            assert hamming_variant(u, w) <= hamming_variant(u, v) + hamming_variant(v, w) + 1e-15

    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_positive_scaling_invariance(self, data):
        u = np.array(data.draw(vectors))
        v = np.array(data.draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=len(u), max_size=len(u))))
        scale = np.array(data.draw(st.lists(st.floats(1e-3, 1e3), min_size=len(u), max_size=len(u))))
        assert hamming_variant(u * scale, v) == hamming_variant(u, v)

    def test_relu_preserves_positivity_pattern(self, rng):
        u, v = rng.standard_normal(50), rng.standard_normal(50)
        relu = lambda x: np.maximum(x, 0)
        assert hamming_variant(relu(u), relu(v)) == hamming_variant(u, v)

    def test_pairwise_matches_scalar(self, rng):
        X = rng.standard_normal((6, 9))
        d = pairwise_distances(X, Metric.HAMMING_VARIANT)
        ref = [hamming_variant(X[i], X[j]) for i, j in itertools.combinations(range(6), 2)]
        assert np.allclose(d, ref)


class TestGeodesic:
    def test_examples(self):
        x, y = np.array([1.0, 0, 0]), np.array([0.0, 1, 0])
        assert geodesic_distance(x, x) == 0
        assert geodesic_distance(x, -x) == 1
        assert geodesic_distance(x, y) == pytest.approx(0.5)

    def test_rejects_non_unit(self):
        with pytest.raises(ParameterError):
            geodesic_distance(np.array([2.0, 0]), np.array([1.0, 0]))

    def test_pairwise_matches_scalar(self, gmm_cloud):
        X = gmm_cloud.points[:7]
        d = pairwise_distances(X, "geodesic")
        ref = [geodesic_distance(X[i], X[j]) for i, j in itertools.combinations(range(7), 2)]
        assert np.allclose(d, ref)


class TestDistortion:
    def test_identity_embedding(self, gmm_cloud):
        rep = distortion_report(gmm_cloud, gmm_cloud.points, "euclidean", "euclidean")
        assert rep.scale_constant == pytest.approx(1.0)
        assert rep.max_residual < 1e-12
        assert rep.spearman == pytest.approx(1.0)
        assert rep.pairs == 200 * 199 // 2

    def test_tiny_m_gives_large_residuals(self, gmm_cloud):
        out = make_layer(128, 4, "relu", seed=0).transform(gmm_cloud.points)
        rep = distortion_report(gmm_cloud, out, "geodesic", "hamming_variant")
        assert rep.max_residual > 0.3

    def test_concentrates_with_m(self, gmm_cloud):
        reps = [
            distortion_report(gmm_cloud, make_layer(128, m, "relu", seed=3).transform(gmm_cloud.points))
            for m in (64, 1024)
        ]
        assert reps[1].max_residual < reps[0].max_residual
        assert reps[1].spearman > reps[0].spearman
        # hamming of sign patterns concentrates around the normalized angle
        assert reps[1].scale_constant == pytest.approx(1.0, abs=0.05)

    def test_permutation_invariance(self, gmm_cloud, rng):
        out = make_layer(128, 256, "relu", seed=1).transform(gmm_cloud.points)
        perm = rng.permutation(200)
        a = distortion_report(gmm_cloud, out)
        b = distortion_report(gmm_cloud.points[perm], out[perm])
        assert a.max_residual == pytest.approx(b.max_residual, rel=1e-12)
        assert a.mean_residual == pytest.approx(b.mean_residual, rel=1e-9)
        assert a.scale_constant == pytest.approx(b.scale_constant, rel=1e-12)

    def test_misaligned(self, gmm_cloud):
        with pytest.raises(ParameterError):
            distortion_report(gmm_cloud, gmm_cloud.points[:10])

    def test_invariants(self, gmm_cloud):
        rep = distortion_report(gmm_cloud, make_layer(128, 32, "relu", seed=0).transform(gmm_cloud.points))
        assert rep.max_residual >= rep.mean_residual >= 0
        assert -1 <= rep.spearman <= 1


class TestCovering:
    def test_single_point(self):
        assert empirical_covering(np.array([[1.0, 0.0]]), 0.1).net_size == 1

    def test_antipodal(self):
        assert empirical_covering(np.array([[1.0, 0.0], [-1.0, 0.0]]), 1.0).net_size == 2

    def test_rejects_bad_radius(self):
        with pytest.raises(ParameterError):
            empirical_covering(np.eye(2), 0)

    def test_net_is_covering_and_separated(self, gmm_cloud):
        X = gmm_cloud.points
        idx = greedy_net(X, 0.5)
        net = X[idx]
        d = np.linalg.norm(X[:, None, :] - net[None, :, :], axis=2)
        assert np.all(d.min(axis=1) <= 0.5)
        nd = np.linalg.norm(net[:, None] - net[None], axis=2) + np.eye(len(net)) * 10
        assert nd.min() > 0.5

    def test_monotone_in_radius(self, gmm_cloud):
        sizes = [empirical_covering(gmm_cloud, e).net_size for e in (0.25, 0.5, 1.0)]
        assert sizes[0] >= sizes[1] >= sizes[2]
        assert sizes[0] <= len(gmm_cloud)

    @settings(max_examples=30, deadline=None)
    @given(e1=st.floats(0.01, 2.5), e2=st.floats(0.01, 2.5))
    def test_monotone_property(self, gmm_cloud, e1, e2):
        lo, hi = min(e1, e2), max(e1, e2)
        assert empirical_covering(gmm_cloud, lo).net_size >= empirical_covering(gmm_cloud, hi).net_size


class TestCoveringRecursion:
    def test_identity_control(self, gmm_cloud):
        layer = make_identity_layer(128)
        post = layer.transform(gmm_cloud.points)
        for eps in (0.25, 0.5, 1.0):
            res = verify_covering_recursion(gmm_cloud, post, eps, 0.0, 128, slack=1.0)
            assert res.net_size_pre == res.net_size_post and res.passed

    def test_radius_beyond_diameter(self, gmm_cloud):
        post = make_layer(128, 256, "relu", seed=0).transform(gmm_cloud.points)
        res = verify_covering_recursion(gmm_cloud, post, 2.5, 4.0, 256, slack=1.0)
        assert res.net_size_pre == res.net_size_post == 1 and res.passed

    def test_relu_layer(self, gmm_cloud):
        post = make_layer(128, 1024, "relu", seed=4).transform(gmm_cloud.points)
        res = verify_covering_recursion(gmm_cloud, post, 0.5, 4.5, 1024, slack=2.0)
        assert res.passed
        assert res.radius_pre == pytest.approx(0.5 / (1 + 4.5 / 32))
        assert res.bound_rhs == 2.0 * res.net_size_pre

    def test_bad_slack(self, gmm_cloud):
        with pytest.raises(ParameterError):
            verify_covering_recursion(gmm_cloud, gmm_cloud.points, 0.5, 1.0, 10, slack=0.5)
