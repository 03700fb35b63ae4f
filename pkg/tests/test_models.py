import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussnet import ParameterError, make_explicit_cloud, make_gmm_model, make_union_of_subspaces, sample_points
from gaussnet.rngcore import gaussian_block, stream_id
from gaussnet.models import ManifoldModel, ModelKind, component_of, model_from_config


def test_full_dimensional_basis():
    model = make_gmm_model(4, 4, 1, seed=3)
    B = model.bases[0]
    assert np.allclose(B.T @ B, np.eye(4), atol=1e-9)
    assert np.linalg.matrix_rank(B) == 4


def test_bases_orthonormal():
    model = make_gmm_model(128, 4, 3, seed=7)
    assert len(model.bases) == 3
    for B in model.bases:
        assert B.shape == (128, 4)
        assert np.allclose(np.linalg.norm(B, axis=0), 1.0, atol=1e-9)
        assert np.max(np.abs(B.T @ B - np.eye(4))) < 1e-9


def test_qr_sign_convention():
    # diag(R) >= 0: column j of Q has nonnegative overlap with raw column j
    model = make_gmm_model(10, 3, 2, seed=5)
    for j, B in enumerate(model.bases):
        A = gaussian_block(5, stream_id("basis", j), (10, 3))
        assert np.all(np.diag(B.T @ A) >= 0)


def test_model_deterministic():
    a = make_gmm_model(8, 2, 2, seed=1)
    b = make_gmm_model(8, 2, 2, seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(a.bases, b.bases))


@pytest.mark.parametrize("n,k,L", [(4, 5, 1), (4, 0, 1), (4, 2, 0)])
def test_invalid_dimensions(n, k, L):
    with pytest.raises(ParameterError):
        make_gmm_model(n, k, L, seed=0)


def test_one_dimensional_component_gives_antipodal_pair():
    model = make_gmm_model(6, 1, 1, seed=2)
    b = model.bases[0][:, 0]
    pts = sample_points(model, 5, seed=9).points
    for p in pts:
        assert min(np.linalg.norm(p - b), np.linalg.norm(p + b)) < 1e-12


def test_points_on_components_and_sphere(gmm):
    cloud = sample_points(gmm, 200, seed=4)
    assert cloud.is_unit(1e-9)
    for p in cloud.points:
        dist = min(np.linalg.norm(p - B @ (B.T @ p)) for B in gmm.bases)
        assert dist < 1e-9


def test_sampling_deterministic_and_prefix_stable(gmm):
    a = sample_points(gmm, 100, seed=3).points
    b = sample_points(gmm, 100, seed=3).points
    c = sample_points(gmm, 150, seed=3).points
    assert np.array_equal(a, b)
    assert np.array_equal(a, c[:100])


def test_sampling_uses_all_components(gmm):
    pts = sample_points(gmm, 300, seed=0).points
    counts = np.bincount([component_of(gmm, p) for p in pts], minlength=3)
    assert np.all(counts > 60)


def test_centers_option():
    model = make_gmm_model(20, 2, 2, seed=1, centers=True)
    assert model.centers.shape == (2, 20)
    assert sample_points(model, 10, seed=0).is_unit()


def test_explicit_cloud(rng):
    X = rng.standard_normal((10, 5))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    model = make_explicit_cloud(X)
    sub = sample_points(model, 4, seed=1).points
    assert sub.shape == (4, 5)
    assert all(any(np.array_equal(s, x) for x in X) for s in sub)
    with pytest.raises(ParameterError):
        sample_points(model, 11, seed=1)
    with pytest.raises(ParameterError):
        make_explicit_cloud(X * 2)


def test_bad_count(gmm):
    with pytest.raises(ParameterError):
        sample_points(gmm, 0, seed=0)


def test_config_round_trip():
    model = make_union_of_subspaces(12, 3, 2, seed=4)
    again = model_from_config(model.to_config())
    assert again.kind is ModelKind.UNION_OF_SUBSPACES
    assert all(np.array_equal(x, y) for x, y in zip(model.bases, again.bases))


def test_rejects_non_orthonormal_basis():
    with pytest.raises(ParameterError):
        ManifoldModel(ModelKind.GMM, 3, 1, 1, bases=(np.array([[2.0], [0.0], [0.0]]),))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 30), data=st.data(), seed=st.integers(0, 2**31))
def test_sampled_points_unit_norm(n, data, seed):
    k = data.draw(st.integers(1, n))
    L = data.draw(st.integers(1, 4))
    cloud = sample_points(make_gmm_model(n, k, L, seed), 20, seed + 1)
    assert cloud.is_unit(1e-9)
