"""Parametric data models on the unit sphere and seeded samplers.

A model is a union of ``L`` random ``k``-dimensional subspaces of ``R^n``
(optionally shifted by component centers), or an explicit point cloud.
Samples are Gaussian inside a component and then projected onto the sphere.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .rngcore import gaussian_block, stream_id, uniform_at

UNIT_TOL = 1e-9


class ModelKind(str, Enum):
    GMM = "gmm"
    UNION_OF_SUBSPACES = "union_of_subspaces"
    EXPLICIT_CLOUD = "explicit_cloud"


@dataclass(frozen=True)
class PointCloud:
    """Finite set of points stored row-wise in ``points`` (shape ``(N, n)``).

    ``tag`` records provenance. ``scales`` holds the norms divided out when a
    cloud was renormalized onto the sphere (``None`` otherwise). Unit norm is
    not enforced here because layer outputs without renormalization are not
    on the sphere; use :meth:`check_unit` where it matters.
    """

    points: np.ndarray
    tag: str = ""
    scales: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError(f"points must be a non-empty 2-D array, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def is_unit(self, tol=UNIT_TOL):
        return bool(np.all(np.abs(np.linalg.norm(self.points, axis=1) - 1.0) <= tol))

    def check_unit(self, tol=UNIT_TOL):
        if not self.is_unit(tol):
            worst = np.max(np.abs(np.linalg.norm(self.points, axis=1) - 1.0))
            raise ParameterError(f"cloud {self.tag!r} is not on the unit sphere (max deviation {worst:.3g})")
        return self


@dataclass(frozen=True)
class ManifoldModel:
    kind: ModelKind
    n: int
    k: int
    L: int
    seed: int = 0
    bases: tuple = field(default=(), repr=False)
    centers: Optional[np.ndarray] = field(default=None, repr=False)
    cloud: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.L < 1:
            raise ParameterError(f"L must be >= 1, got {self.L}")
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.kind is not ModelKind.EXPLICIT_CLOUD:
            if len(self.bases) != self.L:
                raise ParameterError(f"expected {self.L} bases, got {len(self.bases)}")
            for j, B in enumerate(self.bases):
                if B.shape != (self.n, self.k):
                    raise ParameterError(f"basis {j} has shape {B.shape}, expected {(self.n, self.k)}")
                if np.max(np.abs(B.T @ B - np.eye(self.k))) > UNIT_TOL:
                    raise ParameterError(f"basis {j} is not orthonormal")

    def to_config(self):
        """Flat key/value description (bases are regenerated from the seed)."""
        return {
            "kind": self.kind.value,
            "n": self.n,
            "k": self.k,
            "L": self.L,
            "seed": self.seed,
            "centers": self.centers is not None,
        }


def _check_dims(n, k, L):
    for name, v in (("n", n), ("k", k), ("L", L)):
        if isinstance(v, bool) or int(v) != v:
            raise ParameterError(f"{name} must be an integer, got {v!r}")
    if L < 1:
        raise ParameterError(f"L must be >= 1, got {L}")
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")


def random_orthonormal_basis(n, k, seed, index=0):
    """QR of a seeded ``n x k`` Gaussian matrix with ``diag(R) >= 0``."""
    A = gaussian_block(seed, stream_id("basis", index), (n, k))
    Q, R = np.linalg.qr(A)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs


def _make_subspace_model(kind, n, k, L, seed, centers):
    _check_dims(n, k, L)
    bases = tuple(random_orthonormal_basis(n, k, seed, j) for j in range(L))
    c = None
    if centers:
        c = gaussian_block(seed, stream_id("center"), (L, n))
        c /= np.linalg.norm(c, axis=1, keepdims=True)
    return ManifoldModel(kind, int(n), int(k), int(L), int(seed), bases, c)


def make_gmm_model(n, k, L, seed, centers=False):
    """Union of ``L`` random ``k``-dimensional Gaussian components in ``R^n``.

    Parameters
    ----------
    n, k, L : int
        Ambient dimension, component dimension and number of components.
    seed : int
        Master seed; identical arguments give bit-identical models.
    centers : bool, default=False
        Attach a random unit center to each component. Centered models are
        not covered by the closed-form covering bound.
    """
    return _make_subspace_model(ModelKind.GMM, n, k, L, seed, centers)


def make_union_of_subspaces(n, k, L, seed):
    return _make_subspace_model(ModelKind.UNION_OF_SUBSPACES, n, k, L, seed, False)


def make_explicit_cloud(points, seed=0):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ParameterError("explicit cloud needs a non-empty 2-D array")
    norms = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ParameterError("explicit cloud points must have unit norm")
    n = pts.shape[1]
    return ManifoldModel(ModelKind.EXPLICIT_CLOUD, n, n, 1, int(seed), cloud=pts)


def model_from_config(cfg):
    kind = ModelKind(cfg.get("kind", "gmm"))
    n, k, L, seed = (int(cfg[key]) for key in ("n", "k", "L", "seed"))
    if kind is ModelKind.GMM:
        return make_gmm_model(n, k, L, seed, centers=bool(cfg.get("centers", False)))
    if kind is ModelKind.UNION_OF_SUBSPACES:
        return make_union_of_subspaces(n, k, L, seed)
    raise ParameterError("explicit clouds cannot be rebuilt from a config")


def sample_points(model, count, seed):
    """Draw ``count`` unit vectors from ``model``.

    Point ``i`` picks its component from uniform draw ``i`` and its
    coefficients from Gaussian counters ``i*k .. i*k + k - 1``, so the first
    ``N`` points of a larger sample equal a sample of size ``N``.
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count!r}")
    count = int(count)
    tag = f"{model.kind.value}(n={model.n},k={model.k},L={model.L},seed={model.seed})|count={count}|seed={seed}"

    if model.kind is ModelKind.EXPLICIT_CLOUD:
        size = model.cloud.shape[0]
        if count > size:
            raise ParameterError(f"requested {count} points from an explicit cloud of {size}")
        keys = uniform_at(seed, stream_id("cloud-subsample"), np.arange(size))
        idx = np.sort(np.argsort(keys, kind="stable")[:count])
        return PointCloud(model.cloud[idx].copy(), tag)

    u = uniform_at(seed, stream_id("component"), np.arange(count))
    comp = np.minimum((u * model.L).astype(np.int64), model.L - 1)
    coef = gaussian_block(seed, stream_id("coefficients"), (count, model.k))
    bases = np.stack(model.bases)  # (L, n, k)
    pts = np.einsum("ink,ik->in", bases[comp], coef)
    if model.centers is not None:
        pts += model.centers[comp]
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms == 0):
        raise DegenerateInputError("sampled a zero vector; cannot project to the sphere")
    return PointCloud(pts / norms[:, None], tag)


def component_of(model, x):
    """Index of the component whose subspace is closest to ``x``."""
    x = np.asarray(x, dtype=np.float64)
    dists = [np.linalg.norm(x - B @ (B.T @ x)) for B in model.bases]
    return int(np.argmin(dists))
