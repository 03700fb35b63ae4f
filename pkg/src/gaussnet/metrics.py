"""Distances, distortion reports and empirical covering numbers."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import spearmanr

from .errors import ParameterError
from .models import PointCloud


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    GEODESIC = "geodesic"
    HAMMING_VARIANT = "hamming_variant"


def _points(cloud):
    if isinstance(cloud, PointCloud):
        return cloud.points
    X = np.asarray(cloud, dtype=np.float64)
    if X.ndim != 2:
        raise ParameterError(f"expected a 2-D array of points, got shape {X.shape}")
    return X


def hamming_variant(u, v):
    """Fraction of coordinates where exactly one of ``u``, ``v`` is positive.

    >>> hamming_variant([1, -1, 2], [3, -2, -1])
    0.3333333333333333
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape or u.size == 0:
        raise ParameterError(f"need equal-length non-empty vectors, got {u.shape} and {v.shape}")
    return float(np.count_nonzero((u > 0) != (v > 0)) / u.size)


def geodesic_distance(x, y, tol=1e-6):
    """Normalized angle ``arccos(<x, y>) / pi`` between unit vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ParameterError(f"shape mismatch {x.shape} vs {y.shape}")
    for name, v in (("x", x), ("y", y)):
        if abs(np.linalg.norm(v) - 1.0) > tol:
            raise ParameterError(f"{name} is not a unit vector")
    return float(np.arccos(np.clip(x @ y, -1.0, 1.0)) / math.pi)


def pairwise_distances(X, metric):
    """Condensed pairwise distances in ``(i, j), i < j`` row-major order."""
    X = _points(X)
    metric = Metric(metric)
    iu = np.triu_indices(X.shape[0], k=1)
    if metric is Metric.EUCLIDEAN:
        sq = np.sum(X**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        return np.sqrt(np.maximum(d2[iu], 0.0))
    if metric is Metric.GEODESIC:
        norms = np.linalg.norm(X, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ParameterError("geodesic distance needs unit vectors")
        return np.arccos(np.clip((X @ X.T)[iu], -1.0, 1.0)) / math.pi
    B = (X > 0).astype(np.float64)
    diff = B @ (1.0 - B).T
    return (diff + diff.T)[iu] / X.shape[1]


@dataclass(frozen=True)
class DistortionReport:
    pairs: int
    scale_constant: float
    max_residual: float
    mean_residual: float
    spearman: float
    pre_metric: Metric
    post_metric: Metric


def distortion_report(cloud_pre, cloud_post, pre_metric="geodesic", post_metric="hamming_variant"):
    """Compare pairwise distances before and after an embedding.

    Fits ``d_post ~ c * d_pre`` by least squares through the origin and
    reports the absolute residuals ``|d_post - c * d_pre|`` together with the
    Spearman rank correlation of the two distance lists.
    """
    X, Y = _points(cloud_pre), _points(cloud_post)
    if X.shape[0] != Y.shape[0]:
        raise ParameterError(f"clouds are not aligned: {X.shape[0]} vs {Y.shape[0]} points")
    if X.shape[0] < 2:
        raise ParameterError("distortion report needs at least 2 points")
    pre_metric, post_metric = Metric(pre_metric), Metric(post_metric)
    if pre_metric is Metric.HAMMING_VARIANT:
        raise ParameterError("pre_metric must be euclidean or geodesic")
    if post_metric is Metric.GEODESIC:
        raise ParameterError("post_metric must be hamming_variant or euclidean")
    d_pre = pairwise_distances(X, pre_metric)
    d_post = pairwise_distances(Y, post_metric)
    denom = float(d_pre @ d_pre)
    c = float(d_pre @ d_post) / denom if denom > 0 else 0.0
    resid = np.abs(d_post - c * d_pre)
    if np.ptp(d_pre) == 0 or np.ptp(d_post) == 0:
        rho = 0.0
    else:
        rho = float(spearmanr(d_pre, d_post).statistic)
    return DistortionReport(
        pairs=int(d_pre.size),
        scale_constant=c,
        max_residual=float(resid.max()),
        mean_residual=float(resid.mean()),
        spearman=rho,
        pre_metric=pre_metric,
        post_metric=post_metric,
    )


@dataclass(frozen=True)
class CoveringEstimate:
    radius: float
    net_size: int
    net_indices: np.ndarray
    bound: float = math.nan


def greedy_net(X, eps):
    """Indices of a greedy maximal ``eps``-separated subset, in scan order.

    A point joins the net iff it is farther than ``eps`` from every point
    already in it.
    """
    X = _points(X)
    if not eps > 0:
        raise ParameterError(f"eps must be > 0, got {eps!r}")
    if X.shape[0] == 0:
        raise ParameterError("cloud is empty")
    eps2 = eps * eps
    net = np.empty_like(X)
    idx = []
    for i, x in enumerate(X):
        if idx:
            d2 = np.sum((net[: len(idx)] - x) ** 2, axis=1)
            if d2.min() <= eps2:
                continue
        net[len(idx)] = x
        idx.append(i)
    return np.asarray(idx, dtype=np.int64)


def empirical_covering(cloud, eps, bound=math.nan):
    """Greedy net size at radius ``eps``.

    The net is a maximal ``eps``-separated set: it covers the cloud at
    radius ``eps`` and its size is at most the covering number at
    ``eps / 2``.
    """
    idx = greedy_net(cloud, eps)
    return CoveringEstimate(float(eps), int(idx.size), idx, bound)


@dataclass(frozen=True)
class CoveringCheck:
    radius: float
    radius_pre: float
    net_size_pre: int
    net_size_post: int
    slack: float
    bound_rhs: float
    passed: bool


def verify_covering_recursion(cloud_pre, cloud_post, eps, width_est, m, slack=1.0):
    """Empirical check of ``N(f(MK), eps) <= N(K, eps / (1 + width/sqrt(m)))``.

    Passes iff the greedy net of the output at ``eps`` is no larger than
    ``slack`` times the greedy net of the input at the shrunken radius.
    """
    if slack < 1:
        raise ParameterError(f"slack must be >= 1, got {slack!r}")
    if width_est < 0 or m < 1:
        raise ParameterError("need width_est >= 0 and m >= 1")
    X, Y = _points(cloud_pre), _points(cloud_post)
    if X.shape[0] != Y.shape[0]:
        raise ParameterError(f"clouds are not aligned: {X.shape[0]} vs {Y.shape[0]} points")
    radius_pre = eps / (1.0 + width_est / math.sqrt(m))
    pre = empirical_covering(X, radius_pre).net_size
    post = empirical_covering(Y, eps).net_size
    rhs = slack * pre
    return CoveringCheck(float(eps), radius_pre, pre, post, float(slack), rhs, post <= rhs)
