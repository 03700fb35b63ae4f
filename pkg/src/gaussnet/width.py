"""Gaussian mean width: Monte Carlo estimation and closed-form bounds.

The Monte Carlo estimator evaluates ``E sup_{x,y} <g, x - y>`` over a finite
cloud. For each probe ``g`` the sup over pairs is ``max <g,x> - min <g,x>``,
so one probe costs a single matrix-vector product.

The bound calculators take explicit constants (default 1) because only the
order of each bound is known.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ContractViolationError, DegenerateInputError, ParameterError
from .models import PointCloud
from .rngcore import gaussian_block, stream_id

PROBE_STREAM = stream_id("mean-width-probe")
_CHUNK = 2048


class CoveringSource(str, Enum):
    GMM_FORMULA = "gmm_formula"
    EMPIRICAL_NET = "empirical_net"
    LAYER_RECURSION = "layer_recursion"


@dataclass(frozen=True)
class MeanWidthEstimate:
    value: float
    std_error: float
    probes: int
    cloud_size: int


@dataclass(frozen=True)
class CoveringBound:
    radius: float
    value: float
    source: CoveringSource

    def __float__(self):
        return float(self.value)


def _as_points(cloud):
    if isinstance(cloud, PointCloud):
        return cloud.points
    return check_array(cloud, dtype=np.float64)


def probe_sups(points, probes, seed, n_jobs=1):
    """Per-probe values ``max_x <g,x> - min_x <g,x>``.

    Probe ``p`` uses Gaussian counters ``p*n .. p*n + n - 1`` so the result
    does not depend on chunking or on ``n_jobs``.
    """
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[1]
    starts = range(0, probes, _CHUNK)

    def chunk(start):
        rows = min(_CHUNK, probes - start)
        G = gaussian_block(seed, PROBE_STREAM, (rows, n), offset=start * n)
        proj = G @ X.T
        return proj.max(axis=1) - proj.min(axis=1)

    if n_jobs == 1:
        parts = [chunk(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(chunk, starts))
    return np.concatenate(parts)


def estimate_mean_width(cloud, probes, seed, n_jobs=1):
    """Monte Carlo mean width of a finite cloud.

    This estimates the width of the cloud itself, which is a lower bound on
    the width of any set containing it.

    Parameters
    ----------
    cloud : PointCloud or array-like of shape (N, n)
    probes : int
        Number of Gaussian probe vectors.
    seed : int
    n_jobs : int, default=1
        Worker threads. Results are bit-identical for every value.

    Returns
    -------
    MeanWidthEstimate
    """
    X = _as_points(cloud)
    if X.shape[0] < 2:
        raise DegenerateInputError("mean width needs at least 2 points")
    if isinstance(probes, bool) or int(probes) != probes or probes < 1:
        raise ParameterError(f"probes must be a positive integer, got {probes!r}")
    probes = int(probes)
    sups = probe_sups(X, probes, seed, n_jobs)
    std = float(sups.std(ddof=1)) if probes > 1 else 0.0
    return MeanWidthEstimate(
        value=float(sups.mean()),
        std_error=std / math.sqrt(probes),
        probes=probes,
        cloud_size=X.shape[0],
    )


class MeanWidthEstimator(BaseEstimator):
    """Estimator wrapper around :func:`estimate_mean_width`.

    Parameters
    ----------
    probes : int, default=10000
    random_state : int, default=0
    n_jobs : int, default=1

    Attributes
    ----------
    width_ : float
    std_error_ : float
    estimate_ : MeanWidthEstimate
    """

    def __init__(self, probes=10000, random_state=0, n_jobs=1):
        self.probes = probes
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.estimate_ = estimate_mean_width(X, self.probes, self.random_state, self.n_jobs)
        self.width_ = self.estimate_.value
        self.std_error_ = self.estimate_.std_error
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "width_")
        return self.width_


def _check_positive(name, value):
    if not value > 0:
        raise ParameterError(f"{name} must be > 0, got {value!r}")


def log_covering_number_gmm(L, k, eps):
    """Natural log of the GMM covering number (0 where the number is 1)."""
    if L < 1 or k < 1:
        raise ParameterError(f"need L >= 1 and k >= 1, got L={L}, k={k}")
    eps = np.asarray(eps, dtype=np.float64)
    if np.any(~(eps > 0)):
        raise ParameterError("eps must be > 0")
    with np.errstate(divide="ignore"):
        out = np.where(eps < 1.0, math.log(L) + k * np.log1p(2.0 / eps), 0.0)
    return float(out) if out.ndim == 0 else out


def covering_number_gmm(L, k, eps):
    """``L * (1 + 2/eps)**k`` for ``eps < 1``, else 1.

    >>> covering_number_gmm(2, 3, 0.5).value
    250.0
    """
    _check_positive("eps", eps)
    if eps >= 1.0:
        value = 1.0
    else:
        value = float(L) * (1.0 + 2.0 / eps) ** k
    if L < 1 or k < 1:
        raise ParameterError(f"need L >= 1 and k >= 1, got L={L}, k={k}")
    return CoveringBound(float(eps), value, CoveringSource.GMM_FORMULA)


def gmm_covering(L, k):
    """Covering function ``eps -> N`` for the GMM formula, vectorized."""
    if L < 1 or k < 1:
        raise ParameterError(f"need L >= 1 and k >= 1, got L={L}, k={k}")

    def covering(eps):
        return np.exp(log_covering_number_gmm(L, k, eps))

    covering.log = lambda eps: log_covering_number_gmm(L, k, eps)
    return covering


def mean_width_gmm_bound(k, L, constant=1.0):
    """``constant * sqrt(k + ln L)``."""
    if k < 1 or L < 1:
        raise ParameterError(f"need k >= 1 and L >= 1, got k={k}, L={L}")
    _check_positive("constant", constant)
    return constant * math.sqrt(k + math.log(L))


def _log_covering_values(covering, eps):
    log_fn = getattr(covering, "log", None)
    if log_fn is not None:
        logs = np.asarray(log_fn(eps), dtype=np.float64)
        if np.any(logs < 0):
            raise ContractViolationError("covering function returned a value < 1")
        return logs
    try:
        vals = np.asarray(covering(eps), dtype=np.float64)
        if vals.shape != eps.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(covering(float(e))) for e in eps])
    if np.any(np.isnan(vals)) or np.any(vals < 1):
        raise ContractViolationError("covering function returned a value < 1")
    return np.log(vals)


def _midpoint(covering, radius_max, intervals):
    h = radius_max / intervals
    eps = (np.arange(intervals) + 0.5) * h
    logs = _log_covering_values(covering, eps)
    if np.any(~np.isfinite(logs)):
        raise ContractViolationError("covering function is not finite on (0, radius_max]")
    return float(np.sqrt(np.maximum(logs, 0.0)).sum() * h)


def dudley_bound(covering, radius_max=2.0, constant=1.0, intervals=2048, rtol=1e-5, max_intervals=2**21):
    """Dudley entropy integral ``constant * int_0^R sqrt(log N(eps)) d eps``.

    Composite midpoint rule, starting at ``intervals`` subintervals and
    doubling until two successive values agree to ``rtol`` or
    ``max_intervals`` is reached. The integrand has an integrable
    ``sqrt(log(1/eps))`` singularity at 0, which the midpoint rule never
    evaluates.

    ``covering`` maps a radius (or an array of radii) to a value ``>= 1``.
    If it carries a ``log`` attribute (as :func:`gmm_covering` does) that is
    used instead, which avoids overflow for large ``k``.
    """
    _check_positive("radius_max", radius_max)
    _check_positive("constant", constant)
    if intervals < 2000:
        raise ParameterError("intervals must be >= 2000")
    prev = _midpoint(covering, radius_max, intervals)
    while intervals < max_intervals:
        intervals *= 2
        cur = _midpoint(covering, radius_max, intervals)
        done = abs(cur - prev) <= rtol * abs(cur)
        prev = cur
        if done:
            break
    return constant * prev


def sudakov_net_size(width, eps, constant=1.0):
    """``exp(constant * width**2 / eps**2)``; ``inf`` on overflow."""
    _check_positive("eps", eps)
    _check_positive("constant", constant)
    if width < 0:
        raise ParameterError(f"width must be >= 0, got {width!r}")
    try:
        return math.exp(constant * width**2 / eps**2)
    except OverflowError:
        return math.inf


def log_sudakov_net_size(width, eps, constant=1.0):
    _check_positive("eps", eps)
    return constant * width**2 / eps**2


def layer_covering_recursion(base, width, m):
    """Covering function of ``f(MK)`` implied by the per-layer bound.

    Returns ``eps -> base(eps / (1 + width / sqrt(m)))``. Composing the result
    across layers tracks the worst-case growth through a stack.
    """
    if width < 0:
        raise ParameterError(f"width must be >= 0, got {width!r}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m!r}")
    factor = 1.0 + width / math.sqrt(m)

    def _value(v):
        return v.value if isinstance(v, CoveringBound) else v

    def covering(eps):
        if np.ndim(eps) == 0:
            value = _value(base(eps / factor))
            return CoveringBound(float(eps), float(value), CoveringSource.LAYER_RECURSION)
        scaled = np.asarray(eps, dtype=np.float64) / factor
        try:
            out = np.asarray(base(scaled), dtype=np.float64)
            if out.shape == scaled.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([_value(base(float(e))) for e in scaled.ravel()]).reshape(scaled.shape)

    base_log = getattr(base, "log", None)
    if base_log is not None:
        covering.log = lambda eps: base_log(np.asarray(eps) / factor)
    covering.factor = factor
    return covering


# Classical explicit constant of Dudley's inequality, E sup_t X_t <= 12 *
# integral sqrt(log N), doubled because the mean width takes the sup over
# pairs: E sup <g, x - y> = 2 E sup <g, x>.
DUDLEY_PAIR_CONSTANT = 24.0
