"""Recovering a layer's input from its output under a union-of-subspaces model.

Two constructions are provided:

* ``recover_linear``: back-project ``z = M^T q``, project ``z`` onto each
  component subspace, normalize, and keep the candidate best correlated
  with ``q``. For linear activations the per-component step is an exact
  least-squares solve instead of a projection.
* ``recover_iterative``: projected gradient descent on
  ``0.5 * ||f(M z) - q||^2`` inside the selected component, with
  renormalization onto the sphere after every step.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DegenerateObservationError, NumericalFailureError, ParameterError
from .models import ModelKind, sample_points
from .netsim import ActivationSpec, make_layer
from .rngcore import stream_id, uniform_at

_ZERO = 1e-300


class RecoveryMethod(str, Enum):
    LINEAR = "linear"
    ITERATIVE = "iterative_projected"


@dataclass(frozen=True)
class RecoveryResult:
    estimate: np.ndarray
    component_index: int
    residual: float
    method: RecoveryMethod
    iterations: int = 0
    error: Optional[float] = None


@dataclass(frozen=True)
class SweepResult:
    """Per-trial rows plus per-``m`` medians and the log-log slope."""

    rows: list
    medians: dict = field(default_factory=dict)
    slopes: dict = field(default_factory=dict)


def _check_observation(layer, q):
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != layer.m:
        raise ParameterError(f"observation must have length {layer.m}, got shape {q.shape}")
    return q


def _check_model(model, layer):
    if model.kind is ModelKind.EXPLICIT_CLOUD:
        raise ParameterError("recovery needs a model with component bases")
    if model.n != layer.n:
        raise ParameterError(f"model dimension {model.n} does not match layer input {layer.n}")


def _residual(layer, x, q):
    return float(np.linalg.norm(layer.activation_(layer.matrix_ @ x) - q))


def recovery_error(x, estimate, k):
    """Euclidean error; for ``k == 1`` the sign of the estimate is ignored."""
    err = float(np.linalg.norm(x - estimate))
    if k == 1:
        err = min(err, float(np.linalg.norm(x + estimate)))
    return err


def recover_linear(layer, q, model, truth=None):
    """Linear estimate of the input of ``layer`` from ``q = f(M x)``.

    The component is chosen by maximizing ``<q, f(M x_j)>``, or for linear
    activations by minimizing the residual ``||f(M x_j) - q||`` (the
    correlation rule can prefer a wrong component whose candidate has a
    larger image). Ties go to the lowest index.
    """
    _check_model(model, layer)
    q = _check_observation(layer, q)
    M, act = layer.matrix_, layer.activation_
    z = M.T @ q
    best, best_score, best_j = None, -math.inf, -1
    for j, B in enumerate(model.bases):
        if act.is_linear:
            coef, *_ = np.linalg.lstsq(M @ B, q / act.slope, rcond=None)
        else:
            coef = B.T @ z
        cand = B @ coef
        norm = np.linalg.norm(cand)
        if norm <= _ZERO:
            continue
        cand /= norm
        image = act(M @ cand)
        score = -float(np.linalg.norm(image - q)) if act.is_linear else float(q @ image)
        if score > best_score:
            best, best_score, best_j = cand, score, j
    if best is None:
        raise DegenerateObservationError("observation projects to zero in every component")
    err = None if truth is None else recovery_error(np.asarray(truth, dtype=np.float64), best, model.k)
    return RecoveryResult(best, best_j, _residual(layer, best, q), RecoveryMethod.LINEAR, 0, err)


def spectral_step(M, iterations=20):
    """``1 / lambda_max(M^T M)`` from a deterministic power iteration."""
    v = np.ones(M.shape[1]) / math.sqrt(M.shape[1])
    lam = 0.0
    for _ in range(iterations):
        w = M.T @ (M @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0:
            raise DegenerateObservationError("layer matrix is zero")
        v = w / lam
    return 1.0 / lam


def recover_iterative(layer, q, model, init, max_iter=500, step=None, tol=1e-12, truth=None):
    """Refine ``init`` by projected gradient descent inside its component.

    Each step moves along ``-M^T (f'(M z) * (f(M z) - q))``, projects onto
    the component subspace and renormalizes. Iteration stops when the
    residual improves by less than ``tol`` or after ``max_iter`` steps. The
    best iterate seen is returned, so the residual never exceeds that of
    ``init``. For linear activations the minimizer is computed directly.
    """
    _check_model(model, layer)
    q = _check_observation(layer, q)
    if max_iter < 1 or tol < 0:
        raise ParameterError("need max_iter >= 1 and tol >= 0")
    if step is not None and not step > 0:
        raise ParameterError(f"step must be > 0, got {step!r}")
    M, act = layer.matrix_, layer.activation_
    j = init.component_index
    B = model.bases[j]
    best, best_res = np.asarray(init.estimate, dtype=np.float64), float(init.residual)
    iterations = 0

    if best_res > 0 and act.is_linear:
        coef, *_ = np.linalg.lstsq(M @ B, q / act.slope, rcond=None)
        cand = B @ coef
        norm = np.linalg.norm(cand)
        iterations = 1
        if norm > _ZERO:
            cand /= norm
            res = _residual(layer, cand, q)
            if res < best_res:
                best, best_res = cand, res
    elif best_res > 0:
        if step is None:
            step = spectral_step(M)
        MB = M @ B
        c = B.T @ best
        prev = best_res
        for it in range(1, max_iter + 1):
            u = MB @ c
            r = act(u) - q
            grad = MB.T @ (act.derivative(u) * r)
            c = c - step * grad
            norm = np.linalg.norm(c)
            if not np.isfinite(norm):
                raise NumericalFailureError(f"non-finite iterate at step {it}")
            if norm <= _ZERO:
                break
            c /= norm
            res = float(np.linalg.norm(act(MB @ c) - q))
            iterations = it
            if res < best_res:
                best, best_res = B @ c, res
            if prev - res < tol:
                break
            prev = res
    err = None if truth is None else recovery_error(np.asarray(truth, dtype=np.float64), best, model.k)
    return RecoveryResult(best, j, best_res, RecoveryMethod.ITERATIVE, iterations, err)


class LayerInverter(BaseEstimator):
    """Estimator that maps layer outputs back to unit vectors in the model.

    Parameters
    ----------
    layer : RandomGaussianLayer
        A fitted layer.
    model : ManifoldModel
        Model with component bases.
    refine : bool, default=True
        Run :func:`recover_iterative` after the linear estimate.
    max_iter : int, default=500
    step : float or None, default=None
        Gradient step; ``None`` uses ``1 / lambda_max(M^T M)``.
    tol : float, default=1e-12
    """

    def __init__(self, layer, model, refine=True, max_iter=500, step=None, tol=1e-12):
        self.layer = layer
        self.model = model
        self.refine = refine
        self.max_iter = max_iter
        self.step = step
        self.tol = tol

    def fit(self, X=None, y=None):
        check_is_fitted(self.layer, "matrix_")
        _check_model(self.model, self.layer)
        self.step_ = self.step if self.step is not None else spectral_step(self.layer.matrix_)
        self.n_features_in_ = self.layer.m
        return self

    def recover(self, q, truth=None):
        check_is_fitted(self, "step_")
        res = recover_linear(self.layer, q, self.model, truth)
        if self.refine:
            res = recover_iterative(self.layer, q, self.model, res, self.max_iter, self.step_, self.tol, truth)
        return res

    def predict(self, Q):
        Q = check_array(Q, dtype=np.float64)
        return np.stack([self.recover(q).estimate for q in Q])


def loglog_slope(ms, errors):
    """Least-squares slope of ``log(error)`` against ``log(m)``.

    Returns ``nan`` when any error is at the floating-point floor.
    """
    e = np.asarray(errors, dtype=np.float64)
    if np.any(e <= 1e-12):
        return math.nan
    return float(np.polyfit(np.log(np.asarray(ms, dtype=np.float64)), np.log(e), 1)[0])


def recovery_error_sweep(
    model,
    m_list,
    trials,
    seed=0,
    activation="relu",
    methods=(RecoveryMethod.LINEAR, RecoveryMethod.ITERATIVE),
    max_iter=500,
    n_jobs=1,
):
    """Median recovery error as a function of the layer width ``m``.

    Trial ``t`` draws point ``t`` of a single sample from ``model`` and uses
    layer seed ``hash(seed, t)`` for every ``m``, so layers of different
    widths share their leading rows.

    Returns
    -------
    SweepResult
        ``rows`` holds dicts with keys ``m, trial, method, residual, error,
        iterations``.
    """
    m_list = [int(m) for m in m_list]
    if len(m_list) < 3 or m_list != sorted(m_list) or len(set(m_list)) != len(m_list):
        raise ParameterError("m_list needs at least 3 strictly increasing values")
    if m_list[-1] < 10 * m_list[0]:
        raise ParameterError("m_list must span at least one decade")
    if trials < 10:
        raise ParameterError(f"trials must be >= 10, got {trials}")
    methods = [RecoveryMethod(mth) for mth in methods]
    act = ActivationSpec.parse(activation)
    xs = sample_points(model, trials, seed).points
    layer_seeds = (uniform_at(seed, stream_id("sweep-layer-seed"), np.arange(trials)) * 2**53).astype(np.int64)

    def run(task):
        m, t = task
        layer = make_layer(model.n, m, act, int(layer_seeds[t]))
        x = xs[t]
        q = layer.transform(x[None, :])[0]
        out = []
        lin = recover_linear(layer, q, model, truth=x)
        if RecoveryMethod.LINEAR in methods:
            out.append(lin)
        if RecoveryMethod.ITERATIVE in methods:
            out.append(recover_iterative(layer, q, model, lin, max_iter=max_iter, truth=x))
        return [
            {"m": m, "trial": t, "method": r.method.value, "residual": r.residual, "error": r.error, "iterations": r.iterations}
            for r in out
        ]

    tasks = [(m, t) for m in m_list for t in range(trials)]
    if n_jobs == 1:
        chunks = [run(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            chunks = list(pool.map(run, tasks))
    rows = [row for chunk in chunks for row in chunk]

    medians, slopes = {}, {}
    for mth in methods:
        meds = []
        for m in m_list:
            errs = [r["error"] for r in rows if r["m"] == m and r["method"] == mth.value]
            medians[(mth.value, m)] = float(np.median(errs))
            meds.append(medians[(mth.value, m)])
        slopes[mth.value] = loglog_slope(m_list, meds)
    return SweepResult(rows, medians, slopes)
