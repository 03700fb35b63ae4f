"""Random Gaussian layers, semi-truncated linear activations, layer stacks."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DegenerateOutputError, ParameterError
from .models import PointCloud
from .rngcore import gaussian_block, stream_id

LAYER_STREAM = stream_id("layer-weights")


class ActivationKind(str, Enum):
    RELU = "relu"
    TRUNCATED_LINEAR = "truncated_linear"
    IDENTITY = "identity"


@dataclass(frozen=True)
class ActivationSpec:
    """Semi-truncated linear activation ``f(x) = slope * clip(x, lower, upper)``.

    ReLU is ``(slope=1, lower=0, upper=inf)`` and Identity is
    ``(slope=1, lower=-inf, upper=inf)``; both have their own ``kind`` so
    that recovery can special-case them.
    """

    kind: ActivationKind = ActivationKind.RELU
    slope: float = 1.0
    lower: float = field(default=-math.inf)
    upper: float = field(default=math.inf)

    def __post_init__(self):
        object.__setattr__(self, "kind", ActivationKind(self.kind))
        if self.kind is ActivationKind.RELU:
            object.__setattr__(self, "lower", 0.0)
        if self.kind is not ActivationKind.TRUNCATED_LINEAR:
            object.__setattr__(self, "slope", 1.0)
            object.__setattr__(self, "upper", math.inf)
        if self.kind is ActivationKind.IDENTITY:
            object.__setattr__(self, "lower", -math.inf)
        if not self.slope > 0:
            raise ParameterError(f"slope must be > 0, got {self.slope}")
        if self.lower > 0 or self.upper < 0:
            raise ParameterError(f"need lower <= 0 <= upper, got [{self.lower}, {self.upper}]")

    @classmethod
    def relu(cls):
        return cls(ActivationKind.RELU)

    @classmethod
    def identity(cls):
        return cls(ActivationKind.IDENTITY)

    @classmethod
    def truncated(cls, slope=1.0, lower=-math.inf, upper=math.inf):
        return cls(ActivationKind.TRUNCATED_LINEAR, slope, lower, upper)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls(ActivationKind(value.lower()))
        raise ParameterError(f"cannot interpret {value!r} as an activation")

    @property
    def is_linear(self):
        return math.isinf(self.lower) and math.isinf(self.upper)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind is ActivationKind.IDENTITY:
            return x.copy()
        if self.kind is ActivationKind.RELU:
            return np.maximum(x, 0.0)
        return self.slope * np.clip(x, self.lower, self.upper)

    def derivative(self, x):
        """Almost-everywhere derivative (0 at the kinks)."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind is ActivationKind.IDENTITY:
            return np.ones_like(x)
        if self.kind is ActivationKind.RELU:
            return (x > 0).astype(np.float64)
        return np.where((x > self.lower) & (x < self.upper), self.slope, 0.0)

    def to_config(self):
        return {"activation": self.kind.value, "slope": self.slope, "a": self.lower, "b": self.upper}


@dataclass(frozen=True)
class SemiTruncatedReport:
    zero_at_origin: bool
    positive_bound: bool
    negative_bound: bool
    linear_then_constant: bool

    @property
    def passed(self):
        return self.zero_at_origin and self.positive_bound and self.negative_bound and self.linear_then_constant

    def __bool__(self):
        return self.passed


def _is_linear_then_constant(xs, fx, atol):
    # xs sorted ascending and contains 0
    zero = int(np.searchsorted(xs, 0.0))
    pos = fx[zero + 1] / xs[zero + 1]
    neg = fx[zero - 1] / xs[zero - 1]
    slope = pos if pos != 0 else neg
    on_line = np.abs(fx - slope * xs) <= atol * np.maximum(1.0, np.abs(xs))
    if not on_line[zero]:
        return False
    idx = np.flatnonzero(on_line)
    lo, hi = idx[0], idx[-1]
    if hi - lo + 1 != idx.size or not lo <= zero <= hi:
        return False
    left, right = fx[:lo], fx[hi + 1 :]
    flat = lambda v: v.size == 0 or np.all(np.abs(v - v[0]) <= atol * max(1.0, abs(v[0])))
    return bool(flat(left) and flat(right))


def validate_semi_truncated(activation, grid=1000, span=(1e-6, 1e6), atol=1e-12):
    """Check the semi-truncated linear conditions on a symmetric log grid.

    ``activation`` may be an :class:`ActivationSpec` or any vectorized
    callable. The grid has ``grid // 2`` log-spaced magnitudes on each side
    of zero plus zero itself.
    """
    if grid < 100:
        raise ParameterError("grid must be >= 100")
    mags = np.logspace(math.log10(span[0]), math.log10(span[1]), grid // 2)
    xs = np.concatenate([-mags[::-1], [0.0], mags])
    fx = np.asarray(activation(xs), dtype=np.float64)
    pos, neg = xs > 0, xs < 0
    tol = atol * np.maximum(1.0, np.abs(xs))
    return SemiTruncatedReport(
        zero_at_origin=bool(abs(fx[grid // 2]) <= atol),
        positive_bound=bool(np.all(fx[pos] > 0) and np.all(fx[pos] <= xs[pos] + tol[pos])),
        negative_bound=bool(np.all(fx[neg] <= 0) and np.all(fx[neg] >= xs[neg] - tol[neg])),
        linear_then_constant=_is_linear_then_constant(xs, fx, atol),
    )


class RandomGaussianLayer(TransformerMixin, BaseEstimator):
    """One random layer ``x -> f(M x)`` with ``M`` of shape ``(m, n)``.

    Entries of ``M`` are i.i.d. ``N(0, 1/m)``. Entry ``(i, j)`` is Gaussian
    counter ``i*n + j`` of the layer stream, so a layer with more rows
    extends (up to the ``1/sqrt(m)`` scaling) the matrix of a narrower layer
    built from the same seed.

    Parameters
    ----------
    n_components : int
        Output dimension ``m``.
    activation : ActivationSpec or str, default="relu"
    random_state : int, default=0
    weights : {"gaussian", "identity"}, default="gaussian"
        ``"identity"`` sets ``M = I`` (requires ``m == n``); used as a
        control in experiments.

    Attributes
    ----------
    matrix_ : ndarray of shape (n_components, n_features_in_)
    activation_ : ActivationSpec
    """

    def __init__(self, n_components, activation="relu", random_state=0, weights="gaussian"):
        self.n_components = n_components
        self.activation = activation
        self.random_state = random_state
        self.weights = weights

    def _build(self, n):
        m = self.n_components
        if isinstance(m, bool) or int(m) != m or m < 1 or n < 1:
            raise ParameterError(f"layer dimensions must be positive, got n={n}, m={m}")
        if self.weights == "identity":
            if m != n:
                raise ParameterError("identity weights need n_components == n_features")
            matrix = np.eye(n)
        elif self.weights == "gaussian":
            matrix = gaussian_block(self.random_state, LAYER_STREAM, (m, n)) / math.sqrt(m)
        else:
            raise ParameterError(f"unknown weights {self.weights!r}")
        matrix.setflags(write=False)
        self.matrix_ = matrix
        self.activation_ = ActivationSpec.parse(self.activation)
        self.n_features_in_ = n
        return self

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        return self._build(X.shape[1])

    def pre_activation(self, X):
        check_is_fitted(self, "matrix_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X @ self.matrix_.T

    def transform(self, X):
        return self.activation_(self.pre_activation(X))

    @property
    def n(self):
        return self.n_features_in_

    @property
    def m(self):
        return self.matrix_.shape[0]


def make_layer(n, m, activation="relu", seed=0):
    """Build a fitted :class:`RandomGaussianLayer` mapping ``R^n -> R^m``."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    return RandomGaussianLayer(m, activation, seed)._build(int(n))


def make_identity_layer(n, activation="identity"):
    return RandomGaussianLayer(n, activation, 0, weights="identity")._build(int(n))


def apply_layer(layer, x):
    """``f(M x)`` for a single vector ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != layer.n:
        raise ParameterError(f"expected a vector of length {layer.n}, got shape {x.shape}")
    return layer.activation_(layer.matrix_ @ x)


def forward_stack(layers, cloud, renormalize=True):
    """Push ``cloud`` through ``layers`` and return every layer's output.

    With ``renormalize`` each output is divided by its norm (recorded in the
    output cloud's ``scales``) so the next layer sees points on the sphere.
    A zero output under renormalization raises
    :class:`~gaussnet.errors.DegenerateOutputError`.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    if not layers:
        return [cloud]
    outputs = []
    current = cloud
    for depth, layer in enumerate(layers):
        if current.dim != layer.n:
            raise ParameterError(f"layer {depth} expects dimension {layer.n}, got {current.dim}")
        out = layer.transform(current.points)
        scales = None
        if renormalize:
            scales = np.linalg.norm(out, axis=1)
            zero = np.flatnonzero(scales == 0)
            if zero.size:
                raise DegenerateOutputError(
                    f"layer {depth} mapped point {zero[0]} to the zero vector",
                    layer=depth,
                    index=int(zero[0]),
                )
            out = out / scales[:, None]
        current = PointCloud(out, f"{cloud.tag}|layer={depth}", scales)
        outputs.append(current)
    return outputs


def layer_stack_from_config(specs, n):
    """Build layers from dicts with keys ``m, activation, slope, a, b, seed``.

    An ``n`` key, when present, must match the incoming dimension.
    """
    layers = []
    for i, spec in enumerate(specs):
        if "n" in spec and int(spec["n"]) != n:
            raise ParameterError(f"layer {i}: n={spec['n']} does not match incoming dimension {n}")
        kind = ActivationKind(spec.get("activation", "relu"))
        act = ActivationSpec(kind, float(spec.get("slope", 1.0)), float(spec.get("a", -math.inf)), float(spec.get("b", math.inf)))
        layer = make_layer(n, int(spec["m"]), act, int(spec.get("seed", i)))
        layers.append(layer)
        n = layer.m
    return layers
