"""INI-style experiment configuration.

Example::

    [experiment]
    kind = embedding

    [model]
    n = 128
    k = 4
    L = 3
    seed = 7

    [layer]
    m_list = 64, 256, 1024
    activation = relu

    [run]
    master_seed = 0
    replicates = 5

Explicit layer stacks go in ``[layer.0]``, ``[layer.1]``, ... sections with
keys ``n, m, activation, slope, a, b, seed``; they replace the
``m_list``/``depth`` construction for the covering experiment.
"""

import configparser
import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

from ..errors import ParameterError
from ..models import make_gmm_model, make_union_of_subspaces
from ..netsim import ActivationKind, ActivationSpec


class ConfigError(ValueError):
    def __init__(self, message, *, section=None, key=None, line=None):
        where = ""
        if section is not None:
            where = f"[{section}]" + (f" {key}" if key else "")
            if line is not None:
                where = f"line {line}: {where}"
            where += ": "
        super().__init__(where + message)
        self.section = section
        self.key = key
        self.line = line


class ExperimentKind(str, Enum):
    MEAN_WIDTH = "meanwidth"
    EMBEDDING = "embedding"
    RECOVERY = "recovery"
    COVERING = "covering"
    SAMPLE_SIZE = "samplesize"
    FULL_SWEEP = "sweep"


def _floats(text):
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ValueError("expected integers")
    return [int(v) for v in vals]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# section -> key -> (attribute, parser)
_SCHEMA = {
    "experiment": {"kind": ("experiment", lambda s: ExperimentKind(s.strip().lower()))},
    "model": {
        "kind": ("model_kind", lambda s: s.strip().lower()),
        "n": ("n", int),
        "k": ("k", int),
        "l": ("L", int),
        "seed": ("model_seed", int),
        "centers": ("centers", _bool),
        "points": ("points", int),
    },
    "layer": {
        "m_list": ("m_list", _ints),
        "activation": ("activation", lambda s: ActivationKind(s.strip().lower()).value),
        "slope": ("slope", float),
        "a": ("lower", float),
        "b": ("upper", float),
        "depth": ("depth", int),
        "renormalize": ("renormalize", _bool),
    },
    "metrics": {
        "pre": ("metric_pre", lambda s: s.strip().lower()),
        "post": ("metric_post", lambda s: s.strip().lower()),
    },
    "width": {
        "probes": ("probes", int),
        "eps": ("eps", float),
        "constant": ("constant", float),
        "dudley_radius": ("dudley_radius", float),
    },
    "covering": {
        "eps_list": ("eps_list", _floats),
        "slack": ("slack", float),
    },
    "recovery": {
        "trials": ("trials", int),
        "max_iter": ("max_iter", int),
    },
    "run": {
        "master_seed": ("master_seed", int),
        "replicates": ("replicates", int),
        "out": ("out", str),
        "jobs": ("jobs", int),
    },
}
_LAYER_KEYS = {"n": int, "m": int, "activation": str, "slope": float, "a": float, "b": float, "seed": int}
_LAYER_SECTION = re.compile(r"^layer\.(\d+)$")

# never part of the config hash: they must not change CSV bodies
_RUNTIME_ONLY = ("out", "jobs")


@dataclass
class ExperimentConfig:
    experiment: ExperimentKind = ExperimentKind.FULL_SWEEP
    model_kind: str = "gmm"
    n: int = 128
    k: int = 4
    L: int = 3
    model_seed: int = 7
    centers: bool = False
    points: int = 200
    m_list: list = field(default_factory=lambda: [64, 256, 1024])
    activation: str = "relu"
    slope: float = 1.0
    lower: float = -math.inf
    upper: float = math.inf
    depth: int = 1
    renormalize: bool = True
    metric_pre: str = "geodesic"
    metric_post: str = "hamming_variant"
    probes: int = 20000
    eps: float = 0.5
    constant: float = 1.0
    dudley_radius: float = 2.0
    eps_list: list = field(default_factory=lambda: [0.25, 0.5, 1.0])
    slack: float = 2.0
    trials: int = 20
    max_iter: int = 500
    master_seed: int = 0
    replicates: int = 5
    out: str = "results"
    jobs: int = 1
    layers: list = field(default_factory=list)

    def activation_spec(self):
        kind = ActivationKind(self.activation)
        return ActivationSpec(kind, self.slope, self.lower, self.upper)

    def build_model(self):
        if self.model_kind == "gmm":
            return make_gmm_model(self.n, self.k, self.L, self.model_seed, centers=self.centers)
        return make_union_of_subspaces(self.n, self.k, self.L, self.model_seed)

    def as_dict(self):
        d = asdict(self)
        d["experiment"] = self.experiment.value
        return d

    def hash(self):
        d = {k: v for k, v in self.as_dict().items() if k not in _RUNTIME_ONLY}
        text = json.dumps(d, sort_keys=True, default=repr)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def validate(self):
        """Raise :class:`ConfigError` for the first invalid field."""

        def bad(section, key, msg):
            raise ConfigError(msg, section=section, key=key)

        if self.model_kind not in ("gmm", "union_of_subspaces"):
            bad("model", "kind", f"unknown model kind {self.model_kind!r}")
        if self.n < 1:
            bad("model", "n", f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            bad("model", "k", f"k must satisfy 1 <= k <= n (n={self.n}), got {self.k}")
        if self.L < 1:
            bad("model", "L", f"L must be >= 1, got {self.L}")
        if self.points < 2:
            bad("model", "points", "points must be >= 2")
        if not self.m_list or any(m < 1 for m in self.m_list):
            bad("layer", "m_list", "m_list must hold positive integers")
        try:
            self.activation_spec()
        except (ParameterError, ValueError) as exc:
            bad("layer", "activation", str(exc))
        if self.depth < 1:
            bad("layer", "depth", "depth must be >= 1")
        if self.metric_pre not in ("euclidean", "geodesic"):
            bad("metrics", "pre", f"unknown pre metric {self.metric_pre!r}")
        if self.metric_post not in ("hamming_variant", "euclidean"):
            bad("metrics", "post", f"unknown post metric {self.metric_post!r}")
        if self.probes < 1:
            bad("width", "probes", "probes must be >= 1")
        if not self.eps > 0:
            bad("width", "eps", "eps must be > 0")
        if not self.constant > 0:
            bad("width", "constant", "constant must be > 0")
        if not self.dudley_radius > 0:
            bad("width", "dudley_radius", "dudley_radius must be > 0")
        if not self.eps_list or any(not e > 0 for e in self.eps_list):
            bad("covering", "eps_list", "eps_list must hold positive radii")
        if self.slack < 1:
            bad("covering", "slack", "slack must be >= 1")
        if self.replicates < 1:
            bad("run", "replicates", "replicates must be >= 1")
        if self.jobs < 1:
            bad("run", "jobs", "jobs must be >= 1")
        needs_recovery = self.experiment in (ExperimentKind.RECOVERY, ExperimentKind.FULL_SWEEP)
        if needs_recovery:
            if self.trials < 10:
                bad("recovery", "trials", f"trials must be >= 10, got {self.trials}")
            ms = self.m_list
            if len(ms) < 3 or ms != sorted(set(ms)) or ms[-1] < 10 * ms[0]:
                bad("layer", "m_list", "recovery needs >= 3 increasing widths spanning a decade")
            if self.max_iter < 1:
                bad("recovery", "max_iter", "max_iter must be >= 1")
        dim = self.n
        for i, spec in enumerate(self.layers):
            section = f"layer.{i}"
            if "m" not in spec:
                bad(section, "m", "missing required key")
            if "n" in spec and spec["n"] != dim:
                bad(section, "n", f"expected n={dim} to match the previous layer, got {spec['n']}")
            try:
                ActivationSpec(
                    ActivationKind(spec.get("activation", "relu")),
                    spec.get("slope", 1.0),
                    spec.get("a", -math.inf),
                    spec.get("b", math.inf),
                )
            except (ParameterError, ValueError) as exc:
                bad(section, "activation", str(exc))
            dim = spec["m"]
        return self


def _line_of(text, section, key=None):
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if key is None and current == section:
                return lineno
            continue
        if current == section and key is not None:
            name = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            if name == key:
                return lineno
    return None


def parse_config(text, source="<config>", overrides=None):
    """Parse configuration text into a validated :class:`ExperimentConfig`.

    ``overrides`` (attribute -> value) are applied before validation.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {source}: {exc}") from exc

    cfg = ExperimentConfig()
    layer_sections = []
    for section in parser.sections():
        sec = section.strip().lower()
        match = _LAYER_SECTION.match(sec)
        if match:
            layer_sections.append((int(match.group(1)), section))
            continue
        if sec not in _SCHEMA:
            raise ConfigError("unknown section", section=sec, line=_line_of(text, sec))
        for key, raw in parser.items(section):
            if key not in _SCHEMA[sec]:
                allowed = ", ".join(sorted(_SCHEMA[sec]))
                raise ConfigError(f"unknown key (allowed: {allowed})", section=sec, key=key, line=_line_of(text, sec, key))
            attr, conv = _SCHEMA[sec][key]
            try:
                setattr(cfg, attr, conv(raw))
            except ValueError as exc:
                raise ConfigError(f"invalid value {raw!r}: {exc}", section=sec, key=key, line=_line_of(text, sec, key)) from exc

    layer_sections.sort()
    if [i for i, _ in layer_sections] != list(range(len(layer_sections))):
        raise ConfigError("layer sections must be numbered 0, 1, 2, ... without gaps")
    for i, section in layer_sections:
        spec = {}
        for key, raw in parser.items(section):
            sec = section.strip().lower()
            if key not in _LAYER_KEYS:
                raise ConfigError("unknown key", section=sec, key=key, line=_line_of(text, sec, key))
            try:
                spec[key] = _LAYER_KEYS[key](raw.strip().lower() if key == "activation" else raw)
            except ValueError as exc:
                raise ConfigError(f"invalid value {raw!r}", section=sec, key=key, line=_line_of(text, sec, key)) from exc
        cfg.layers.append(spec)
    for attr, value in (overrides or {}).items():
        setattr(cfg, attr, value)

    try:
        cfg.validate()
    except ConfigError as exc:
        if exc.section is not None and exc.line is None:
            key = exc.key.lower() if exc.key else None
            raise ConfigError(str(exc).split(": ", 1)[-1], section=exc.section, key=exc.key, line=_line_of(text, exc.section, key)) from None
        raise
    return cfg


def load_config(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path), overrides=overrides)


def config_to_text(cfg):
    """Render ``cfg`` back into INI text (round-trips through :func:`parse_config`)."""
    d = cfg.as_dict()
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (attr, _) in keys.items():
            value = d[attr]
            if isinstance(value, list):
                value = ", ".join(repr(v) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        lines.append("")
    for i, spec in enumerate(cfg.layers):
        lines.append(f"[layer.{i}]")
        lines.extend(f"{k} = {v}" for k, v in spec.items())
        lines.append("")
    return "\n".join(lines)

