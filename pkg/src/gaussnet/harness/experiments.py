"""Experiment runners. Each returns ``(filename, header, rows)`` tables."""

import json
import math
import platform
import time
from datetime import datetime, timezone
from pathlib import Path

from .. import __version__
from ..metrics import distortion_report, verify_covering_recursion
from ..models import sample_points
from ..netsim import forward_stack, layer_stack_from_config, make_layer
from ..recovery import recovery_error_sweep
from ..rngcore import derive_seed
from ..width import (
    dudley_bound,
    estimate_mean_width,
    gmm_covering,
    log_sudakov_net_size,
    mean_width_gmm_bound,
    sudakov_net_size,
)
from .config import ExperimentKind
from .csvio import write_csv

MEANWIDTH_HEADER = ["quantity", "params", "value", "std_error", "master_seed", "config_hash"]
EMBEDDING_HEADER = [
    "seed", "n", "m", "k", "L", "metric_pre", "metric_post",
    "scale_constant", "max_residual", "mean_residual", "spearman", "master_seed", "config_hash",
]
COVERING_HEADER = [
    "seed", "m", "layer", "eps", "width_est", "net_size_pre", "net_size_post", "bound_rhs", "pass",
    "master_seed", "config_hash",
]
RECOVERY_HEADER = [
    "m", "trial", "method", "residual", "error", "iterations", "slope_summary_row", "master_seed", "config_hash",
]
SAMPLESIZE_HEADER = [
    "k", "L", "eps", "constant", "mean_width_gmm_bound", "log_sudakov_net_size", "sudakov_net_size",
    "master_seed", "config_hash",
]


def _stamp(cfg):
    return {"master_seed": cfg.master_seed, "config_hash": cfg.hash()}


def _input_cloud(cfg, model):
    return sample_points(model, cfg.points, derive_seed(cfg.master_seed, "cloud"))


def run_meanwidth(cfg, model=None):
    model = model or cfg.build_model()
    stamp = _stamp(cfg)
    rows = []
    for r in range(cfg.replicates):
        seed = derive_seed(cfg.master_seed, "replicate", r)
        cloud = sample_points(model, cfg.points, seed)
        est = estimate_mean_width(cloud, cfg.probes, derive_seed(seed, "probes"), n_jobs=cfg.jobs)
        params = f"replicate={r};points={cfg.points};probes={cfg.probes}"
        rows.append({"quantity": "mean_width_mc", "params": params, "value": est.value, "std_error": est.std_error, **stamp})
    params = f"k={cfg.k};L={cfg.L};constant={cfg.constant!r}"
    rows.append({"quantity": "mean_width_gmm_bound", "params": params, "value": mean_width_gmm_bound(cfg.k, cfg.L, cfg.constant), "std_error": "", **stamp})
    dudley = dudley_bound(gmm_covering(cfg.L, cfg.k), cfg.dudley_radius, cfg.constant)
    params += f";radius_max={cfg.dudley_radius!r}"
    rows.append({"quantity": "dudley_bound", "params": params, "value": dudley, "std_error": "", **stamp})
    return [("meanwidth.csv", MEANWIDTH_HEADER, rows)]


def run_embedding(cfg, model=None):
    model = model or cfg.build_model()
    cloud = _input_cloud(cfg, model)
    stamp = _stamp(cfg)
    act = cfg.activation_spec()
    rows = []
    for r in range(cfg.replicates):
        seed = derive_seed(cfg.master_seed, "layer", r)
        for m in cfg.m_list:
            layers = [make_layer(cfg.n if d == 0 else m, m, act, derive_seed(seed, "depth", d)) for d in range(cfg.depth)]
            out = forward_stack(layers, cloud, renormalize=cfg.renormalize)[-1]
            rep = distortion_report(cloud, out, cfg.metric_pre, cfg.metric_post)
            rows.append({
                "seed": seed, "n": cfg.n, "m": m, "k": cfg.k, "L": cfg.L,
                "metric_pre": rep.pre_metric.value, "metric_post": rep.post_metric.value,
                "scale_constant": rep.scale_constant, "max_residual": rep.max_residual,
                "mean_residual": rep.mean_residual, "spearman": rep.spearman, **stamp,
            })
    return [("embedding.csv", EMBEDDING_HEADER, rows)]


def run_covering(cfg, model=None):
    model = model or cfg.build_model()
    cloud = _input_cloud(cfg, model)
    stamp = _stamp(cfg)
    act = cfg.activation_spec()
    rows = []

    def check(seed, m, layers):
        outputs = forward_stack(layers, cloud, renormalize=cfg.renormalize)
        inputs = [cloud] + outputs[:-1]
        for d, (pre, post) in enumerate(zip(inputs, outputs)):
            width = estimate_mean_width(pre, cfg.probes, derive_seed(seed, "probes", d), n_jobs=cfg.jobs).value
            for eps in cfg.eps_list:
                res = verify_covering_recursion(pre, post, eps, width, layers[d].m, cfg.slack)
                rows.append({
                    "seed": seed, "m": layers[d].m, "layer": d, "eps": eps, "width_est": width,
                    "net_size_pre": res.net_size_pre, "net_size_post": res.net_size_post,
                    "bound_rhs": res.bound_rhs, "pass": str(res.passed).lower(), **stamp,
                })

    for r in range(cfg.replicates):
        seed = derive_seed(cfg.master_seed, "layer", r)
        if cfg.layers:
            specs = [{**spec, "seed": spec.get("seed", derive_seed(seed, "depth", i))} for i, spec in enumerate(cfg.layers)]
            layers = layer_stack_from_config(specs, cfg.n)
            check(seed, layers[0].m, layers)
            continue
        for m in cfg.m_list:
            layers = [make_layer(cfg.n if d == 0 else m, m, act, derive_seed(seed, "depth", d)) for d in range(cfg.depth)]
            check(seed, m, layers)
    return [("covering.csv", COVERING_HEADER, rows)]


def run_recovery(cfg, model=None):
    model = model or cfg.build_model()
    stamp = _stamp(cfg)
    sweep = recovery_error_sweep(
        model, cfg.m_list, cfg.trials, seed=derive_seed(cfg.master_seed, "recovery"),
        activation=cfg.activation_spec(), max_iter=cfg.max_iter, n_jobs=cfg.jobs,
    )
    rows = [{**row, "slope_summary_row": 0, **stamp} for row in sweep.rows]
    for (method, m), med in sweep.medians.items():
        rows.append({"m": m, "trial": "median", "method": method, "residual": "", "error": med, "iterations": "", "slope_summary_row": 1, **stamp})
    for method, slope in sweep.slopes.items():
        rows.append({"m": "", "trial": "slope", "method": method, "residual": "", "error": slope, "iterations": "", "slope_summary_row": 1, **stamp})
    return [("recovery.csv", RECOVERY_HEADER, rows)]


def run_samplesize(cfg, model=None):
    width = mean_width_gmm_bound(cfg.k, cfg.L, cfg.constant)
    row = {
        "k": cfg.k, "L": cfg.L, "eps": cfg.eps, "constant": cfg.constant,
        "mean_width_gmm_bound": width,
        "log_sudakov_net_size": log_sudakov_net_size(width, cfg.eps),
        "sudakov_net_size": sudakov_net_size(width, cfg.eps),
        **_stamp(cfg),
    }
    return [("samplesize.csv", SAMPLESIZE_HEADER, [row])]


def run_sweep(cfg, model=None):
    model = model or cfg.build_model()
    tables = []
    for runner in (run_meanwidth, run_embedding, run_covering, run_recovery, run_samplesize):
        tables.extend(runner(cfg, model))
    return tables


RUNNERS = {
    ExperimentKind.MEAN_WIDTH: run_meanwidth,
    ExperimentKind.EMBEDDING: run_embedding,
    ExperimentKind.COVERING: run_covering,
    ExperimentKind.RECOVERY: run_recovery,
    ExperimentKind.SAMPLE_SIZE: run_samplesize,
    ExperimentKind.FULL_SWEEP: run_sweep,
}


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def run_experiment(cfg, out_dir=None):
    """Run ``cfg`` and write its CSV files plus ``manifest.json``.

    Returns the list of written paths (manifest last).
    """
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    started_at = datetime.now(timezone.utc).isoformat()
    tables = RUNNERS[cfg.experiment](cfg)
    paths = [write_csv(out / name, header, rows) for name, header, rows in tables]
    manifest = {
        "config": {k: _jsonable(v) for k, v in cfg.as_dict().items()},
        "config_hash": cfg.hash(),
        "library_version": __version__,
        "python": platform.python_version(),
        "started_at": started_at,
        "wall_time_s": time.perf_counter() - started,
        "files": {p.name: sum(1 for _ in p.open()) - 1 for p in paths},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return paths + [manifest_path]

