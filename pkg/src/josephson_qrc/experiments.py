"""End-to-end experiments: dataset, reservoir features, readout training, result files."""
import copy
import csv
import hashlib
import json
import logging
import math
import os
import platform
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, backend, baselines, config as cfgmod, datasets, readout
from .errors import ConfigError, NumericalError
from .fock import FockSpec
from .mixer import FeatureMatrix, MixerConfig, ReadoutSpec, calibrate_drive, run_reservoir

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "JQRC_OUTPUT_ROOT"

_dataset_cache = {}
_feature_cache = {}
_calibration_cache = {}


def clear_caches():
    _dataset_cache.clear()
    _feature_cache.clear()
    _calibration_cache.clear()


# ---------------------------------------------------------------- datasets

def _dataset_key(cfg):
    task = cfg["experiment"]["task"]
    d = cfg["dataset"]
    if task == "sine_square":
        keys = ("seed", "train_waveforms", "test_waveforms")
    else:
        keys = ("train_len", "test_len", "mg_beta", "mg_gamma", "mg_tau", "mg_exponent",
                "mg_step", "mg_history", "mg_warmup")
    payload = json.dumps([task, {k: d[k] for k in keys}, max(d["delays"]) if task != "sine_square" else 0])
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def mackey_glass_config(cfg):
    d = cfg["dataset"]
    return datasets.MackeyGlassConfig(
        beta=d["mg_beta"], gamma=d["mg_gamma"], tau=d["mg_tau"], exponent=d["mg_exponent"],
        integration_step=d["mg_step"], history=d["mg_history"], warmup=d["mg_warmup"],
        length=d["train_len"] + d["test_len"] + max(d["delays"]))


def load_task(cfg):
    """(train, test) datasets for the configured task, cached by their defining parameters."""
    key = _dataset_key(cfg)
    d = cfg["dataset"]
    if key not in _dataset_cache:
        if cfg["experiment"]["task"] == "sine_square":
            stream = datasets.gen_sine_square(d["train_waveforms"] + d["test_waveforms"], d["seed"])
            n_train = d["train_waveforms"] * datasets.SAMPLES_PER_WAVE
            pair = (stream.slice(0, n_train), stream.slice(n_train, len(stream)))
        else:
            series = datasets.gen_mackey_glass(mackey_glass_config(cfg))
            pair = datasets.make_delay_targets(series, range(1, max(d["delays"]) + 1),
                                               d["train_len"], d["test_len"])
        _dataset_cache[key] = pair
    train, test = _dataset_cache[key]
    if cfg["experiment"]["task"] == "mackey_glass":
        rows = [d_ - 1 for d_ in d["delays"]]
        train, test = _select_rows(train, rows), _select_rows(test, rows)
    return train, test


def _select_rows(ds, rows):
    names = [ds.target_names[r] for r in rows]
    return datasets.Dataset(ds.inputs, ds.targets[rows], ds.kind, ds.seed,
                            {**ds.metadata, "delays": [int(n.split("_")[1]) for n in names]}, names)


# ---------------------------------------------------------------- reservoirs

def mixer_config(cfg, drive_scale=1.0):
    m = cfg["mixer"]
    eps_a, eps_b = cfgmod.resolved_eps0(cfg)
    return MixerConfig(kappa_a=m["kappa_a"], kappa_b=m["kappa_b"], g=m["g"], eps0_a=eps_a, eps0_b=eps_b,
                       drive_scale=drive_scale, segment=m["segment"], dt=m["dt"],
                       spec=FockSpec(m["cutoff_a"], m["cutoff_b"]), dissipator_mode=m["dissipator_mode"])


def resolve_drive(cfg, inputs):
    """Mixer config with the drive scale fixed, plus the calibration record (or None)."""
    m = cfg["mixer"]
    if m["drive_scale"] is not None:
        return mixer_config(cfg, m["drive_scale"]), None
    reference = copy.deepcopy(cfg)
    if m["calibrate_from"] == "baseline":
        base = cfgmod.defaults()["mixer"]
        for key in ("kappa_a", "kappa_b", "g"):
            reference["mixer"][key] = base[key]
    x_max = float(np.max(np.abs(inputs)))
    target = mixer_config(reference)
    key = (target, x_max, m["edge_budget"], m["photons"])
    if key not in _calibration_cache:
        _calibration_cache[key] = calibrate_drive(target, x_max, m["edge_budget"], m["photons"])
    cal = _calibration_cache[key]
    return mixer_config(cfg, cal.drive_scale), cal


def quantum_features(cfg, inputs, mcfg):
    """All joint-state populations for ``inputs`` (cached per mixer config and input stream)."""
    key = (mcfg, hashlib.sha256(np.ascontiguousarray(inputs).tobytes()).hexdigest(),
           cfg["mixer"]["truncation_tol"])
    if key not in _feature_cache:
        spec = mcfg.spec
        full = ReadoutSpec(spec.cutoff_a, spec.cutoff_b)
        _feature_cache[key] = run_reservoir(inputs, mcfg, full, bias=False,
                                            truncation_tol=cfg["mixer"]["truncation_tol"])
    return _feature_cache[key]


def _with_bias(fm, bias):
    if not bias:
        return fm
    values = np.vstack([fm.values, np.ones((1, fm.n_samples))])
    return FeatureMatrix(values, fm.labels + ["bias"], True, fm.info)


def reservoir_features(cfg, inputs, seed=None):
    """Feature matrix for the configured reservoir, plus a record of how it was made."""
    kind = cfg["experiment"]["reservoir"]
    bias = cfg["readout"]["bias"]
    if kind == "quantum":
        mcfg, cal = resolve_drive(cfg, inputs)
        full = quantum_features(cfg, inputs, mcfg)
        r = cfg["readout"]
        fm = _with_bias(full.rows(ReadoutSpec(r["max_na"], r["max_nb"]).labels()), bias)
        record = {"drive_scale": mcfg.drive_scale, "mixer": mcfg.as_dict(),
                  "calibration": cal.as_dict() if cal else None,
                  "max_edge_population": full.info["max_edge_population"]}
        return fm, record
    section = dict(cfg[kind])
    if seed is not None:
        section["seed"] = seed
    if kind == "sto" and section["dt"] is None:
        section.pop("dt")
    fm = baselines.baseline_features(inputs, kind, section.pop("size"), section.pop("seed"), bias, **section)
    return fm, {"seed": seed if seed is not None else cfg[kind]["seed"]}


# ---------------------------------------------------------------- evaluation

METRIC_COLUMNS = ["output", "delay", "accuracy", "rmse_paper", "rmse_standard", "log_error", "log_rmse"]


def evaluate(cfg, features, train, test):
    """Fit on the train columns, predict the test columns; return (weights, predictions, metric rows)."""
    n_train = len(train)
    r = cfg["readout"]
    weights = readout.fit(features.columns(0, n_train), train.targets, ridge=r["ridge"])
    pred = readout.predict(weights, features.columns(n_train, n_train + len(test)))
    log_err = readout.log_error_curve(pred, test.targets)
    log_rmse = readout.log_rmse_curve(pred, test.targets)
    rows = []
    classify = cfg["experiment"]["task"] == "sine_square"
    delays = test.metadata.get("delays", [None] * len(test.target_names))
    for i, name in enumerate(test.target_names):
        paper, standard = readout.rmse(pred[i], test.targets[i])
        acc = readout.classification_accuracy(pred[i], test.targets[i], r["threshold"]) if classify else None
        rows.append({"output": name, "delay": delays[i], "accuracy": acc, "rmse_paper": paper,
                     "rmse_standard": standard, "log_error": float(log_err[i]),
                     "log_rmse": float(log_rmse[i])})
    return weights, pred, rows


@dataclass
class RunResult:
    metrics: list
    predictions: np.ndarray
    features: FeatureMatrix
    weights: readout.ReadoutWeights
    record: dict
    out_dir: str | None = None
    manifest: dict = field(default_factory=dict)

    @property
    def accuracy(self):
        return self.metrics[0]["accuracy"]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def atomic_write(path, write):
    """Write through a temporary file in the same directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows(path, header, rows):
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    atomic_write(path, write)


def default_output_dir(cfg):
    exp = cfg["experiment"]
    if exp["output_dir"]:
        return exp["output_dir"]
    name = exp["name"] or f"{exp['task']}_{exp['reservoir']}"
    return os.path.join(os.environ.get(OUTPUT_ROOT_ENV, "results"), name)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_bundle(result, cfg, out_dir, train, test, wall_time):
    """features.csv, weights.csv, predictions.csv, metrics.csv and manifest.json."""
    os.makedirs(out_dir, exist_ok=True)
    atomic_write(os.path.join(out_dir, "features.csv"), result.features.to_csv)
    atomic_write(os.path.join(out_dir, "weights.csv"),
                 lambda p: result.weights.to_csv(p, test.target_names))
    n_train = len(train)
    header = ["index", "input", *test.target_names, *(f"pred_{n.removeprefix('target_')}" for n in test.target_names)]
    rows = [[n_train + j, test.inputs[j], *test.targets[:, j], *result.predictions[:, j]]
            for j in range(len(test))]
    _write_rows(os.path.join(out_dir, "predictions.csv"), header, rows)
    _write_rows(os.path.join(out_dir, "metrics.csv"), METRIC_COLUMNS,
                [[row[c] for c in METRIC_COLUMNS] for row in result.metrics])
    manifest = {
        "version": __version__,
        "backend": backend.get().name,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": cfg,
        "config_text": cfgmod.dumps(cfg),
        "seeds": {"dataset": cfg["dataset"]["seed"], "static": cfg["static"]["seed"], "sto": cfg["sto"]["seed"]},
        "reservoir": result.record,
        "n_features": result.features.n_features,
        "n_train": n_train,
        "n_test": len(test),
        "wall_time_s": wall_time,
        "files": ["features.csv", "weights.csv", "predictions.csv", "metrics.csv"],
    }
    text = json.dumps(_jsonable(manifest), indent=2, sort_keys=True)

    def write(tmp):
        with open(tmp, "w") as fh:
            fh.write(text + "\n")
    atomic_write(os.path.join(out_dir, "manifest.json"), write)
    return manifest


def run_experiment(cfg, out_dir=None, write=True, seed=None):
    """Run one configured experiment; optionally write its result bundle to ``out_dir``."""
    cfg = cfgmod.validate(copy.deepcopy(cfg))
    start = time.perf_counter()
    train, test = load_task(cfg)
    inputs = np.concatenate([train.inputs, test.inputs])
    features, record = reservoir_features(cfg, inputs, seed)
    weights, pred, metrics = evaluate(cfg, features, train, test)
    result = RunResult(metrics, pred, features, weights, record)
    if write:
        result.out_dir = out_dir or default_output_dir(cfg)
        result.manifest = write_bundle(result, cfg, result.out_dir, train, test, time.perf_counter() - start)
    return result


# ---------------------------------------------------------------- sweeps

SWEEP_COLUMNS = ["value", "accuracy_mean", "accuracy_std", "rmse_paper_mean", "log_error_mean",
                 "log_rmse_mean", "n_seeds", "error"]


def point_config(cfg, value):
    """Config for one sweep point."""
    cfg = copy.deepcopy(cfg)
    axis = cfg["sweep"]["axis"]
    kind = cfg["experiment"]["reservoir"]
    if axis == "neurons":
        n = int(round(value))
        if kind == "quantum":
            k = math.isqrt(n)
            if k * k != n:
                raise ConfigError(f"[sweep] quantum neuron counts must be perfect squares, got {n}")
            cfg["readout"]["max_na"] = cfg["readout"]["max_nb"] = k - 1
        else:
            cfg[kind]["size"] = n
    elif axis == "g":
        cfg["mixer"]["g"] *= value
    elif axis == "kappa":
        cfg["mixer"]["kappa_a"] *= value
        cfg["mixer"]["kappa_b"] *= value
    elif axis == "delay":
        if cfg["experiment"]["task"] != "mackey_glass":
            raise ConfigError("[sweep] axis 'delay' applies to the mackey_glass task only")
        cfg["dataset"]["delays"] = [int(round(value))]
    return cfgmod.validate(cfg)


def _summarise(results):
    accs = [r.accuracy for r in results]
    has_acc = all(a is not None for a in accs)
    return {
        "accuracy_mean": float(np.mean(accs)) if has_acc else None,
        "accuracy_std": float(np.std(accs)) if has_acc else None,
        "rmse_paper_mean": float(np.mean([m["rmse_paper"] for r in results for m in r.metrics])),
        "log_error_mean": float(np.mean([m["log_error"] for r in results for m in r.metrics])),
        "log_rmse_mean": float(np.mean([m["log_rmse"] for r in results for m in r.metrics])),
        "n_seeds": len(results),
    }


def sweep_point(cfg, value, out_dir=None):
    """One sweep row; baselines are averaged over the configured seeds."""
    pcfg = point_config(cfg, value)
    kind = pcfg["experiment"]["reservoir"]
    seeds = pcfg["sweep"]["seeds"] if kind != "quantum" else [None]
    results = []
    for seed in seeds:
        sub = None
        if out_dir is not None:
            sub = os.path.join(out_dir, f"value_{value:g}" + (f"_seed_{seed}" if seed is not None else ""))
        results.append(run_experiment(pcfg, sub, write=out_dir is not None, seed=seed))
    return {"value": value, **_summarise(results), "error": None}


def _pool_point(args):
    cfg, value, out_dir = args
    try:
        return sweep_point(cfg, value, out_dir)
    except (NumericalError, ConfigError) as exc:
        return {"value": value, "error": f"{type(exc).__name__}: {exc}"}


def run_sweep(cfg, out_dir=None, write=True):
    """Run every sweep value; failed points are recorded, not fatal. Writes sweep.csv."""
    cfg = cfgmod.validate(copy.deepcopy(cfg))
    if cfg["sweep"]["axis"] == "none":
        raise ConfigError("[sweep] axis is 'none'")
    values = cfg["sweep"]["values"]
    out_dir = (out_dir or default_output_dir(cfg)) if write else None
    # cached features make in-process evaluation cheaper for these axes
    in_process = cfg["sweep"]["axis"] in ("neurons", "delay")
    workers = cfg["sweep"]["workers"] or os.cpu_count() or 1
    jobs = [(cfg, v, out_dir) for v in values]
    if in_process or workers == 1 or len(values) == 1:
        rows = [_pool_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(values))) as pool:
            rows = list(pool.map(_pool_point, jobs))
    if write:
        _write_rows(os.path.join(out_dir, "sweep.csv"), SWEEP_COLUMNS,
                    [[row.get(c) for c in SWEEP_COLUMNS] for row in rows])
    return rows


def crossing(rows, level=0.99):
    """Smallest sweep value from which the mean accuracy stays at or above ``level``."""
    ordered = sorted((r for r in rows if r.get("accuracy_mean") is not None), key=lambda r: r["value"])
    found = None
    for row in reversed(ordered):
        if row["accuracy_mean"] >= level:
            found = row["value"]
        else:
            break
    return found
