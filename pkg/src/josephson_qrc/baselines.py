"""Classical comparison reservoirs: a static ReLU layer and spin-torque oscillators."""
import csv
from dataclasses import dataclass, field

import numpy as np

from . import backend, readout
from .errors import InvalidSpecificationError, PositivityViolationError
from .mixer import FeatureMatrix

STATIC_VARIANTS = ("embedded", "literal")


@dataclass(frozen=True)
class StaticReservoirParams:
    """ReLU reservoir with one step of input memory.

    ``variant="embedded"`` feeds the previous input through ``W_in`` before
    ``W_res``; ``variant="literal"`` multiplies the row sums of ``W_res`` by the
    previous scalar input.
    """

    size: int = 40
    seed: int = 0
    input_scale: float = 1.0
    recurrent_scale: float = 0.9
    variant: str = "embedded"

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise InvalidSpecificationError(f"size must be an integer >= 1, got {self.size!r}")
        if self.variant not in STATIC_VARIANTS:
            raise InvalidSpecificationError(f"variant must be one of {STATIC_VARIANTS}")

    def weights(self):
        rng = np.random.default_rng(self.seed)
        w_in = self.input_scale * rng.uniform(-1.0, 1.0, self.size)
        w_res = self.recurrent_scale * rng.uniform(-1.0, 1.0, (self.size, self.size))
        return w_in, w_res


def _features(values, prefix, bias):
    labels = [f"{prefix}{j}" for j in range(values.shape[0])]
    if bias:
        values = np.vstack([values, np.ones((1, values.shape[1]))])
        labels.append("bias")
    return FeatureMatrix(values, labels, bias)


def static_features(inputs, params, bias=True, w_in=None, w_res=None):
    """y(t) = ReLU(W_in x(t) + W_res u(t-1)) with x(-1) = 0.

    ``u(t-1)`` is ``W_in x(t-1)`` for the embedded variant and the scalar
    ``x(t-1)`` broadcast to every neuron for the literal one.
    """
    x = np.asarray(inputs, dtype=float).ravel()
    if w_in is None or w_res is None:
        w_in, w_res = params.weights()
    prev = np.concatenate([[0.0], x[:-1]])
    recur = w_res @ w_in if params.variant == "embedded" else w_res.sum(axis=1)
    pre = np.outer(w_in, x) + np.outer(recur, prev)
    return _features(np.maximum(pre, 0.0), "r", bias)


@dataclass(frozen=True)
class STOParams:
    """Spin-torque auto-oscillators driven by a current ``i_dc + input_gain * x``.

    Rates are in 1/s and currents in units where ``sigma * W_in * I`` is a rate.
    Each oscillator gets its own coupling ``W_in ~ U[w_min, w_max]``. With the
    defaults an oscillator with ``W_in = 1`` has stationary power 0.1 at
    ``x = -1`` and 0.9 at ``x = 1``, and the power relaxes over ~1/(2 gamma) = 500 ns,
    a few input intervals.
    """

    size: int = 24
    seed: int = 0
    gamma_damping: float = 1e6
    q: float = 2.0
    sigma: float = 1.0
    input_gain: float = 1.3333333333333333e7
    i_dc: float = 1.4666666666666667e7
    w_min: float = 0.0
    w_max: float = 1.0
    dt: float | None = None
    interval: float = 100e-9
    p0: float = 0.1

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise InvalidSpecificationError(f"size must be an integer >= 1, got {self.size!r}")
        if not self.gamma_damping > 0:
            raise InvalidSpecificationError("gamma_damping must be positive")
        if self.step * self.max_rate > 0.05:
            raise InvalidSpecificationError(f"dt * max_rate = {self.step * self.max_rate:.3g} exceeds 0.05")
        if not 0.0 <= self.p0 <= 1.0:
            raise InvalidSpecificationError("p0 must lie in [0, 1]")

    @property
    def max_rate(self):
        """Bound on the growth and damping rates for inputs in [-1, 1]."""
        w = max(abs(self.w_min), abs(self.w_max))
        return self.gamma_damping + self.sigma * w * (abs(self.i_dc) + abs(self.input_gain))

    @property
    def step(self):
        return self.dt if self.dt is not None else 0.01 / self.max_rate

    def weights(self):
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.w_min, self.w_max, self.size)

    def fixed_point(self, w, current):
        """Stationary power for a constant drive (0 below threshold)."""
        a = self.sigma * w * current
        g = self.gamma_damping
        return np.where(a > g, (a - g) / (g * self.q + a), 0.0)


def sto_features(inputs, params, bias=True, w_in=None):
    """Oscillator powers at the end of each input interval (RK4, clamped to [0, 1])."""
    x = np.asarray(inputs, dtype=float).ravel()
    if w_in is None:
        w_in = params.weights()
    current = params.i_dc + params.input_gain * x
    substeps = int(np.floor(params.interval / params.step + 1e-9))
    last = params.interval - substeps * params.step
    p0 = np.full(params.size, params.p0)
    powers, bad = backend.sto_power(w_in, current, params.gamma_damping, params.q, params.sigma,
                                    params.step, substeps, last if last > 1e-12 * params.step else 0.0, p0)
    if bad >= 0:
        raise PositivityViolationError("oscillator power left [0, 1]; dt too large", int(bad))
    return _features(powers, "p", bias)


@dataclass
class SweepRow:
    size: int
    mean: float
    std: float
    seeds: list
    accuracies: list = field(default_factory=list)


def baseline_features(inputs, kind, size, seed, bias=True, **params):
    if kind == "static":
        return static_features(inputs, StaticReservoirParams(size=size, seed=seed, **params), bias)
    if kind == "sto":
        return sto_features(inputs, STOParams(size=size, seed=seed, **params), bias)
    raise InvalidSpecificationError(f"unknown baseline kind {kind!r}")


def baseline_sweep(task, sizes, kind, seeds=range(5), n_train=None, bias=True, **params):
    """Accuracy versus reservoir size, mean and spread over ``seeds``.

    ``task`` is one sine/square stream; the first ``n_train`` samples (default
    half) train the readout, the rest test it.
    """
    n_train = len(task) // 2 if n_train is None else n_train
    seeds = list(seeds)
    rows = []
    for size in sizes:
        accs = []
        for seed in seeds:
            fm = baseline_features(task.inputs, kind, int(size), seed, bias, **params)
            w = readout.fit(fm.columns(0, n_train), task.targets[:, :n_train])
            pred = readout.predict(w, fm.columns(n_train))
            accs.append(readout.classification_accuracy(pred[0], task.targets[0, n_train:]))
        rows.append(SweepRow(int(size), float(np.mean(accs)), float(np.std(accs)), seeds, accs))
    return rows


def crossing(rows, level=0.99, sustained=True):
    """Smallest size whose mean accuracy reaches ``level`` (None if never).

    With ``sustained`` the accuracy must also stay at or above ``level`` for
    every larger size in the sweep.
    """
    ordered = sorted(rows, key=lambda r: r.size)
    if not sustained:
        return next((r.size for r in ordered if r.mean >= level), None)
    found = None
    for row in reversed(ordered):
        if row.mean < level:
            break
        found = row.size
    return found


def sweep_to_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "mean_accuracy", "std", "seeds"])
        for r in rows:
            writer.writerow([r.size, format(r.mean, ".17g"), format(r.std, ".17g"),
                             " ".join(str(s) for s in r.seeds)])
