"""Benchmark tasks: sine/square waveform classification and Mackey-Glass prediction."""
import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import backend
from .errors import InvalidSpecificationError

SINE = np.sin(2 * np.pi * np.arange(8) / 8)
SQUARE = np.sign(np.sin(2 * np.pi * (np.arange(8) + 0.5) / 8))
SAMPLES_PER_WAVE = 8


@dataclass
class Dataset:
    """Inputs with one target row per output (class label or prediction delay)."""

    inputs: np.ndarray
    targets: np.ndarray
    kind: str
    seed: int | None = None
    metadata: dict = field(default_factory=dict)
    target_names: list | None = None

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float).ravel()
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if self.targets.shape[1] != self.inputs.size:
            raise InvalidSpecificationError(
                f"{self.targets.shape[1]} target columns for {self.inputs.size} inputs")
        if self.target_names is None:
            if self.kind == "sine_square":
                self.target_names = ["target_class"]
            else:
                self.target_names = [f"target_{i}" for i in range(self.targets.shape[0])]

    def __len__(self):
        return self.inputs.size

    def slice(self, start, stop):
        return Dataset(self.inputs[start:stop], self.targets[:, start:stop], self.kind,
                       self.seed, dict(self.metadata), list(self.target_names))

    def to_csv(self, path):
        header = {"kind": self.kind, "seed": self.seed, **self.metadata}
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True, default=str) + "\n")
            writer = csv.writer(fh)
            writer.writerow(["index", "input", *self.target_names])
            for i, x in enumerate(self.inputs):
                writer.writerow([i, format(x, ".17g"), *(format(v, ".17g") for v in self.targets[:, i])])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            header = json.loads(fh.readline()[1:])
            rows = list(csv.reader(fh))
        names = rows[0][2:]
        body = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).reshape(-1, len(names) + 1)
        kind, seed = header.pop("kind"), header.pop("seed")
        return cls(body[:, 0], body[:, 1:].T, kind, seed, header, names)


def gen_sine_square(n_waveforms, seed=42, kinds=None):
    """Concatenated 8-point sine or square waveforms; target 1 for sine points, 0 for square.

    Each waveform is sine or square with probability 1/2 (seeded). ``kinds``
    ("sine"/"square" per waveform) overrides the random draw.
    """
    if int(n_waveforms) != n_waveforms or n_waveforms < 1:
        raise InvalidSpecificationError(f"n_waveforms must be an integer >= 1, got {n_waveforms!r}")
    if kinds is None:
        rng = np.random.default_rng(seed)
        is_sine = rng.integers(0, 2, size=n_waveforms).astype(bool)
    else:
        if isinstance(kinds, str):
            kinds = [kinds] * n_waveforms
        if len(kinds) != n_waveforms or any(k not in ("sine", "square") for k in kinds):
            raise InvalidSpecificationError("kinds must list 'sine' or 'square' for every waveform")
        is_sine = np.array([k == "sine" for k in kinds])
    inputs = np.where(is_sine[:, None], SINE, SQUARE).ravel()
    targets = np.repeat(is_sine.astype(float), SAMPLES_PER_WAVE)
    meta = {"n_waveforms": int(n_waveforms), "samples_per_wave": SAMPLES_PER_WAVE}
    return Dataset(inputs, targets[None, :], "sine_square", seed, meta)


@dataclass(frozen=True)
class MackeyGlassConfig:
    """Delay equation dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t), unit sample spacing."""

    beta: float = 0.2
    gamma: float = 0.1
    tau: float = 17.0
    exponent: float = 10.0
    integration_step: float = 0.1
    history: float = 1.2
    warmup: int = 1000
    length: int = 2100
    seed: int | None = None

    def __post_init__(self):
        if not self.integration_step > 0:
            raise InvalidSpecificationError("integration_step must be positive")
        steps = round(1.0 / self.integration_step)
        if abs(steps * self.integration_step - 1.0) > 1e-9:
            raise InvalidSpecificationError(
                f"integration_step {self.integration_step} does not divide the unit sample spacing")
        if self.tau < 2 * self.integration_step or self.warmup < 0 or self.length < 1:
            raise InvalidSpecificationError(
                "tau must span at least two integration steps, warmup >= 0 and length >= 1")

    @property
    def steps_per_sample(self):
        return round(1.0 / self.integration_step)

    def as_dict(self):
        return asdict(self)


def gen_mackey_glass(config=MackeyGlassConfig()):
    """RK4 integration from the constant history; returns ``length`` samples after the warmup."""
    total = config.warmup + config.length
    series = backend.mackey_glass(config.beta, config.gamma, config.tau, config.exponent,
                                  config.integration_step, config.history,
                                  config.steps_per_sample, total)
    return np.asarray(series[config.warmup: total])


def make_delay_targets(series, delays=range(1, 101), train_len=1000, test_len=1000):
    """Train/test datasets where target row ``d`` at sample ``i`` is ``series[i + d]``."""
    series = np.asarray(series, dtype=float).ravel()
    delays = [int(d) for d in delays]
    if not delays or min(delays) < 0:
        raise InvalidSpecificationError("delays must be a non-empty list of non-negative integers")
    n = train_len + test_len
    need = n + max(delays)
    if series.size < need:
        raise InvalidSpecificationError(f"series of length {series.size} is too short; need {need}")
    inputs = series[:n]
    targets = np.stack([series[d: d + n] for d in delays])
    names = [f"target_{d}" for d in delays]
    meta = {"delays": delays}
    full = Dataset(inputs, targets, "mackey_glass", None, meta, names)
    return full.slice(0, train_len), full.slice(train_len, n)
