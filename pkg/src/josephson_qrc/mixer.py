"""The Josephson-mixer quantum reservoir.

Two lossy modes with a beam-splitter (conversion) coupling, both driven
resonantly with an amplitude proportional to the current input. Features are
the occupation probabilities of low Fock states at the end of each segment.
"""
import csv
import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InvalidSpecificationError, NumericalError, TruncationError
from .fock import FockSpec, dagger, vacuum
from .lindblad import LindbladProblem, evolve_segment, steady_state

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DISSIPATOR_MODES = ("joint", "separate")
TRUNCATION_TOL = 1e-3


@dataclass(frozen=True)
class MixerConfig:
    """Physical and numerical parameters of the mixer (rates in rad/s, times in s).

    The drive amplitude for input ``x`` is ``drive_scale * eps0 * x``;
    ``drive_scale`` is what :func:`calibrate_drive` adjusts.
    """

    kappa_a: float = TWO_PI * 17e6
    kappa_b: float = TWO_PI * 21e6
    g: float = TWO_PI * 20e6
    eps0_a: float = 2e6
    eps0_b: float = 2e6
    drive_scale: float = 1.0
    segment: float = 100e-9
    dt: float = 5e-11
    spec: FockSpec = field(default_factory=FockSpec)
    dissipator_mode: str = "joint"

    def __post_init__(self):
        for name in ("kappa_a", "kappa_b", "segment", "dt"):
            if not getattr(self, name) > 0:
                raise InvalidSpecificationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.g < 0:
            raise InvalidSpecificationError(f"g must be >= 0, got {self.g}")
        if not self.drive_scale > 0:
            raise InvalidSpecificationError(f"drive_scale must be positive, got {self.drive_scale}")
        if self.dissipator_mode not in DISSIPATOR_MODES:
            raise InvalidSpecificationError(
                f"dissipator_mode must be one of {DISSIPATOR_MODES}, got {self.dissipator_mode!r}")

    def with_(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        out = asdict(self)
        out["spec"] = {"cutoff_a": self.spec.cutoff_a, "cutoff_b": self.spec.cutoff_b}
        return out


@dataclass(frozen=True)
class ReadoutSpec:
    """Measured states: every |n_a n_b> with n_a <= max_na and n_b <= max_nb."""

    max_na: int = 3
    max_nb: int = 3

    def __post_init__(self):
        if self.max_na < 0 or self.max_nb < 0:
            raise InvalidSpecificationError("readout limits must be >= 0")

    @property
    def n_neurons(self):
        return (self.max_na + 1) * (self.max_nb + 1)

    def states(self):
        return [(na, nb) for na in range(self.max_na + 1) for nb in range(self.max_nb + 1)]

    def labels(self):
        return [f"p_{na}{nb}" for na, nb in self.states()]

    def indices(self, spec):
        if self.max_na > spec.cutoff_a or self.max_nb > spec.cutoff_b:
            raise InvalidSpecificationError(
                f"readout {self.max_na}/{self.max_nb} exceeds truncation {spec.cutoff_a}/{spec.cutoff_b}")
        return np.array([spec.joint_index(na, nb) for na, nb in self.states()])

    @classmethod
    def square(cls, n_neurons):
        """The readout of ``n_neurons = k**2`` states."""
        k = math.isqrt(n_neurons)
        if k * k != n_neurons or k < 1:
            raise InvalidSpecificationError(f"{n_neurons} is not a positive perfect square")
        return cls(k - 1, k - 1)


@dataclass
class FeatureMatrix:
    """Features (rows) by samples (columns), optionally ending in a constant bias row."""

    values: np.ndarray
    labels: list
    bias_row: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise InvalidSpecificationError("feature values must be a 2-D array")
        if len(self.labels) != self.values.shape[0]:
            raise InvalidSpecificationError(
                f"{len(self.labels)} labels for {self.values.shape[0]} feature rows")

    @property
    def n_features(self):
        return self.values.shape[0]

    @property
    def n_samples(self):
        return self.values.shape[1]

    def columns(self, start, stop=None):
        """Samples ``start:stop`` as a new FeatureMatrix."""
        return FeatureMatrix(self.values[:, start:stop], list(self.labels), self.bias_row, dict(self.info))

    def rows(self, labels):
        """Subset of feature rows by label, keeping the bias row if present."""
        keep = list(labels) + (["bias"] if self.bias_row else [])
        idx = [self.labels.index(name) for name in keep]
        return FeatureMatrix(self.values[idx], keep, self.bias_row, dict(self.info))

    def to_csv(self, path):
        """One row per sample, one column per feature, 17 significant digits."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample", *self.labels])
            for j in range(self.n_samples):
                writer.writerow([j, *(format(v, ".17g") for v in self.values[:, j])])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        labels = rows[0][1:]
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).T
        values = values.reshape(len(labels), -1)
        return cls(values, labels, bias_row=bool(labels) and labels[-1] == "bias")


def encode_input(x, config):
    """Drive amplitudes (eps_a, eps_b) for input ``x``; linear in ``x``."""
    s = config.drive_scale * x
    return config.eps0_a * s, config.eps0_b * s


def build_hamiltonian(eps_a, eps_b, config):
    """Conversion coupling plus resonant drives of both modes, in the rotating frame."""
    a, b = config.spec.a, config.spec.b
    ad, bd = dagger(a), dagger(b)
    H = config.g * (a @ bd + ad @ b)
    H = H + 1j * eps_a * math.sqrt(2 * config.kappa_a) * (a - ad)
    H = H + 1j * eps_b * math.sqrt(2 * config.kappa_b) * (b - bd)
    return 0.5 * (H + dagger(H))


def collapse_operators(config):
    a, b = config.spec.a, config.spec.b
    ca, cb = math.sqrt(config.kappa_a) * a, math.sqrt(config.kappa_b) * b
    if config.dissipator_mode == "joint":
        return [ca + cb]
    return [ca, cb]


def max_rate(config, eps_a=0.0, eps_b=0.0):
    """Fastest physical rate: dissipation, coupling or drive strength."""
    return max(config.kappa_a, config.kappa_b, config.g,
               abs(eps_a) * math.sqrt(2 * config.kappa_a),
               abs(eps_b) * math.sqrt(2 * config.kappa_b))


def problem_for(x, config, check_stability=True):
    """The master-equation problem while input ``x`` is applied."""
    eps_a, eps_b = encode_input(x, config)
    return LindbladProblem(build_hamiltonian(eps_a, eps_b, config), collapse_operators(config),
                           config.dt, max_rate(config, eps_a, eps_b), check_stability)


def read_populations(rho, readout, spec=None):
    """Occupation probabilities of the readout states, in joint-index order."""
    rho = np.asarray(rho)
    if spec is None:
        spec = _spec_for_dim(rho.shape[0], readout)
    return np.real(np.diagonal(rho))[readout.indices(spec)].copy()


def _spec_for_dim(dim, readout):
    c = math.isqrt(dim)
    if c * c != dim:
        raise InvalidSpecificationError(f"cannot infer a square truncation from dimension {dim}; pass spec")
    return FockSpec(c - 1, c - 1)


def edge_population(rho, spec):
    """Total probability of states with n_a or n_b at the cutoff."""
    occ = spec.occupations()
    edge = (occ[:, 0] == spec.cutoff_a) | (occ[:, 1] == spec.cutoff_b)
    return float(np.real(np.diagonal(rho))[edge].sum())


def mean_photons(rho, spec):
    occ = spec.occupations()
    p = np.real(np.diagonal(rho))
    return float(p @ occ[:, 0]), float(p @ occ[:, 1])


def run_reservoir(inputs, config, readout=ReadoutSpec(), bias=True, rho0=None,
                  truncation_tol=TRUNCATION_TOL, full_populations=False):
    """Stream ``inputs`` through the mixer, one segment per input, from vacuum.

    The state carries over between inputs. Returns a FeatureMatrix whose
    ``info`` records the largest edge population seen. With
    ``full_populations`` the info also holds all joint-state populations.
    """
    inputs = np.asarray(inputs, dtype=float).ravel()
    if not np.all(np.isfinite(inputs)):
        raise InvalidSpecificationError("inputs must be finite")
    spec = config.spec
    idx = readout.indices(spec)
    rho = vacuum(spec) if rho0 is None else np.array(rho0, dtype=np.complex128)
    n_read = idx.size
    values = np.empty((n_read + (1 if bias else 0), inputs.size))
    full = np.empty((spec.dim, inputs.size)) if full_populations else None
    cache = {}
    worst = 0.0
    for i, x in enumerate(inputs):
        problem = cache.get(x)
        if problem is None:
            problem = cache[x] = problem_for(x, config)
        try:
            rho = evolve_segment(problem, rho, config.segment)
        except NumericalError as err:
            raise err.with_index(i) from err
        pops = np.real(np.diagonal(rho))
        values[:n_read, i] = pops[idx]
        if full is not None:
            full[:, i] = pops
        edge = edge_population(rho, spec)
        worst = max(worst, edge)
        if truncation_tol is not None and edge > truncation_tol:
            raise TruncationError(
                f"population {edge:.3g} at the Fock cutoff exceeds {truncation_tol}; lower the drive", i)
    if bias:
        values[n_read] = 1.0
    labels = readout.labels() + (["bias"] if bias else [])
    info = {"max_edge_population": worst, "final_state": rho}
    if full is not None:
        info["populations"] = full
    return FeatureMatrix(values, labels, bias, info)


def steady_edge_population(x, config):
    """Edge population of the stationary state under constant input ``x``."""
    rho = steady_state(problem_for(x, config, check_stability=False))
    return edge_population(rho, config.spec), rho


@dataclass
class Calibration:
    drive_scale: float
    x_max: float
    edge_population: float
    mean_photons: tuple
    target: str

    def as_dict(self):
        return asdict(self)


def calibrate_drive(config, x_max=1.0, edge_budget=2e-4, photons=None, rtol=1e-3, max_iter=80):
    """Choose ``drive_scale`` from the stationary state under constant input ``x_max``.

    By default the scale is the largest one keeping the cutoff-edge population
    at or below ``edge_budget``. With ``photons`` the scale instead makes the
    larger of the two mean photon numbers equal that target. Both measures grow
    monotonically with the drive, so bisection on a log scale suffices.
    """
    if x_max == 0:
        raise InvalidSpecificationError("x_max must be nonzero")
    if photons is None and not 0 < edge_budget < 1:
        raise InvalidSpecificationError(f"edge_budget must lie in (0, 1), got {edge_budget}")

    def measure(scale):
        cfg = config.with_(drive_scale=scale)
        edge, rho = steady_edge_population(x_max, cfg)
        n = mean_photons(rho, cfg.spec)
        value = max(n) if photons is not None else edge
        return value, edge, n

    goal = photons if photons is not None else edge_budget
    # bracket: start from a drive giving ~0.01 photons and expand upward
    base = math.sqrt(min(config.kappa_a, config.kappa_b) / 2) * 0.1
    lo = base / (abs(x_max) * max(abs(config.eps0_a), abs(config.eps0_b)))
    hi = lo
    value = measure(hi)[0]
    if value > goal:
        while value > goal:
            hi, lo = lo, lo / 2
            value = measure(lo)[0]
    else:
        while value <= goal:
            lo, hi = hi, hi * 2
            value = measure(hi)[0]
    for _ in range(max_iter):
        if hi / lo - 1 < rtol:
            break
        mid = math.sqrt(lo * hi)
        if measure(mid)[0] <= goal:
            lo = mid
        else:
            hi = mid
    value, edge, n = measure(lo)
    log.info("calibrated drive_scale=%.6g (edge %.3g, photons %.3g/%.3g)", lo, edge, *n)
    return Calibration(lo, float(x_max), edge, n, "photons" if photons is not None else "edge")
