"""Linear readout: one-shot pseudoinverse training, prediction and metrics."""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecificationError

LOG_FLOOR = 1e-12
PINV_RCOND = 1e-12


@dataclass
class ReadoutWeights:
    """Weights W (n_outputs x n_features) with the feature labels they expect."""

    values: np.ndarray
    labels: list

    @property
    def n_outputs(self):
        return self.values.shape[0]

    @property
    def bias(self):
        return bool(self.labels) and self.labels[-1] == "bias"

    def to_csv(self, path, output_names=None):
        names = output_names or [f"y{i}" for i in range(self.n_outputs)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["output", *self.labels])
            for name, row in zip(names, self.values):
                writer.writerow([name, *(format(v, ".17g") for v in row)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
        return cls(values.reshape(len(rows) - 1, len(rows[0]) - 1), rows[0][1:])


def _as_values(features):
    values = getattr(features, "values", features)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise InvalidSpecificationError("features must be a 2-D (features x samples) array")
    return values


def _labels(features, n):
    return list(getattr(features, "labels", [f"f{i}" for i in range(n)]))


def pinv(F, rcond=PINV_RCOND):
    """Moore-Penrose pseudoinverse via SVD, dropping singular values below rcond * s_max."""
    return np.linalg.pinv(F, rcond=rcond)


def fit(features, targets, ridge=0.0):
    """Least-squares weights W = Y F^+ (minimal Frobenius norm among minimisers).

    With ``ridge > 0`` the Tikhonov-regularised solution ``Y F^T (F F^T + ridge I)^-1``
    is returned instead.
    """
    F = _as_values(features)
    if F.size == 0:
        raise InvalidSpecificationError("empty feature matrix")
    Y = np.atleast_2d(np.asarray(targets, dtype=float))
    if Y.shape[1] != F.shape[1]:
        raise InvalidSpecificationError(
            f"targets have {Y.shape[1]} samples, features have {F.shape[1]}")
    if ridge < 0:
        raise InvalidSpecificationError(f"ridge must be >= 0, got {ridge}")
    if ridge == 0:
        W = Y @ pinv(F)
    else:
        gram = F @ F.T + ridge * np.eye(F.shape[0])
        W = np.linalg.solve(gram, F @ Y.T).T
    return ReadoutWeights(W, _labels(features, F.shape[0]))


def predict(weights, features):
    """Y = W F."""
    F = _as_values(features)
    W = getattr(weights, "values", weights)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[1] != F.shape[0]:
        raise InvalidSpecificationError(f"weights expect {W.shape[1]} features, got {F.shape[0]}")
    return W @ F


def _pair(pred, target):
    pred = np.asarray(pred, dtype=float).ravel()
    target = np.asarray(target, dtype=float).ravel()
    if pred.size != target.size:
        raise InvalidSpecificationError(f"length mismatch: {pred.size} predictions, {target.size} targets")
    if pred.size == 0:
        raise InvalidSpecificationError("empty input")
    return pred, target


def classification_accuracy(pred, target, threshold=0.5):
    """Fraction of samples where ``pred >= threshold`` agrees with ``target == 1``."""
    pred, target = _pair(pred, target)
    return float(np.mean((pred >= threshold) == (target == 1)))


def rmse(pred, target):
    """(rmse_paper, rmse_standard): sqrt(sum e^2) / N and sqrt(sum e^2 / N)."""
    pred, target = _pair(pred, target)
    n = pred.size
    sq = float(np.sum((pred - target) ** 2))
    standard = np.sqrt(sq / n)
    return standard / np.sqrt(n), standard


def _rows(pred, target, delays):
    pred = np.atleast_2d(np.asarray(pred, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))
    if pred.shape != target.shape:
        raise InvalidSpecificationError(f"shape mismatch {pred.shape} vs {target.shape}")
    if delays is not None and len(delays) != pred.shape[0]:
        raise InvalidSpecificationError(f"{len(delays)} delays for {pred.shape[0]} prediction rows")
    return pred, target


def log_error_curve(pred, target, delays=None):
    """Per delay row: mean of log10(|error| + 1e-12) over samples."""
    pred, target = _rows(pred, target, delays)
    return np.mean(np.log10(np.abs(pred - target) + LOG_FLOOR), axis=1)


def log_rmse_curve(pred, target, delays=None):
    """Per delay row: log10 of the conventional RMSE."""
    pred, target = _rows(pred, target, delays)
    return np.log10(np.sqrt(np.mean((pred - target) ** 2, axis=1)) + LOG_FLOOR)
