"""Operators on truncated single-mode and two-mode Fock spaces.

Joint basis states are ordered row-major over ``(n_a, n_b)``:
``index = n_a * (cutoff_b + 1) + n_b``. Operators are dense complex arrays.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidSpecificationError


@dataclass(frozen=True)
class FockSpec:
    """Photon-number cutoffs of the two modes."""

    cutoff_a: int = 7
    cutoff_b: int = 7

    def __post_init__(self):
        for name in ("cutoff_a", "cutoff_b"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidSpecificationError(f"{name} must be an integer >= 1, got {value!r}")

    @property
    def dim_a(self):
        return self.cutoff_a + 1

    @property
    def dim_b(self):
        return self.cutoff_b + 1

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    def joint_index(self, n_a, n_b):
        if not (0 <= n_a <= self.cutoff_a and 0 <= n_b <= self.cutoff_b):
            raise InvalidSpecificationError(
                f"state |{n_a},{n_b}> outside truncation {self.cutoff_a}/{self.cutoff_b}")
        return n_a * self.dim_b + n_b

    def occupations(self):
        """(n_a, n_b) for every joint index, shape (dim, 2)."""
        na, nb = np.divmod(np.arange(self.dim), self.dim_b)
        return np.stack([na, nb], axis=1)

    @cached_property
    def a(self):
        return embed(annihilation(self.cutoff_a), "a", self)

    @cached_property
    def b(self):
        return embed(annihilation(self.cutoff_b), "b", self)


def annihilation(cutoff):
    """Single-mode lowering operator: ``a[n-1, n] = sqrt(n)``."""
    if int(cutoff) != cutoff or cutoff < 1:
        raise InvalidSpecificationError(f"cutoff must be an integer >= 1, got {cutoff!r}")
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(np.complex128)


def embed(op, mode, spec):
    """Lift a single-mode operator to the joint space (``a ⊗ I`` or ``I ⊗ b``)."""
    op = np.asarray(op)
    if mode == "a":
        if op.shape != (spec.dim_a, spec.dim_a):
            raise InvalidSpecificationError(f"operator shape {op.shape} does not match mode a dim {spec.dim_a}")
        return np.kron(op, np.eye(spec.dim_b))
    if mode == "b":
        if op.shape != (spec.dim_b, spec.dim_b):
            raise InvalidSpecificationError(f"operator shape {op.shape} does not match mode b dim {spec.dim_b}")
        return np.kron(np.eye(spec.dim_a), op)
    raise InvalidSpecificationError(f"mode must be 'a' or 'b', got {mode!r}")


def projector(n_a, n_b, spec):
    """``|n_a n_b><n_a n_b|`` on the joint space."""
    idx = spec.joint_index(n_a, n_b)
    out = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    out[idx, idx] = 1.0
    return out


def number(mode, spec):
    """Photon-number operator of one mode on the joint space."""
    low = spec.a if mode == "a" else spec.b if mode == "b" else None
    if low is None:
        raise InvalidSpecificationError(f"mode must be 'a' or 'b', got {mode!r}")
    return low.conj().T @ low


def dagger(op):
    return np.asarray(op).conj().T


def basis_state(n_a, n_b, spec):
    """Density matrix of the pure Fock state |n_a, n_b>."""
    return projector(n_a, n_b, spec)


def vacuum(spec):
    return basis_state(0, 0, spec)
