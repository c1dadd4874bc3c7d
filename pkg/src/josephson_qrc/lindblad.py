"""Fixed-step RK4 integration of the Lindblad master equation.

The state is advanced over segments with a constant Hamiltonian. The hot loop
lives in :mod:`josephson_qrc.backend`; this module owns validation, the
stability guard and the post-segment physical checks.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import backend
from .errors import (
    IntegratorDivergenceError,
    InvalidSpecificationError,
    PositivityViolationError,
)

STABILITY_LIMIT = 0.05
TRACE_DRIFT_TOL = 1e-6
POSITIVITY_TOL = 1e-6


def _estimate_rate(hamiltonian, collapse_ops):
    # largest coupling-matrix element: a conservative stand-in for the fastest rate
    rate = float(np.abs(hamiltonian).max()) if hamiltonian.size else 0.0
    for c in collapse_ops:
        rate = max(rate, float(np.abs(c).max()) ** 2)
    return rate


@dataclass
class LindbladProblem:
    """Hamiltonian (rad/s), collapse operators (sqrt(rad/s)) and RK4 step (s).

    ``max_rate`` is the fastest physical rate of the problem; when omitted it is
    estimated from the largest operator matrix elements. ``check_stability``
    can be switched off for problems that are only solved for their stationary
    state and never integrated.
    """

    hamiltonian: np.ndarray
    collapse_ops: list = field(default_factory=list)
    dt: float = 5e-11
    max_rate: float | None = None
    check_stability: bool = True

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=np.complex128)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise InvalidSpecificationError(f"Hamiltonian must be square, got shape {H.shape}")
        scale = max(1.0, float(np.abs(H).max()))
        if np.abs(H - H.conj().T).max() > 1e-10 * scale:
            raise InvalidSpecificationError("Hamiltonian is not Hermitian")
        self.hamiltonian = H
        ops = [np.asarray(c, dtype=np.complex128) for c in self.collapse_ops]
        for c in ops:
            if c.shape != H.shape:
                raise InvalidSpecificationError(f"collapse operator shape {c.shape} != {H.shape}")
        self.collapse_ops = ops
        if not self.dt > 0:
            raise InvalidSpecificationError(f"dt must be positive, got {self.dt}")
        if self.max_rate is None:
            self.max_rate = _estimate_rate(H, ops)
        if self.check_stability and self.dt * self.max_rate > STABILITY_LIMIT:
            raise InvalidSpecificationError(
                f"dt * max_rate = {self.dt * self.max_rate:.3g} exceeds {STABILITY_LIMIT}; reduce dt")

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def effective(self):
        """Non-Hermitian generator ``K = -iH - 1/2 sum C^dagger C``."""
        K = -1j * self.hamiltonian
        for c in self.collapse_ops:
            K = K - 0.5 * (c.conj().T @ c)
        return K


def _check_dims(problem, rho):
    rho = np.asarray(rho)
    if rho.shape != (problem.dim, problem.dim):
        raise InvalidSpecificationError(f"state shape {rho.shape} does not match operator dim {problem.dim}")
    return rho


def lindblad_rhs(problem, rho):
    """drho/dt = -i[H, rho] + sum_c (C rho C^dagger - 1/2 {C^dagger C, rho})."""
    rho = _check_dims(problem, rho)
    H = problem.hamiltonian
    out = -1j * (H @ rho - rho @ H)
    for c in problem.collapse_ops:
        cd = c.conj().T
        cdc = cd @ c
        out += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def _split_steps(duration, dt):
    ratio = duration / dt
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        n = math.floor(ratio)
    rest = duration - n * dt
    return n, (rest if rest > 1e-12 * dt else 0.0)


def min_eigenvalue(rho):
    return float(np.linalg.eigvalsh(rho)[0])


def evolve_segment(problem, rho, duration, check=True):
    """Advance ``rho`` by ``duration`` seconds with RK4 at step ``problem.dt``.

    The last step is shortened so the segment ends exactly at ``duration``.
    With ``check`` the trace drift and the smallest eigenvalue are verified.
    """
    rho = _check_dims(problem, rho)
    if not problem.check_stability and problem.dt * problem.max_rate > STABILITY_LIMIT:
        raise InvalidSpecificationError("problem built without the stability guard cannot be integrated")
    if duration < 0:
        raise InvalidSpecificationError(f"duration must be >= 0, got {duration}")
    rho = np.asarray(rho, dtype=np.complex128)
    if duration == 0:
        return rho.copy()
    nsteps, last = _split_steps(duration, problem.dt)
    out = backend.lindblad_rk4(rho, problem.effective(), problem.collapse_ops, nsteps, problem.dt, last)
    out = 0.5 * (out + out.conj().T)
    if check:
        if not np.all(np.isfinite(out)):
            raise IntegratorDivergenceError("non-finite density matrix; dt too large")
        drift = abs(np.trace(out).real - np.trace(rho).real)
        if drift > TRACE_DRIFT_TOL:
            raise IntegratorDivergenceError(f"trace drifted by {drift:.3g} over the segment; dt too large")
        lam = min_eigenvalue(out)
        if lam < -POSITIVITY_TOL:
            raise PositivityViolationError(f"density matrix eigenvalue {lam:.3g} < -{POSITIVITY_TOL}")
    return out


def liouvillian(problem):
    """Sparse superoperator acting on the row-major vectorisation of rho."""
    H = sp.csr_matrix(problem.hamiltonian)
    eye = sp.identity(problem.dim, dtype=np.complex128, format="csr")
    L = -1j * (sp.kron(H, eye) - sp.kron(eye, H.T))
    for c in problem.collapse_ops:
        C = sp.csr_matrix(c)
        cdc = (C.conj().T @ C).tocsr()
        L = L + sp.kron(C, C.conj()) - 0.5 * sp.kron(cdc, eye) - 0.5 * sp.kron(eye, cdc.T)
    return L.tocsc()


def steady_state(problem):
    """Stationary state from a sparse solve with the trace condition replacing one equation."""
    d = problem.dim
    L = liouvillian(problem).tolil()
    trace_row = np.zeros(d * d, dtype=np.complex128)
    trace_row[:: d + 1] = 1.0
    L[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=np.complex128)
    rhs[0] = 1.0
    vec = spla.spsolve(L.tocsc(), rhs)
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real
