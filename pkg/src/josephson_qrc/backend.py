"""Kernel backend selection.

The compiled extension (``_kernels``) is used when it imports; otherwise the
NumPy twins in ``_pykernels`` take over. ``JQRC_BACKEND=python`` forces the
fallback, ``JQRC_BACKEND=compiled`` makes a missing extension an error.
"""
import logging
import os
from types import SimpleNamespace

import numpy as np

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None


def to_dia(M):
    """Diagonal storage of a square matrix: ``coef[k, i] = M[i, i + offsets[k]]``."""
    M = np.asarray(M)
    d = M.shape[0]
    offsets, rows = [], []
    for o in range(-(d - 1), d):
        diag = np.diagonal(M, o)
        if not np.any(diag):
            continue
        row = np.zeros(d, dtype=np.complex128)
        if o >= 0:
            row[: d - o] = diag
        else:
            row[-o:] = diag
        offsets.append(o)
        rows.append(row)
    if not rows:
        return np.zeros(0, dtype=np.int32), np.zeros((0, d), dtype=np.complex128)
    return np.asarray(offsets, dtype=np.int32), np.vstack(rows)


def _compiled_lindblad_rk4(rho, K, collapse, nsteps, dt, last_dt=0.0):
    k_off, k_coef = to_dia(K)
    if k_off.size == 0:
        k_off, k_coef = np.zeros(1, dtype=np.int32), np.zeros((1, K.shape[0]), dtype=np.complex128)
    sizes, offs, coefs = [], [], []
    for c in collapse:
        o, cf = to_dia(c)
        sizes.append(o.size)
        offs.append(o)
        coefs.append(cf)
    c_off = np.concatenate(offs) if offs else np.zeros(0, dtype=np.int32)
    c_coef = np.vstack(coefs) if coefs else np.zeros((0, K.shape[0]), dtype=np.complex128)
    return _kernels.lindblad_rk4(
        np.asarray(rho, dtype=np.complex128), k_off, k_coef,
        np.asarray(sizes, dtype=np.int32), c_off.astype(np.int32), c_coef,
        int(nsteps), float(dt), float(last_dt),
    )


_BACKENDS = {
    "python": SimpleNamespace(
        name="python",
        lindblad_rk4=_pykernels.lindblad_rk4,
        mackey_glass=_pykernels.mackey_glass,
        sto_power=_pykernels.sto_power,
    ),
}
if _kernels is not None:
    _BACKENDS["compiled"] = SimpleNamespace(
        name="compiled",
        lindblad_rk4=_compiled_lindblad_rk4,
        mackey_glass=_kernels.mackey_glass,
        sto_power=_kernels.sto_power,
    )


def available():
    return sorted(_BACKENDS)


def get(name=None):
    """Return the kernel namespace ``name`` (default: the active one)."""
    if name is None:
        return _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ImportError(f"kernel backend {name!r} unavailable (have {available()})") from None


def use(name):
    """Switch the process-wide backend; returns the previous name."""
    global _active
    prev = _active.name
    _active = get(name)
    return prev


def _initial():
    wanted = os.environ.get("JQRC_BACKEND", "auto").lower()
    if wanted == "auto":
        return _BACKENDS.get("compiled", _BACKENDS["python"])
    return get(wanted)


_active = _initial()
if _active.name == "python":
    log.debug("using pure-Python kernels")


def lindblad_rk4(rho, K, collapse, nsteps, dt, last_dt=0.0):
    return _active.lindblad_rk4(rho, K, collapse, nsteps, dt, last_dt)


def mackey_glass(beta, gamma, tau, exponent, h, history, steps_per_sample, n_samples):
    return _active.mackey_glass(beta, gamma, tau, exponent, h, history, steps_per_sample, n_samples)


def sto_power(w_in, currents, gamma, q, sigma, dt, substeps, last_dt, p0):
    return _active.sto_power(w_in, currents, gamma, q, sigma, dt, substeps, last_dt, p0)
