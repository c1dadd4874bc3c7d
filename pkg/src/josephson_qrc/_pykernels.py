"""Pure NumPy versions of the compiled kernels in ``_kernels.pyx``.

Same arguments, same results to rounding. Used when the extension is not
built, or on request through ``JQRC_BACKEND=python``.
"""
import math

import numpy as np


def lindblad_rk4(rho, K, collapse, nsteps, dt, last_dt=0.0):
    """RK4 on drho/dt = K rho + rho K^dagger + sum_c C rho C^dagger (dense)."""
    Kd = K.conj().T
    pairs = [(c, c.conj().T) for c in collapse]

    def rhs(r):
        out = K @ r + r @ Kd
        for c, cd in pairs:
            out += c @ r @ cd
        return out

    r = 0.5 * (rho + rho.conj().T)
    steps = [dt] * nsteps + ([last_dt] if last_dt > 0.0 else [])
    for h in steps:
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r = 0.5 * (r + r.conj().T)
    return r


def _delayed(ring, slope, size, n, lag, h, history):
    pos = n - lag
    if pos <= 0.0:
        return history if pos < 0.0 else ring[0]
    j = math.floor(pos)
    f = pos - j
    i0 = j % size
    if f == 0.0:
        return ring[i0]
    i1 = (j + 1) % size
    f2, f3 = f * f, f * f * f
    return ((2.0 * f3 - 3.0 * f2 + 1.0) * ring[i0] + (f3 - 2.0 * f2 + f) * h * slope[i0]
            + (3.0 * f2 - 2.0 * f3) * ring[i1] + (f3 - f2) * h * slope[i1])


def mackey_glass(beta, gamma, tau, exponent, h, history, steps_per_sample, n_samples):
    """Integrate the Mackey-Glass delay equation, returning x at t = 0, 1, ..., n_samples."""
    lag = tau / h
    if lag < 2.0:
        raise ValueError("tau must be at least two integration steps")
    size = int(lag) + 4
    ring = [0.0] * size
    slope = [0.0] * size

    def f(x, xd):
        return beta * xd / (1.0 + xd ** exponent) - gamma * x

    x = float(history)
    ring[0] = x
    out = np.empty(n_samples + 1)
    out[0] = x
    for n in range(steps_per_sample * n_samples):
        k1 = f(x, _delayed(ring, slope, size, n, lag, h, history))
        slope[n % size] = k1
        dm = _delayed(ring, slope, size, n, lag - 0.5, h, history)
        d1 = _delayed(ring, slope, size, n, lag - 1.0, h, history)
        k2 = f(x + 0.5 * h * k1, dm)
        k3 = f(x + 0.5 * h * k2, dm)
        k4 = f(x + h * k3, d1)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ring[(n + 1) % size] = x
        if (n + 1) % steps_per_sample == 0:
            out[(n + 1) // steps_per_sample] = x
    return out


def sto_power(w_in, currents, gamma, q, sigma, dt, substeps, last_dt, p0):
    """RK4 on the auto-oscillator power equation; see the compiled twin."""
    w = np.asarray(w_in, dtype=float)
    cur = np.asarray(currents, dtype=float)
    p = np.array(p0, dtype=float, copy=True)
    out = np.empty((w.size, cur.size))
    bad = -1
    steps = [dt] * substeps + ([last_dt] if last_dt > 0.0 else [])

    def f(x, a):
        return 2.0 * (-gamma * (1.0 + q * x) + a * (1.0 - x)) * x

    for t, current in enumerate(cur):
        a = w * current * sigma
        x = p
        for h in steps:
            k1 = f(x, a)
            k2 = f(x + 0.5 * h * k1, a)
            k3 = f(x + 0.5 * h * k2, a)
            k4 = f(x + h * k3, a)
            x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if bad < 0 and (np.any(x < -1e-9) or np.any(x > 1.0 + 1e-9)):
                bad = t
        p = np.clip(x, 0.0, 1.0)
        out[:, t] = p
    return out, bad
