# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Lindblad RK4 segments, Mackey-Glass and STO integrators.

Signatures mirror :mod:`josephson_qrc._pykernels`; :mod:`josephson_qrc.backend`
picks one of the two at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, floor
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from "_dia.h" nogil:
    ctypedef struct dia_t:
        int nk
        const int* off
        const double* re
        const double* im
    void dia_lindblad(int d, dia_t kop, int m, const dia_t* cops,
                      double* const* tr, double* const* ti,
                      const double* sr, const double* si, double* outr, double* outi)
    void dia_rk4(int d, dia_t kop, int m, const dia_t* cops,
                 double* const* tr, double* const* ti,
                 double* rr, double* ri, double* sr, double* si,
                 double* kr, double* ki, double* ar, double* ai,
                 int nsteps, double h, double last_h)


def lindblad_rk4(rho, k_off, k_coef, c_sizes, c_off, c_coef,
                 int nsteps, double dt, double last_dt=0.0):
    """Advance ``rho`` by ``nsteps`` RK4 steps of ``dt`` plus one of ``last_dt``.

    ``k_off``/``k_coef`` hold the diagonals of K = -iH - 1/2 sum C^dagger C,
    ``c_off``/``c_coef`` the concatenated diagonals of each collapse operator
    (``c_sizes[c]`` diagonals for operator c).
    """
    cdef int d = rho.shape[0]
    cdef int n = d * d
    cdef int m = len(c_sizes)
    cdef int[::1] koff = np.ascontiguousarray(k_off, dtype=np.int32)
    cdef int[::1] coff = np.ascontiguousarray(c_off, dtype=np.int32)
    if c_off.shape[0] == 0:
        coff = np.zeros(1, dtype=np.int32)
    cdef double[:, ::1] kre = np.ascontiguousarray(np.real(k_coef), dtype=np.float64)
    cdef double[:, ::1] kim = np.ascontiguousarray(np.imag(k_coef), dtype=np.float64)
    cc = np.asarray(c_coef, dtype=np.complex128).reshape(-1, d)
    if cc.shape[0] == 0:
        cc = np.zeros((1, d), dtype=np.complex128)
    cdef double[:, ::1] cre = np.ascontiguousarray(cc.real)
    cdef double[:, ::1] cim = np.ascontiguousarray(cc.imag)

    cdef int maxoff = 0
    cdef int k
    for k in range(koff.shape[0]):
        maxoff = max(maxoff, abs(koff[k]))
    for k in range(coff.shape[0]):
        maxoff = max(maxoff, abs(coff[k]))
    cdef int pad = (maxoff + 1) * (d + 1) + 16
    cdef int stride = n + 2 * pad

    # planes: R, S, K, A (real+imag) and one T pair per collapse operator
    cdef int nplanes = 8 + 2 * max(m, 1)
    work = np.zeros(nplanes * stride, dtype=np.float64)
    cdef double[::1] w = work
    cdef double* base = &w[0] + pad
    cdef double* Rr = base
    cdef double* Ri = base + stride
    cdef double* Sr = base + 2 * stride
    cdef double* Si = base + 3 * stride
    cdef double* Kr = base + 4 * stride
    cdef double* Ki = base + 5 * stride
    cdef double* Ar = base + 6 * stride
    cdef double* Ai = base + 7 * stride

    herm = 0.5 * (rho + rho.conj().T)
    work[pad:pad + n] = herm.real.ravel()
    work[pad + stride:pad + stride + n] = herm.imag.ravel()

    cdef dia_t kop
    kop.nk = koff.shape[0]
    kop.off = &koff[0]
    kop.re = &kre[0, 0]
    kop.im = &kim[0, 0]

    cdef dia_t* cops = <dia_t*> malloc(max(m, 1) * sizeof(dia_t))
    cdef double** tr = <double**> malloc(max(m, 1) * sizeof(double*))
    cdef double** ti = <double**> malloc(max(m, 1) * sizeof(double*))
    cdef int c, start = 0
    for c in range(m):
        cops[c].nk = c_sizes[c]
        cops[c].off = &coff[start]
        cops[c].re = &cre[start, 0]
        cops[c].im = &cim[start, 0]
        tr[c] = base + (8 + 2 * c) * stride
        ti[c] = base + (9 + 2 * c) * stride
        start += c_sizes[c]

    try:
        with nogil:
            dia_rk4(d, kop, m, cops, tr, ti, Rr, Ri, Sr, Si, Kr, Ki, Ar, Ai, nsteps, dt, last_dt)
    finally:
        free(cops)
        free(tr)
        free(ti)

    out = work[pad:pad + n] + 1j * work[pad + stride:pad + stride + n]
    return out.reshape(d, d)


cdef inline double _mg_rhs(double x, double xd, double beta, double gamma, double expo) noexcept nogil:
    return beta * xd / (1.0 + pow(xd, expo)) - gamma * x


cdef inline double _delayed(const double* ring, const double* slope, int size, long n, double lag,
                            double h, double history) noexcept nogil:
    # value at (possibly fractional) grid position n - lag; constant history before t = 0.
    # Cubic Hermite interpolation on stored values and slopes keeps RK4 fourth order.
    cdef double pos = n - lag
    if pos <= 0.0:
        return history if pos < 0.0 else ring[0]
    cdef long j = <long> floor(pos)
    cdef double f = pos - j
    cdef long i0 = j % size
    if f == 0.0:
        return ring[i0]
    cdef long i1 = (j + 1) % size
    cdef double f2 = f * f, f3 = f2 * f
    return ((2.0 * f3 - 3.0 * f2 + 1.0) * ring[i0] + (f3 - 2.0 * f2 + f) * h * slope[i0]
            + (3.0 * f2 - 2.0 * f3) * ring[i1] + (f3 - f2) * h * slope[i1])


def mackey_glass(double beta, double gamma, double tau, double exponent, double h,
                 double history, int steps_per_sample, int n_samples):
    """Integrate the Mackey-Glass delay equation, returning x at t = 0, 1, ..., n_samples.

    Requires ``tau >= 2 h`` so every delayed value lies on already computed steps.
    """
    cdef double lag = tau / h
    if lag < 2.0:
        raise ValueError("tau must be at least two integration steps")
    cdef int size = <int> lag + 4
    ring_arr = np.empty(size, dtype=np.float64)
    slope_arr = np.empty(size, dtype=np.float64)
    out_arr = np.empty(n_samples + 1, dtype=np.float64)
    cdef double[::1] ring = ring_arr
    cdef double[::1] slope = slope_arr
    cdef double[::1] out = out_arr
    cdef long n, total = <long> steps_per_sample * n_samples
    cdef double x = history, k1, k2, k3, k4, d0, dm, d1
    ring[0] = x
    out[0] = x
    with nogil:
        for n in range(total):
            d0 = _delayed(&ring[0], &slope[0], size, n, lag, h, history)
            k1 = _mg_rhs(x, d0, beta, gamma, exponent)
            slope[n % size] = k1
            dm = _delayed(&ring[0], &slope[0], size, n, lag - 0.5, h, history)
            d1 = _delayed(&ring[0], &slope[0], size, n, lag - 1.0, h, history)
            k2 = _mg_rhs(x + 0.5 * h * k1, dm, beta, gamma, exponent)
            k3 = _mg_rhs(x + 0.5 * h * k2, dm, beta, gamma, exponent)
            k4 = _mg_rhs(x + h * k3, d1, beta, gamma, exponent)
            x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            ring[(n + 1) % size] = x
            if (n + 1) % steps_per_sample == 0:
                out[(n + 1) // steps_per_sample] = x
    return out_arr


cdef inline double _sto_rhs(double p, double a, double gamma, double q) noexcept nogil:
    return 2.0 * (-gamma * (1.0 + q * p) + a * (1.0 - p)) * p


def sto_power(w_in, currents, double gamma, double q, double sigma, double dt,
              int substeps, double last_dt, p0):
    """RK4 on the auto-oscillator power equation, sampled at each interval end.

    Returns ``(powers, bad)`` with ``powers`` of shape (n_osc, n_inputs) and
    ``bad`` the first input index where p left [-1e-9, 1 + 1e-9], or -1.
    """
    cdef double[::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[::1] cur = np.ascontiguousarray(currents, dtype=np.float64)
    cdef int n_osc = w.shape[0], n_in = cur.shape[0]
    out_arr = np.empty((n_osc, n_in), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] p = np.array(p0, dtype=np.float64, copy=True)
    cdef int t, j, s, bad = -1, total = substeps + (1 if last_dt > 0.0 else 0)
    cdef double a, x, k1, k2, k3, k4, hh
    with nogil:
        for t in range(n_in):
            for j in range(n_osc):
                a = w[j] * cur[t] * sigma
                x = p[j]
                for s in range(total):
                    hh = dt if s < substeps else last_dt
                    k1 = _sto_rhs(x, a, gamma, q)
                    k2 = _sto_rhs(x + 0.5 * hh * k1, a, gamma, q)
                    k3 = _sto_rhs(x + 0.5 * hh * k2, a, gamma, q)
                    k4 = _sto_rhs(x + hh * k3, a, gamma, q)
                    x = x + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                    if (x < -1e-9 or x > 1.0 + 1e-9) and bad < 0:
                        bad = t
                if x < 0.0:
                    x = 0.0
                elif x > 1.0:
                    x = 1.0
                p[j] = x
                out[j, t] = x
    return out_arr, bad
