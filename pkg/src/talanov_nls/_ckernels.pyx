# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, floor, M_PI

cnp.import_array()

DEF NMAX = 5

cdef int REDUCED = 0
cdef int FULL = 1

cdef double C_A21 = 1.0 / 5
cdef double C_A31 = 3.0 / 40, C_A32 = 9.0 / 40
cdef double C_A41 = 44.0 / 45, C_A42 = -56.0 / 15, C_A43 = 32.0 / 9
cdef double C_A51 = 19372.0 / 6561, C_A52 = -25360.0 / 2187, C_A53 = 64448.0 / 6561
cdef double C_A54 = -212.0 / 729
cdef double C_A61 = 9017.0 / 3168, C_A62 = -355.0 / 33, C_A63 = 46732.0 / 5247
cdef double C_A64 = 49.0 / 176, C_A65 = -5103.0 / 18656
cdef double C_B1 = 35.0 / 384, C_B3 = 500.0 / 1113, C_B4 = 125.0 / 192
cdef double C_B5 = -2187.0 / 6784, C_B6 = 11.0 / 84
cdef double C_E1 = 71.0 / 57600, C_E3 = -71.0 / 16695, C_E4 = 71.0 / 1920
cdef double C_E5 = -17253.0 / 339200, C_E6 = 22.0 / 525, C_E7 = -1.0 / 40

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 5.0
cdef double BETA = 0.04
cdef double EXPO = 0.2 - 0.75 * 0.04
cdef double ULPS = 4 * 2.220446049250313e-16


cdef inline void c_rhs(int system, double* y, double* f) noexcept nogil:
    if system == REDUCED:
        f[0] = -3.0 * y[1] * y[0]
        f[1] = -y[1] * y[1] + 2.0 * y[0]
        f[2] = -y[1] * y[2]
    else:
        f[0] = -3.0 * y[1] * y[0]
        f[1] = -y[1] * y[1] + 2.0 * y[0]
        f[2] = -2.0 * y[1] * y[2] - 2.0 * y[4] * y[0]
        f[3] = -y[1] * y[3] - y[4] * y[2]
        f[4] = -y[1] * y[4] + y[2]


cdef void c_stages(int system, int n, double* y, double* f1, double h,
                   double* ynew, double* f7, double* err) noexcept nogil:
    cdef double f2[NMAX]
    cdef double f3[NMAX]
    cdef double f4[NMAX]
    cdef double f5[NMAX]
    cdef double f6[NMAX]
    cdef double tmp[NMAX]
    cdef int i
    for i in range(n):
        tmp[i] = y[i] + h * C_A21 * f1[i]
    c_rhs(system, tmp, f2)
    for i in range(n):
        tmp[i] = y[i] + h * (C_A31 * f1[i] + C_A32 * f2[i])
    c_rhs(system, tmp, f3)
    for i in range(n):
        tmp[i] = y[i] + h * (C_A41 * f1[i] + C_A42 * f2[i] + C_A43 * f3[i])
    c_rhs(system, tmp, f4)
    for i in range(n):
        tmp[i] = y[i] + h * (C_A51 * f1[i] + C_A52 * f2[i] + C_A53 * f3[i] + C_A54 * f4[i])
    c_rhs(system, tmp, f5)
    for i in range(n):
        tmp[i] = y[i] + h * (C_A61 * f1[i] + C_A62 * f2[i] + C_A63 * f3[i]
                             + C_A64 * f4[i] + C_A65 * f5[i])
    c_rhs(system, tmp, f6)
    for i in range(n):
        ynew[i] = y[i] + h * (C_B1 * f1[i] + C_B3 * f3[i] + C_B4 * f4[i]
                              + C_B5 * f5[i] + C_B6 * f6[i])
    c_rhs(system, ynew, f7)
    for i in range(n):
        err[i] = h * (C_E1 * f1[i] + C_E3 * f3[i] + C_E4 * f4[i] + C_E5 * f5[i]
                      + C_E6 * f6[i] + C_E7 * f7[i])


def rhs(int system, y):
    cdef double yy[NMAX]
    cdef double f[NMAX]
    cdef int n = 3 if system == REDUCED else 5
    cdef int i
    for i in range(n):
        yy[i] = y[i]
    c_rhs(system, yy, f)
    return [f[i] for i in range(n)]


def dopri_step(int system, y, double h):
    cdef int n = 3 if system == REDUCED else 5
    cdef double yy[NMAX]
    cdef double f1[NMAX]
    cdef double ynew[NMAX]
    cdef double f7[NMAX]
    cdef double err[NMAX]
    cdef int i
    for i in range(n):
        yy[i] = y[i]
    c_rhs(system, yy, f1)
    c_stages(system, n, yy, f1, h, ynew, f7, err)
    return (np.array([ynew[i] for i in range(n)]), np.array([err[i] for i in range(n)]))


def dopri_integrate(int system, y0, double t0, double t_end, double rtol, double h0,
                    double gamma0, double sigma_cap, long max_steps):
    cdef int n = 3 if system == REDUCED else 5
    cdef double y[NMAX]
    cdef double f[NMAX]
    cdef double ynew[NMAX]
    cdef double fnew[NMAX]
    cdef double e[NMAX]
    cdef double t = t0, h, err, acc, sc, fac, err_old = 1e-4
    cdef double cap3 = sigma_cap * sigma_cap * sigma_cap
    cdef long n_acc = 0, n_rej = 0, cap = 1024, k = 0
    cdef int i, status = 0
    cdef bint last

    cdef cnp.ndarray[cnp.float64_t, ndim=1] times = np.empty(cap)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] states = np.empty((cap, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] derivs = np.empty((cap, n))

    for i in range(n):
        y[i] = y0[i]
    c_rhs(system, y, f)
    h = h0 if h0 < t_end - t else t_end - t
    times[0] = t
    for i in range(n):
        states[0, i] = y[i]
        derivs[0, i] = f[i]
    k = 1

    while t < t_end:
        if n_acc + n_rej >= max_steps:
            status = 3
            break
        if h < ULPS * (fabs(t) if fabs(t) > 1e-10 else 1e-10):
            status = 2
            break
        last = t + h >= t_end
        if last:
            h = t_end - t
        c_stages(system, n, y, f, h, ynew, fnew, e)
        acc = 0.0
        for i in range(n):
            sc = fabs(y[i])
            if fabs(ynew[i]) > sc:
                sc = fabs(ynew[i])
            if sc < 1.0:
                sc = 1.0
            sc = rtol * sc
            acc += (e[i] / sc) * (e[i] / sc)
        err = sqrt(acc / n)
        if err != err:
            h *= FAC_MIN
            n_rej += 1
            continue
        if err <= 1.0:
            t = t_end if last else t + h
            for i in range(n):
                y[i] = ynew[i]
                f[i] = fnew[i]
            if k >= cap:
                cap *= 2
                times = np.resize(times, cap)
                states = np.resize(states, (cap, n))
                derivs = np.resize(derivs, (cap, n))
            times[k] = t
            for i in range(n):
                states[k, i] = y[i]
                derivs[k, i] = f[i]
            k += 1
            n_acc += 1
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = SAFETY * pow(err, -EXPO) * pow(err_old, BETA)
                if fac > FAC_MAX:
                    fac = FAC_MAX
                if fac < FAC_MIN:
                    fac = FAC_MIN
            err_old = err if err > 1e-4 else 1e-4
            h *= fac
            if y[0] / gamma0 > cap3:
                status = 1
                break
        else:
            fac = SAFETY * pow(err, -0.2)
            h *= fac if fac > FAC_MIN else FAC_MIN
            n_rej += 1

    return (times[:k].copy(), states[:k].copy(), derivs[:k].copy(), n_acc, n_rej, status)


def unwrap_segments(phase, valid):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(phase, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] v = np.ascontiguousarray(valid, dtype=np.uint8)
    cdef Py_ssize_t m = p.shape[0], j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m)
    cdef double d, dd, two_pi = 2.0 * M_PI, nan = float("nan")
    cdef bint prev = False
    for j in range(m):
        if not v[j]:
            out[j] = nan
            prev = False
            continue
        if not prev:
            out[j] = p[j]
        else:
            d = p[j] - p[j - 1]
            # match numpy.unwrap: map into [-pi, pi), keep +pi for positive jumps
            dd = d + M_PI
            dd = dd - two_pi * floor(dd / two_pi)
            dd -= M_PI
            if dd == -M_PI and d > 0:
                dd = M_PI
            if fabs(d) < M_PI:
                dd = d
            out[j] = out[j - 1] + dd
        prev = True
    return out
