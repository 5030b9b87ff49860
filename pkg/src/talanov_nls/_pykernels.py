"""Pure-Python implementations of the hot kernels.

Must stay behaviourally identical to ``_ckernels.pyx``; the test suite runs
both against each other.
"""

import math

import numpy as np

REDUCED = 0
FULL = 1

DONE = 0
DIVERGED = 1
UNDERFLOW = 2
MAX_STEPS = 3

# Dormand-Prince 5(4)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
# step-size underflow floor, in units of the spacing of doubles around t
_ULPS = 4 * 2.220446049250313e-16


def rhs(system, y):
    if system == REDUCED:
        g, a, m = y
        return [-3.0 * a * g, -a * a + 2.0 * g, -a * m]
    g, a, w, z, b = y
    return [
        -3.0 * a * g,
        -a * a + 2.0 * g,
        -2.0 * a * w - 2.0 * b * g,
        -a * z - b * w,
        -a * b + w,
    ]


def _stages(system, y, f1, h):
    n = len(y)
    y2 = [y[i] + h * _A21 * f1[i] for i in range(n)]
    f2 = rhs(system, y2)
    y3 = [y[i] + h * (_A31 * f1[i] + _A32 * f2[i]) for i in range(n)]
    f3 = rhs(system, y3)
    y4 = [y[i] + h * (_A41 * f1[i] + _A42 * f2[i] + _A43 * f3[i]) for i in range(n)]
    f4 = rhs(system, y4)
    y5 = [y[i] + h * (_A51 * f1[i] + _A52 * f2[i] + _A53 * f3[i] + _A54 * f4[i])
          for i in range(n)]
    f5 = rhs(system, y5)
    y6 = [y[i] + h * (_A61 * f1[i] + _A62 * f2[i] + _A63 * f3[i] + _A64 * f4[i]
                      + _A65 * f5[i]) for i in range(n)]
    f6 = rhs(system, y6)
    ynew = [y[i] + h * (_B1 * f1[i] + _B3 * f3[i] + _B4 * f4[i] + _B5 * f5[i]
                        + _B6 * f6[i]) for i in range(n)]
    f7 = rhs(system, ynew)
    err = [h * (_E1 * f1[i] + _E3 * f3[i] + _E4 * f4[i] + _E5 * f5[i] + _E6 * f6[i]
                + _E7 * f7[i]) for i in range(n)]
    return ynew, f7, err


def dopri_step(system, y, h):
    """One Dormand-Prince step of length ``h``; returns ``(y_new, err)``."""
    y = [float(v) for v in y]
    ynew, _, err = _stages(system, y, rhs(system, y), h)
    return np.array(ynew), np.array(err)


def dopri_integrate(system, y0, t0, t_end, rtol, h0, gamma0, sigma_cap, max_steps):
    """Adaptive Dormand-Prince integration of a Talanov coefficient system.

    Returns ``(times, states, derivs, n_accepted, n_rejected, status)``.
    Stops early when ``(gamma / gamma0)**(1/3)`` exceeds ``sigma_cap``.
    """
    y = [float(v) for v in y0]
    n = len(y)
    f = rhs(system, y)
    t = float(t0)
    h = min(float(h0), t_end - t)
    times = [t]
    states = [list(y)]
    derivs = [list(f)]
    n_acc = n_rej = 0
    err_old = 1e-4
    cap3 = sigma_cap ** 3
    status = DONE

    while t < t_end:
        if n_acc + n_rej >= max_steps:
            status = MAX_STEPS
            break
        if h < _ULPS * max(abs(t), 1e-10):
            status = UNDERFLOW
            break
        last = t + h >= t_end
        if last:
            h = t_end - t
        ynew, fnew, e = _stages(system, y, f, h)
        acc = 0.0
        for i in range(n):
            sc = rtol * max(1.0, abs(y[i]), abs(ynew[i]))
            acc += (e[i] / sc) ** 2
        err = math.sqrt(acc / n)
        if err != err:  # NaN: treat as a hard rejection
            h *= _FAC_MIN
            n_rej += 1
            continue
        if err <= 1.0:
            t = t_end if last else t + h
            y, f = ynew, fnew
            times.append(t)
            states.append(list(y))
            derivs.append(list(f))
            n_acc += 1
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * err ** (-_EXPO) * err_old ** _BETA
                fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            err_old = max(err, 1e-4)
            h *= fac
            if y[0] / gamma0 > cap3:
                status = DIVERGED
                break
        else:
            h *= max(_FAC_MIN, _SAFETY * err ** (-0.2))
            n_rej += 1

    return (np.array(times), np.array(states, dtype=float).reshape(-1, n),
            np.array(derivs, dtype=float).reshape(-1, n), n_acc, n_rej, status)


def unwrap_segments(phase, valid):
    """Unwrap ``phase`` independently on every contiguous run of ``valid``.

    Invalid points come back as NaN.
    """
    phase = np.asarray(phase, dtype=float)
    valid = np.asarray(valid, dtype=bool)
    out = np.full(phase.shape, np.nan)
    if not valid.any():
        return out
    edges = np.flatnonzero(np.diff(np.concatenate(([0], valid.view(np.int8), [0]))))
    for start, stop in zip(edges[::2], edges[1::2]):
        out[start:stop] = np.unwrap(phase[start:stop])
    return out
