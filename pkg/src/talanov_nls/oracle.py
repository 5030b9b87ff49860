"""Direct numerical integration of the Talanov coefficient ODEs.

This is the independent check on the closed forms in :mod:`talanov`: no
formula from there is used here.  Two systems are available:

* reduced, ``y = (gamma, alpha, mu)``::

      gamma' = -3 alpha gamma,  alpha' = -alpha**2 + 2 gamma,  mu' = -alpha mu

* full, ``y = (gamma, alpha, omega, zeta, beta)`` for the asymmetric Ansatz
  ``rho = gamma x**2 + omega x + zeta``, ``u = alpha x + beta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .talanov import TalanovParams

__all__ = [
    "GeneralParabolaState",
    "OracleTrajectory",
    "StepUnderflowError",
    "integrate_full",
    "integrate_reduced",
]

DIVERGENCE_SIGMA = 1e8
MAX_STEPS = 2_000_000


class StepUnderflowError(RuntimeError):
    def __init__(self, last_time: float, trajectory: "OracleTrajectory"):
        super().__init__(f"step size underflow at t={last_time!r}")
        self.last_time = last_time
        self.trajectory = trajectory


@dataclass(frozen=True)
class GeneralParabolaState:
    gamma: float
    alpha: float
    omega: float
    zeta: float
    beta: float

    @property
    def mu(self) -> float:
        """Vertex height of the density parabola."""
        return self.zeta - self.omega**2 / (4.0 * self.gamma)

    @property
    def xi(self) -> float:
        """Vertex position of the density parabola."""
        return -self.omega / (2.0 * self.gamma)

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma, self.alpha, self.omega, self.zeta, self.beta])


@dataclass
class OracleTrajectory:
    """Accepted steps of an adaptive integration, with cubic Hermite dense output."""

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    gamma0: float
    system: str
    accepted: int
    rejected: int
    diverged: bool = False
    divergence_time: float | None = None
    names: tuple = field(default=("gamma", "alpha", "mu"))

    def component(self, name: str) -> np.ndarray:
        if name == "mu" and self.system == "full":
            g, w, z = self.states[:, 0], self.states[:, 2], self.states[:, 3]
            return z - w * w / (4.0 * g)
        if name == "xi" and self.system == "full":
            return -self.states[:, 2] / (2.0 * self.states[:, 0])
        return self.states[:, self.names.index(name)]

    @property
    def sigma(self) -> np.ndarray:
        return np.cbrt(self.states[:, 0] / self.gamma0)

    def state_at(self, t) -> np.ndarray:
        """Interpolated state(s) at time(s) ``t`` inside the integrated span."""
        t = np.asarray(t, dtype=float)
        ts = self.times
        if np.any(t < ts[0]) or np.any(t > ts[-1]):
            raise ValueError("requested time outside the integrated interval")
        i = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2)
        h = ts[i + 1] - ts[i]
        s = ((t - ts[i]) / h)[..., None]
        y0, y1 = self.states[i], self.states[i + 1]
        f0, f1 = self.derivs[i] * h[..., None], self.derivs[i + 1] * h[..., None]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * f0 + h01 * y1 + h11 * f1

    def sigma_at(self, t) -> np.ndarray:
        return np.cbrt(self.state_at(t)[..., 0] / self.gamma0)


def _check_tol(rel_tol: float):
    if not 1e-13 <= rel_tol <= 1e-3:
        raise ValueError(f"rel_tol must lie in [1e-13, 1e-3], got {rel_tol!r}")


def _divergence_time(system: int, t0: float, y0: np.ndarray, gamma0: float,
                     sigma_cap: float, h: float) -> float:
    # bisect a single fresh step from the last state below the cap
    lo, hi = 0.0, h
    cap3 = sigma_cap**3
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        y, _ = kernels.dopri_step(system, y0, mid)
        if y[0] / gamma0 > cap3 or not np.isfinite(y[0]):
            hi = mid
        else:
            lo = mid
    return t0 + 0.5 * (lo + hi)


def _run(system: int, y0, gamma0: float, t_end: float, rel_tol: float,
         sigma_cap: float, names: tuple, label: str) -> OracleTrajectory:
    _check_tol(rel_tol)
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    h0 = min(1e-3, 0.1 * t_end)
    times, states, derivs, n_acc, n_rej, status = kernels.dopri_integrate(
        system, np.asarray(y0, dtype=float), 0.0, float(t_end), float(rel_tol), h0,
        float(gamma0), float(sigma_cap), MAX_STEPS,
    )
    traj = OracleTrajectory(times, states, derivs, gamma0, label, n_acc, n_rej, names=names)
    if status == kernels.DIVERGED:
        traj.diverged = True
        traj.divergence_time = _divergence_time(
            system, times[-2], states[-2], gamma0, sigma_cap, times[-1] - times[-2]
        )
    elif status == kernels.UNDERFLOW:
        raise StepUnderflowError(float(times[-1]), traj)
    elif status == kernels.MAX_STEPS:
        raise RuntimeError(f"step budget exhausted at t={times[-1]!r}")
    return traj


def integrate_reduced(p: TalanovParams, t_end: float, rel_tol: float = 1e-9,
                      sigma_cap: float = DIVERGENCE_SIGMA) -> OracleTrajectory:
    """Integrate ``(gamma, alpha, mu)`` from the initial datum ``p``.

    Stops early, with ``diverged`` set, once sigma exceeds ``sigma_cap``;
    ``divergence_time`` then estimates where sigma crosses the cap.
    """
    return _run(kernels.REDUCED, (p.gamma0, p.alpha0, p.mu0), p.gamma0, t_end, rel_tol,
                sigma_cap, ("gamma", "alpha", "mu"), "reduced")


def integrate_full(initial: GeneralParabolaState, t_end: float, rel_tol: float = 1e-9,
                   sigma_cap: float = DIVERGENCE_SIGMA) -> OracleTrajectory:
    """Integrate all five coefficients of the asymmetric parabola Ansatz."""
    if not initial.gamma < 0:
        raise ValueError("gamma(0) must be negative")
    return _run(kernels.FULL, initial.as_array(), initial.gamma, t_end, rel_tol, sigma_cap,
                ("gamma", "alpha", "omega", "zeta", "beta"), "full")
