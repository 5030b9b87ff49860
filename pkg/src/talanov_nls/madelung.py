"""Hydrodynamic (density, velocity) view of a wave field and the comparison
of dispersive runs against the self-similar dispersionless solution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.integrate import cumulative_simpson

from . import kernels
from .spectral import Grid, RunRecord, WaveField
from .talanov import Regime, TalanovParams, classify, sigma_of_time, support_halfwidth

__all__ = [
    "AGREEMENT_WINDOW",
    "PEAK_SIGNIFICANCE",
    "ComparisonReport",
    "HydroField",
    "NoPeakError",
    "compare",
    "detect_peak",
    "from_hydro",
    "support_track",
    "to_hydro",
]

VACUUM_FRACTION = 1e-6
AGREEMENT_WINDOW = 0.8
PEAK_SIGNIFICANCE = 1.5


class NoPeakError(ValueError):
    """The amplitude record has no interior maximum."""


@dataclass
class HydroField:
    grid: Grid
    epsilon: float
    rho: np.ndarray
    u: np.ndarray
    valid_mask: np.ndarray
    phase: np.ndarray

    def segments(self) -> list[slice]:
        """Contiguous runs of valid points."""
        v = self.valid_mask.view(np.int8)
        edges = np.flatnonzero(np.diff(np.concatenate(([0], v, [0]))))
        return [slice(a, b) for a, b in zip(edges[::2], edges[1::2])]


def to_hydro(field: WaveField, vacuum_threshold: Optional[float] = None) -> HydroField:
    """Density ``|psi|**2`` and velocity ``eps * d(arg psi)/dx``.

    The phase gradient is ``Im(conj(psi) psi_x) / rho`` with ``psi_x`` taken
    spectrally, which needs no unwrapping; the unwrapped phase itself is kept
    for reconstruction.  Points with ``rho < vacuum_threshold`` (default
    ``1e-6 * max(rho)``) are masked and carry NaN in ``u`` and ``phase``.
    """
    psi = field.psi
    grid = field.grid
    rho = psi.real**2 + psi.imag**2
    if vacuum_threshold is None:
        vacuum_threshold = VACUUM_FRACTION * float(rho.max())
    valid = rho >= vacuum_threshold
    if vacuum_threshold == 0.0:
        valid &= rho > 0.0
    u = np.full(grid.points, np.nan)
    if valid.any():
        dpsi = sfft.ifft(1j * grid.k * sfft.fft(psi))
        flux = (psi.conj() * dpsi).imag
        u[valid] = field.epsilon * flux[valid] / rho[valid]
    phase = kernels.unwrap_segments(np.angle(psi), valid)
    return HydroField(grid, field.epsilon, rho, u, valid, phase)


def from_hydro(hydro: HydroField, t: float = 0.0) -> WaveField:
    """Rebuild ``sqrt(rho) exp(i/eps * int u dx)``.

    The integral restarts at the left end of every valid segment, so the
    result matches the original field up to one constant phase per segment.
    Masked points are set to zero.
    """
    psi = np.zeros(hydro.grid.points, dtype=complex)
    dx = hydro.grid.dx
    for seg in hydro.segments():
        u = hydro.u[seg]
        if u.size == 1:
            theta = np.zeros(1)
        elif u.size == 2:
            theta = np.array([0.0, 0.5 * dx * (u[0] + u[1])])
        else:
            theta = cumulative_simpson(u, dx=dx, initial=0.0)
        psi[seg] = np.sqrt(hydro.rho[seg]) * np.exp(1j * theta / hydro.epsilon)
    return WaveField(hydro.grid, hydro.epsilon, psi, t)


def detect_peak(record: RunRecord) -> tuple[float, float, float]:
    """Time, amplitude and position of the spacetime maximum of ``|psi|``.

    The discrete maximum of ``max_amp`` is refined by the vertex of the
    parabola through it and its two neighbours.  A maximum at either end of
    the record is not a peak.
    """
    t = np.asarray(record.sample_times, dtype=float)
    amp = np.asarray(record.max_amp, dtype=float)
    if t.size == 0:
        raise ValueError("empty record")
    i = int(np.argmax(amp))
    if i == 0 or i == t.size - 1:
        raise NoPeakError("max_amp attains its maximum at the edge of the record")
    tau = t[i - 1:i + 2] - t[i]
    a, b, c = np.polyfit(tau, amp[i - 1:i + 2], 2)
    if a < 0:
        shift = -b / (2.0 * a)
        # the vertex must stay between the neighbours used for the fit
        if tau[0] <= shift <= tau[2]:
            return float(t[i] + shift), float(c - b * b / (4.0 * a)), float(record.argmax_x[i])
    return float(t[i]), float(amp[i]), float(record.argmax_x[i])


@dataclass(frozen=True)
class ComparisonReport:
    t_c: Optional[float]
    t_max: Optional[float]
    peak_amp: float
    peak_x: float
    center_series_error: float
    regime_agreement: bool

    @property
    def rel_err(self) -> Optional[float]:
        if self.t_c is None or self.t_max is None:
            return None
        return abs(self.t_max - self.t_c) / self.t_c


def compare(p: TalanovParams, record: RunRecord) -> ComparisonReport:
    """Set a dispersive run beside the dispersionless solution with the same data."""
    outcome = classify(p)
    t_c = outcome.t_c if outcome.kind is Regime.BLOWUP else None
    try:
        t_max, peak_amp, peak_x = detect_peak(record)
    except NoPeakError:
        t_max = None
        i = int(np.argmax(record.max_amp))
        peak_amp, peak_x = float(record.max_amp[i]), float(record.argmax_x[i])

    times = np.asarray(record.sample_times, dtype=float)
    window = times < AGREEMENT_WINDOW * t_c if t_c is not None else np.ones(times.size, bool)
    if window.any():
        ref = np.array([math.sqrt(sigma_of_time(p, s).mu) for s in times[window]])
        err = float(np.max(np.abs(np.asarray(record.center_amp)[window] - ref)))
    else:
        err = float("nan")

    significant = t_max is not None and peak_amp >= PEAK_SIGNIFICANCE * math.sqrt(p.mu0)
    return ComparisonReport(t_c, t_max, peak_amp, peak_x, err, significant == (t_c is not None))


def support_track(p: TalanovParams, times: Sequence[float]) -> np.ndarray:
    """Half-width of the density support at each time."""
    return np.array([support_halfwidth(p, sigma_of_time(p, float(t)).sigma) for t in times])
