"""Closed-form self-similar solutions of the dispersionless focusing NLS system.

The density is a concave parabola and the velocity is linear in ``x``::

    rho(x, t) = gamma(t) x**2 + mu(t),    u(x, t) = alpha(t) x

Everything is parameterised by ``sigma = (gamma / gamma0)**(1/3)``, with
``gamma = gamma0 sigma**3``, ``mu = mu0 sigma`` and
``alpha**2 = A sigma**2 + B sigma**3`` where ``A = alpha0**2 + 4 gamma0`` and
``B = -4 gamma0``.  The implicit solutions ``t = t(sigma)`` are inverted by
bracketed root finding on the monotone branch that contains ``t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "Branch",
    "BlowUpExceededError",
    "ConvergenceError",
    "HydroProfile",
    "InvalidParameterError",
    "Regime",
    "RegimeOutcome",
    "SigmaRangeError",
    "SigmaState",
    "TalanovParams",
    "catastrophe_time_special",
    "center_amplitude",
    "classify",
    "hydro_profile",
    "sigma_of_time",
    "support_halfwidth",
    "time_of_sigma",
]

#: relative size of A below which the A = 0 closed forms are used
DEGENERATE_A = 1e-8
#: sigma_of_time refuses times closer than this to the catastrophe
BLOWUP_GUARD = 1e-12
SIGMA_FLOOR = 1e-12
SIGMA_CEIL = 1e300


class InvalidParameterError(ValueError):
    """Initial datum outside the compactly supported class."""


class SigmaRangeError(ValueError):
    """sigma outside the range covered by the requested branch."""


class BlowUpExceededError(ValueError):
    """Requested time is at or beyond the catastrophe time."""

    def __init__(self, t: float, t_c: float):
        super().__init__(f"t={t!r} is not below the catastrophe time t_c={t_c!r}")
        self.t = t
        self.t_c = t_c


class ConvergenceError(RuntimeError):
    pass


class Regime(str, enum.Enum):
    RELAXATION = "Relaxation"
    BLOWUP = "BlowUp"


class Branch(str, enum.Enum):
    """The seven rows of the classification table, keyed by the chirp."""

    RELAX_A_POS = "relax_A_pos"  # alpha0 > 2 sqrt(-gamma0)
    RELAX_A_ZERO = "relax_A_zero"  # alpha0 = 2 sqrt(-gamma0)
    NONMONOTONIC = "nonmonotonic"  # 0 < alpha0 < 2 sqrt(-gamma0)
    ZERO_CHIRP = "zero_chirp"  # alpha0 = 0
    NEG_A_NEG = "neg_A_neg"  # -2 sqrt(-gamma0) < alpha0 < 0
    NEG_A_ZERO = "neg_A_zero"  # alpha0 = -2 sqrt(-gamma0)
    NEG_A_POS = "neg_A_pos"  # alpha0 < -2 sqrt(-gamma0)

    @property
    def blows_up(self) -> bool:
        return self not in (Branch.RELAX_A_POS, Branch.RELAX_A_ZERO)


@dataclass(frozen=True)
class TalanovParams:
    """Initial datum ``rho = mu0 + gamma0 x**2``, ``u = alpha0 x``."""

    mu0: float
    gamma0: float
    alpha0: float

    def __post_init__(self):
        for name in ("mu0", "gamma0", "alpha0"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        if not self.mu0 > 0:
            raise InvalidParameterError(f"mu0 must be > 0, got {self.mu0!r}")
        if not self.gamma0 < 0:
            raise InvalidParameterError(
                f"gamma0 must be < 0 for a compact support, got {self.gamma0!r}"
            )

    @property
    def A(self) -> float:
        return self.alpha0 * self.alpha0 + 4.0 * self.gamma0

    @property
    def B(self) -> float:
        return -4.0 * self.gamma0

    @property
    def root_neg_gamma0(self) -> float:
        return math.sqrt(-self.gamma0)

    @property
    def branch(self) -> Branch:
        thr = 2.0 * self.root_neg_gamma0
        a0 = self.alpha0
        if a0 > thr:
            return Branch.RELAX_A_POS
        if a0 == thr:
            return Branch.RELAX_A_ZERO
        if a0 > 0:
            return Branch.NONMONOTONIC
        if a0 == 0:
            return Branch.ZERO_CHIRP
        if a0 > -thr:
            return Branch.NEG_A_NEG
        if a0 == -thr:
            return Branch.NEG_A_ZERO
        return Branch.NEG_A_POS


@dataclass(frozen=True)
class RegimeOutcome:
    kind: Regime
    branch: Branch
    t_c: Optional[float] = None
    t_min: Optional[float] = None
    sigma_min: Optional[float] = None


@dataclass(frozen=True)
class SigmaState:
    """Point on a Talanov trajectory.

    ``sign`` is the sign of alpha on the current branch: +1 while sigma
    decreases, -1 while it increases, 0 exactly at a turning point.
    """

    t: float
    sigma: float
    alpha: float
    gamma: float
    mu: float
    sign: int


@dataclass(frozen=True)
class HydroProfile:
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    support_halfwidth: float
    state: SigmaState


# -- implicit solutions ------------------------------------------------------


def _near_degenerate(p: TalanovParams) -> bool:
    return abs(p.A) < DEGENERATE_A * p.B


def _log_form(p: TalanovParams, sigma: float) -> float:
    # relaxation-side solution for A > 0; the negative-chirp row is its negative
    A, B = p.A, p.B
    rA = math.sqrt(A)
    s = math.sqrt(A + B * sigma)
    a0 = abs(p.alpha0)
    # log of the ratio in closed form, rewritten to avoid cancellation as sigma -> 0
    log_ratio = math.log(sigma) + 2.0 * math.log((a0 + rA) / (s + rA))
    return s / (A * sigma) - a0 / A + B / (2.0 * A * rA) * log_ratio


def _log_form_limit(p: TalanovParams) -> float:
    A, B = p.A, p.B
    rA = math.sqrt(A)
    a0 = abs(p.alpha0)
    # log((a0 + rA) / (a0 - rA)) = 2 atanh(rA / a0)
    return -a0 / A + B / (A * rA) * math.atanh(rA / a0)


def _arctan_g(p: TalanovParams, sigma: float) -> float:
    A, B = p.A, p.B
    a = math.sqrt(-A)
    s = math.sqrt(max(A + B * sigma, 0.0))
    return s / (A * sigma) - B / (a * a * a) * math.atan(s / a)


def _arctan_g_inf(p: TalanovParams) -> float:
    a = math.sqrt(-p.A)
    return -p.B / (a * a * a) * (0.5 * math.pi)


def _degenerate_relax(p: TalanovParams, sigma: float) -> float:
    return (sigma**-1.5 - 1.0) / (3.0 * p.root_neg_gamma0)


def _degenerate_blowup(p: TalanovParams, sigma: float) -> float:
    return (1.0 - sigma**-1.5) / (3.0 * p.root_neg_gamma0)


def _catastrophe_time(p: TalanovParams, branch: Branch) -> Optional[float]:
    g = p.root_neg_gamma0
    if branch is Branch.NONMONOTONIC:
        return -_arctan_g_inf(p) - _arctan_g(p, 1.0)
    if branch is Branch.ZERO_CHIRP:
        return math.pi / (4.0 * g)
    if branch is Branch.NEG_A_ZERO or (
        branch in (Branch.NEG_A_NEG, Branch.NEG_A_POS) and _near_degenerate(p)
    ):
        return 1.0 / (3.0 * g)
    if branch is Branch.NEG_A_NEG:
        return -_arctan_g_inf(p) + _arctan_g(p, 1.0)
    if branch is Branch.NEG_A_POS:
        return -_log_form_limit(p)
    return None


def classify(p: TalanovParams) -> RegimeOutcome:
    """Relaxation or blow-up, with the catastrophe time when it exists."""
    branch = p.branch
    if not branch.blows_up:
        return RegimeOutcome(Regime.RELAXATION, branch)
    t_c = _catastrophe_time(p, branch)
    if branch is Branch.NONMONOTONIC:
        return RegimeOutcome(
            Regime.BLOWUP,
            branch,
            t_c=t_c,
            t_min=-_arctan_g(p, 1.0),
            sigma_min=-p.A / p.B,
        )
    return RegimeOutcome(Regime.BLOWUP, branch, t_c=t_c)


def catastrophe_time_special(alpha0: float) -> float:
    """Catastrophe time for ``mu0 = 1``, ``gamma0 = -1`` as a function of the chirp."""
    if not alpha0 < 2.0:
        raise ValueError(f"no blow-up for alpha0 >= 2 (got {alpha0!r})")
    if alpha0 == -2.0:
        return 1.0 / 3.0
    d = 4.0 - alpha0 * alpha0
    if alpha0 > -2.0:
        return alpha0 / d + 4.0 / d**1.5 * (0.5 * math.pi + math.atan(alpha0 / math.sqrt(d)))
    e = -d
    return -alpha0 / e + 4.0 / e**1.5 * math.atanh(math.sqrt(e) / alpha0)


def time_of_sigma(p: TalanovParams, sigma: float, post_turning: bool = False) -> float:
    """Time at which the trajectory reaches ``sigma``.

    ``post_turning`` selects the increasing segment of the nonmonotonic
    branch; it is ignored elsewhere.
    """
    branch = p.branch
    if not (sigma > 0 and math.isfinite(sigma)):
        raise SigmaRangeError(f"sigma must be positive and finite, got {sigma!r}")

    if not branch.blows_up:
        if sigma > 1.0:
            raise SigmaRangeError(f"relaxation branch needs 0 < sigma <= 1, got {sigma!r}")
        if branch is Branch.RELAX_A_ZERO or _near_degenerate(p):
            return _degenerate_relax(p, sigma)
        return _log_form(p, sigma)

    if branch is Branch.NONMONOTONIC:
        sigma_min = -p.A / p.B
        if sigma < sigma_min:
            raise SigmaRangeError(f"sigma={sigma!r} below the turning value {sigma_min!r}")
        if post_turning:
            return -_arctan_g(p, sigma) - _arctan_g(p, 1.0)
        if sigma > 1.0:
            raise SigmaRangeError(f"pre-turning segment needs sigma <= 1, got {sigma!r}")
        return _arctan_g(p, sigma) - _arctan_g(p, 1.0)

    if sigma < 1.0:
        raise SigmaRangeError(f"blow-up branch {branch.value} needs sigma >= 1, got {sigma!r}")
    if branch is Branch.ZERO_CHIRP:
        r = math.sqrt(sigma - 1.0)
        return (r / sigma + math.atan(r)) / (2.0 * p.root_neg_gamma0)
    if branch is Branch.NEG_A_ZERO or _near_degenerate(p):
        return _degenerate_blowup(p, sigma)
    if branch is Branch.NEG_A_NEG:
        return -_arctan_g(p, sigma) + _arctan_g(p, 1.0)
    return -_log_form(p, sigma)


def _make_state(p: TalanovParams, t: float, sigma: float, sign: int) -> SigmaState:
    alpha = sign * sigma * math.sqrt(max(p.A + p.B * sigma, 0.0))
    return SigmaState(
        t=t,
        sigma=sigma,
        alpha=alpha,
        gamma=p.gamma0 * sigma**3,
        mu=p.mu0 * sigma,
        sign=sign,
    )


def _invert(f, lo: float, hi: float) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ConvergenceError(f"root not bracketed in [{lo!r}, {hi!r}]")
    root, info = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                        maxiter=500, full_output=True)
    if not info.converged:
        raise ConvergenceError(info.flag)
    return root


def _grow_bracket(f, lo: float) -> float:
    hi = max(2.0 * lo, 2.0)
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > SIGMA_CEIL:
            raise ConvergenceError("could not bracket sigma; t too close to t_c")
    return hi


def sigma_of_time(p: TalanovParams, t: float) -> SigmaState:
    """Invert the implicit solution at time ``t``."""
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    out = classify(p)
    branch = out.branch
    if out.t_c is not None and t >= out.t_c - BLOWUP_GUARD:
        raise BlowUpExceededError(t, out.t_c)
    if t == 0.0:
        return SigmaState(0.0, 1.0, p.alpha0, p.gamma0, p.mu0, int(np.sign(p.alpha0)) or -1)

    g = p.root_neg_gamma0
    if branch is Branch.RELAX_A_ZERO:
        return _make_state(p, t, (1.0 + 3.0 * g * t) ** (-2.0 / 3.0), +1)
    if branch is Branch.NEG_A_ZERO:
        return _make_state(p, t, (1.0 - 3.0 * g * t) ** (-2.0 / 3.0), -1)

    if branch is Branch.RELAX_A_POS:
        # t(sigma) decreases from 0 at sigma = 1
        f = lambda s: t - time_of_sigma(p, s)  # noqa: E731
        if f(SIGMA_FLOOR) > 0:
            raise ConvergenceError(f"sigma(t={t!r}) is below the floor {SIGMA_FLOOR}")
        return _make_state(p, t, _invert(f, SIGMA_FLOOR, 1.0), +1)

    if branch is Branch.NONMONOTONIC:
        if t == out.t_min:
            return _make_state(p, t, out.sigma_min, 0)
        if t < out.t_min:
            f = lambda s: t - time_of_sigma(p, s)  # noqa: E731
            return _make_state(p, t, _invert(f, out.sigma_min, 1.0), +1)
        f = lambda s: time_of_sigma(p, s, post_turning=True) - t  # noqa: E731
        hi = _grow_bracket(f, 1.0)
        return _make_state(p, t, _invert(f, out.sigma_min, hi), -1)

    # zero and negative chirp: sigma increases from 1
    f = lambda s: time_of_sigma(p, s) - t  # noqa: E731
    hi = _grow_bracket(f, 1.0)
    return _make_state(p, t, _invert(f, 1.0, hi), -1)


def support_halfwidth(p: TalanovParams, sigma: float) -> float:
    return math.sqrt(-p.mu0 / p.gamma0) / sigma


def hydro_profile(p: TalanovParams, t: float, x_grid) -> HydroProfile:
    """Density and velocity of the exact solution sampled on ``x_grid``.

    ``rho`` is exactly zero outside the open support; ``u`` is NaN there.
    """
    st = sigma_of_time(p, t)
    x = np.asarray(x_grid, dtype=float)
    half = support_halfwidth(p, st.sigma)
    inside = np.abs(x) < half
    rho = np.where(inside, st.gamma * x * x + st.mu, 0.0)
    np.maximum(rho, 0.0, out=rho)
    u = np.where(np.abs(x) <= half, st.alpha * x, np.nan)
    return HydroProfile(x=x, rho=rho, u=u, support_halfwidth=half, state=st)


def center_amplitude(p: TalanovParams, t: float) -> float:
    """``|psi(0, t)| = sqrt(mu0 sigma(t))`` of the dispersionless solution."""
    return math.sqrt(sigma_of_time(p, t).mu)
