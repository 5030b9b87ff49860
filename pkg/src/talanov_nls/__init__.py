"""Talanov self-similar solutions of the dispersionless focusing NLS system
and pseudo-spectral integration of the dispersive equation from parabolic
initial data."""

from .kernels import BACKEND
from .talanov import (
    Branch,
    BlowUpExceededError,
    InvalidParameterError,
    Regime,
    RegimeOutcome,
    SigmaState,
    TalanovParams,
    catastrophe_time_special,
    center_amplitude,
    classify,
    hydro_profile,
    sigma_of_time,
    time_of_sigma,
)

__version__ = "0.1.0"
