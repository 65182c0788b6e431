"""Numerics for wave propagation past a single Aharonov-Bohm flux tube.

Modules
-------
special_fn  Bessel functions, Hankel symbol coefficients, quadrature oracles.
mode_sum    Windowed partial-wave kernel, free-space references, Abel sums.
domains     Friedrichs boundary functionals, deficiency modes, commutator pairing.
diffraction Closed-form coefficients, l-kernels, Duhamel composition.
probe       Conormal amplitude extraction at the fronts.
acceptance  Runnable acceptance checks.
cli         Command-line interface.
"""

from .errors import (ABDiffractError, AccuracyError, AliasingError, ConfigError, ConfigurationGuardError,
                     CriterionFailure, DomainError, ExcludedDirectionError, FitError, NonFriedrichsError,
                     SingularityError, TailOverflowError)
from .mode_sum import Flux, FrequencyWindow, ModeSpec, PolarPoint, SpacetimeQuery

__version__ = "0.1.0"

__all__ = ["ABDiffractError", "AccuracyError", "AliasingError", "ConfigError", "ConfigurationGuardError",
           "CriterionFailure", "DomainError", "ExcludedDirectionError", "FitError", "NonFriedrichsError",
           "SingularityError", "TailOverflowError", "Flux", "FrequencyWindow", "ModeSpec", "PolarPoint",
           "SpacetimeQuery"]
