"""Exception hierarchy with the exit codes used by the command line."""

from __future__ import annotations


class ABDiffractError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(ABDiffractError, ValueError):
    """Invalid configuration or argument outside a precondition."""

    exit_code = 1


class DomainError(ABDiffractError, ValueError):
    """Mathematically excluded input (pole, singular point, excluded set)."""

    exit_code = 2


class ExcludedDirectionError(DomainError):
    """Configuration on the excluded set |theta1 - theta2| = pi."""


class SingularityError(DomainError):
    """Evaluation exactly on a singular front of an unwindowed kernel."""


class AliasingError(DomainError):
    """Angular grid too coarse for the requested mode projection."""


class NonFriedrichsError(DomainError):
    """Radial data whose scaled boundary values diverge as r -> 0."""


class ConfigurationGuardError(DomainError):
    """Probe geometry violates a front-separation guard."""


class AccuracyError(ABDiffractError, ArithmeticError):
    """A numeric budget could not be met.

    Parameters
    ----------
    message : str
        Human readable description.
    estimate : float or complex, optional
        Best estimate available when the budget was exhausted.
    error_bound : float, optional
        Error bound attached to ``estimate``.
    """

    exit_code = 3

    def __init__(self, message: str, estimate=None, error_bound: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class TailOverflowError(AccuracyError):
    """Mode truncation bound exceeds the requested tail tolerance."""


class FitError(AccuracyError):
    """Ill-conditioned or poorly fitting amplitude extraction."""

    def __init__(self, message: str, estimate=None, error_bound=None, diagnostics=None):
        super().__init__(message, estimate, error_bound)
        self.diagnostics = diagnostics or {}


class CriterionFailure(ABDiffractError):
    """An acceptance criterion did not pass."""

    exit_code = 4
