"""
Exception hierarchy for the Path Competition Simulator.

The CLI maps ``SolverFailure`` and ``DegenerateCostError`` to exit code 2 and
every other ``SimulationError`` to exit code 1.
"""

from typing import Any, Dict, List, Optional, Sequence


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(SimulationError):
    """Invalid environment or document configuration."""


class ModelValidationError(SimulationError, ValueError):
    """A model, matrix or identifier violates an invariant."""


class DomainError(ModelValidationError):
    """An argument lies outside the domain of an operation."""


class GraphParseError(ModelValidationError):
    """Malformed AS graph input."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class UnsupportedScopeError(SimulationError):
    """A closed form was requested outside the setting it is valid for."""


class DegenerateCostError(SimulationError):
    """Cost coefficients make a closed form diverge or vanish."""


class SolverFailure(SimulationError):
    """A numeric procedure failed to produce a valid answer."""

    def __init__(self, message: str, roots: Optional[Sequence[complex]] = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.roots: List[complex] = list(roots) if roots is not None else []
        self.details: Dict[str, Any] = dict(details or {})


class DivergenceError(SolverFailure):
    """Dynamics produced a non-finite state."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


# Failures of the numerics rather than of the input: exit code 2, HTTP 422.
NUMERIC_ERRORS = (SolverFailure, DegenerateCostError)
