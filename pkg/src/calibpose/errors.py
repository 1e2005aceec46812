"""Exception hierarchy shared by the whole package."""

from __future__ import annotations


class CalibposeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CalibposeError, ValueError):
    """Dimension mismatch, bad argument value, or violated precondition."""


class UnidentifiablePlanError(CalibposeError):
    """The information matrix of a plan is singular (or numerically so)
    for the chosen parameter mask; the accuracy measure is undefined.

    `null_directions` names the parameters that dominate the near-null
    space, so the caller can see *why* the plan fails.
    """

    def __init__(self, message: str, null_directions: list[str] | None = None):
        super().__init__(message)
        self.null_directions = list(null_directions or [])


class InfeasibleProblemError(CalibposeError):
    """The feasible region appears to be empty (sampler rejection cap hit)."""


class ConfigError(CalibposeError, ValueError):
    """A configuration document failed validation. `location` is the
    JSON path of the offending field."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
