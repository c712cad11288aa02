"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DoxstitError(Exception):
    """Base class for all errors raised by this package."""


class ModelFormatError(DoxstitError):
    """A model document is structurally malformed (bad reference, bad
    section, non-tree moment order, value that is not a rational, ...).

    Messages always name the offending section and entry.
    """


class FrameConstraintError(DoxstitError):
    """A structurally sound frame violates a frame constraint.

    Carries the full validation report so callers can show every
    violation, not just the first.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class ProbabilityError(DoxstitError):
    """A probability layer or measure is ill-formed (mass not summing
    to one, negative mass, unknown index)."""


class EvalError(DoxstitError):
    """A formula cannot be evaluated on a model (unknown agent, invalid
    index, uninstantiated metavariable)."""


class SubstitutionError(DoxstitError):
    """A schema instantiation is missing an assignment for a
    metavariable."""
