"""
Exception hierarchy for charstrat.

Everything the library raises on purpose derives from ``CharstratError``
(itself a ``ValueError``) so the CLI can map failures to exit codes with a
single ``except``.  ``UsageError`` marks malformed user input (exit 2);
every other subclass is a computational failure (exit 1).
"""
from __future__ import annotations


class CharstratError(ValueError):
    """Root of all deliberate charstrat failures."""


class UsageError(CharstratError):
    """Malformed user input: field strings, polynomial text, flag values."""


# ---------------------------------------------------------------------------
# Fields and linear algebra
# ---------------------------------------------------------------------------

class NonPrimeModulus(CharstratError):
    pass


class ReducibleModulus(CharstratError):
    pass


class InfiniteField(CharstratError):
    pass


class FieldMismatch(CharstratError):
    pass


class DimensionMismatch(CharstratError):
    pass


class NotInvertible(CharstratError):
    pass


class PreconditionViolated(CharstratError):
    pass


# ---------------------------------------------------------------------------
# Series, jets, strata
# ---------------------------------------------------------------------------

class NonzeroConstantTerm(CharstratError):
    pass


class EmptySample(CharstratError):
    pass


class EmptyRegion(CharstratError):
    pass


# ---------------------------------------------------------------------------
# Census / Monte-Carlo
# ---------------------------------------------------------------------------

class BudgetExceeded(CharstratError):
    pass


class EmptyStratum(CharstratError):
    pass


class DegenerateTower(CharstratError):
    pass


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------

class NonzeroConstant(CharstratError):
    pass


class NotCertifiedFinite(CharstratError):
    pass


class OrderTooLow(CharstratError):
    pass


class NotTruncatable(CharstratError):
    pass


class WrongCorank(CharstratError):
    pass


class TargetTooBig(CharstratError):
    pass
