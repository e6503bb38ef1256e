"""Exception hierarchy shared by every qosreg module."""

from __future__ import annotations


class QosRegError(Exception):
    """Base class for all errors raised by qosreg."""


# -- wire formats ---------------------------------------------------------


class MalformedXml(QosRegError, ValueError):
    """Input is not well-formed XML."""


class SchemaViolation(QosRegError, ValueError):
    """Well-formed XML that breaks the canonical grammar.

    ``element`` names the offending element or attribute so callers can
    report it back to a client.
    """

    def __init__(self, message: str, element: str = ""):
        super().__init__(message)
        self.element = element


# -- registry -------------------------------------------------------------


class DuplicateId(QosRegError, ValueError):
    pass


class NotFound(QosRegError, LookupError):
    pass


class UnparseableQoSValue(QosRegError, ValueError):
    pass


# -- data ingestion / learning -------------------------------------------


class BadHeader(QosRegError, ValueError):
    pass


class NonNumericCell(QosRegError, ValueError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {column!r}")
        self.row = row
        self.column = column
        self.value = value


class TooFewRows(QosRegError, ValueError):
    pass


class DegenerateData(QosRegError, ValueError):
    pass


class WidthMismatch(QosRegError, ValueError):
    pass


class LengthMismatch(QosRegError, ValueError):
    pass


class EmptyInput(QosRegError, ValueError):
    pass


class EmptyTestSet(QosRegError, ValueError):
    pass


# -- selection ------------------------------------------------------------


class EmptyConstraints(QosRegError, ValueError):
    pass


class UnknownProperty(QosRegError, ValueError):
    pass


class NoCandidates(QosRegError, LookupError):
    pass


# -- network --------------------------------------------------------------


class InvalidUrl(QosRegError, ValueError):
    pass
