"""Exception hierarchy shared by all msync modules.

Every domain failure derives from :class:`MsyncError` so callers (CLI,
service) can map whole families of errors to exit codes / HTTP statuses
without enumerating leaf classes.
"""

from __future__ import annotations


class MsyncError(Exception):
    """Base class for all domain errors raised by this package."""


# ---------------------------------------------------------------------------
# core model
# ---------------------------------------------------------------------------

class ModelError(MsyncError):
    """Violation of the typed-graph rules of a model."""


class KindMismatch(ModelError):
    """Entity kind is not part of the model's metamodel."""


class SignatureViolation(ModelError):
    """Relation endpoints do not match the relation kind's signature."""


class DuplicateRelation(ModelError):
    """A second relation between the same ordered entity pair."""


class DanglingEndpoint(ModelError):
    """Relation references an entity that is not in the model."""


class UnknownEntity(ModelError):
    """Operation addressed an entity id that does not exist."""


class EmptyLabel(ModelError):
    """A rename to the empty string."""


class NonConformantSource(ModelError):
    """Transformation input failed conformance checking."""

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(v.message for v in self.violations)
        super().__init__(f"source model is not conformant: {summary}")


class OrphanUseCase(ModelError):
    """A use case without any association cannot be transformed."""


# ---------------------------------------------------------------------------
# requirements parsing
# ---------------------------------------------------------------------------

class ParseError(MsyncError):
    """Structured-sentence parse failure, with position information."""

    def __init__(self, message: str, column: int = 0, expected: str = ""):
        self.column = column
        self.expected = expected
        detail = f" (column {column}" + (f", expected {expected})" if expected else ")")
        super().__init__(message + detail)


class UnsupportedEarsPattern(MsyncError):
    """An EARS template other than the event-driven one."""


class DanglingLink(MsyncError):
    """Elaboration link references a missing requirement."""


# ---------------------------------------------------------------------------
# interpretation / transformation
# ---------------------------------------------------------------------------

class NonSystemSubject(MsyncError):
    """Requirement subject differs from the set's declared system."""


class UnknownLane(MsyncError):
    """Clause subject matches no swimlane in the activity model."""


class UnsupportedDependencyKind(MsyncError):
    """Verification only supports the alpha-subset-of-beta dependency."""


class MissingTraceLink(MsyncError):
    """A target element has no trace preimage to take its name from."""


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class IllegalCell(MsyncError):
    """Matrix cell whose relation kind violates the metamodel."""


# ---------------------------------------------------------------------------
# change synchronization
# ---------------------------------------------------------------------------

class ChangesetAborted(MsyncError):
    """A changeset failed mid-way; the project was left untouched."""

    def __init__(self, message: str, cause: Exception | None = None):
        self.cause = cause
        super().__init__(message)


class UnknownRequest(MsyncError):
    """Decision resolution addressed a request that is not pending."""


class StaleRequest(MsyncError):
    """The project changed since the decision request was issued."""


class InvalidResolution(MsyncError):
    """Chosen candidate is not one the request offered."""


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

class SchemaVersionMismatch(MsyncError):
    """Project file written by a newer schema than this build reads."""


class IntegrityError(MsyncError):
    """Project file contains dangling cross-references."""
