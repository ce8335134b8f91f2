"""Exception types shared across the package.

Every error carries a stable ``code`` string that is also used verbatim by the
HTTP layer, so clients can dispatch on it without parsing messages.
"""

from __future__ import annotations


class RallyKitError(Exception):
    code = "RallyKitError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# -- ingest ------------------------------------------------------------------

class MissingHeader(RallyKitError):
    code = "MissingHeader"


class FrameOutOfRange(RallyKitError):
    code = "FrameOutOfRange"


class DuplicateFrame(RallyKitError):
    code = "DuplicateFrame"


# -- score structure ---------------------------------------------------------

class EmptyInput(RallyKitError):
    code = "EmptyInput"


class NoSegments(RallyKitError):
    code = "NoSegments"


# -- event detection ---------------------------------------------------------

class DegenerateClusters(RallyKitError):
    code = "DegenerateClusters"


class UndefinedAtFrame(RallyKitError):
    code = "UndefinedAtFrame"


# -- anchor store ------------------------------------------------------------

class NotFound(RallyKitError):
    code = "NotFound"


class Deleted(RallyKitError):
    code = "Deleted"


class AlreadyDeleted(RallyKitError):
    code = "AlreadyDeleted"


class OutOfRallyBounds(RallyKitError):
    code = "OutOfRallyBounds"


class RallyNotFound(RallyKitError):
    code = "RallyNotFound"


class EventNotFound(RallyKitError):
    code = "EventNotFound"


class UnknownContextType(RallyKitError):
    code = "UnknownContextType"


class ValueNotInVocabulary(RallyKitError):
    code = "ValueNotInVocabulary"


class MatchNotFound(RallyKitError):
    code = "MatchNotFound"


class CorruptLog(RallyKitError):
    code = "CorruptLog"


class PipelineError(RallyKitError):
    """Wraps a module error with the pipeline stage where it occurred."""

    code = "PipelineError"

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.cause_code = getattr(cause, "code", type(cause).__name__)
        super().__init__(f"[{stage}] {self.cause_code}: {cause}")
