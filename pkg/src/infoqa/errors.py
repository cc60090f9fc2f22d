"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all infoqa errors."""


class EmptyTrainingSet(EngineError):
    """No rows were supplied to count accumulation."""


class DegenerateSystem(EngineError):
    """The emergence coefficient is undefined for fewer than two classes."""


class EmptyMask(EngineError):
    """A classification mask excluded every known class."""


class NoEvidence(EngineError):
    """Every input feature was outside the matrix vocabulary."""


class EmptyModel(EngineError):
    """A required pipeline model received zero training rows."""


class UnknownMlsuId(EngineError):
    """An MLSU id is not present in the registry."""


class LengthMismatch(EngineError):
    """Paired vectors have different lengths."""


class EmptySuite(EngineError):
    """An evaluation suite has no scorable content."""


class CorpusTooSmall(EngineError):
    """The corpus registry is too small to generate a suite from."""


class VersionMismatch(EngineError):
    """A persisted bundle declares an unsupported format version."""


class CorruptBundle(EngineError):
    """A persisted bundle failed an integrity or consistency check."""


class IoFailure(EngineError):
    """An underlying filesystem operation failed."""
