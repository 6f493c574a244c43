"""Exception hierarchy. Every error carries a stable machine-readable code
that the HTTP API and CLI surface verbatim."""


class DiagnosticError(Exception):
    """Base class for all errors raised by this package."""

    code = "INTERNAL"


class UnsupportedFormatError(DiagnosticError):
    code = "UNSUPPORTED_FORMAT"


class CorruptStreamError(DiagnosticError):
    code = "CORRUPT_STREAM"


class EmptyAudioError(DiagnosticError):
    code = "EMPTY_AUDIO"


class SilentAudioError(DiagnosticError):
    code = "SILENT_AUDIO"


class TooShortError(DiagnosticError):
    code = "TOO_SHORT"


class ZeroVectorError(DiagnosticError):
    code = "ZERO_VECTOR"


class DimensionMismatchError(DiagnosticError):
    code = "DIMENSION_MISMATCH"


class EmbedderMismatchError(DiagnosticError):
    code = "EMBEDDER_MISMATCH"


class MissingEmbeddingError(DiagnosticError):
    code = "MISSING_EMBEDDING"


class SidecarFormatError(DiagnosticError):
    code = "SIDECAR_FORMAT"


class EmptyIndexError(DiagnosticError):
    code = "EMPTY_INDEX"


class InsufficientRecordsError(DiagnosticError):
    code = "INSUFFICIENT_RECORDS"


class IndexFormatError(DiagnosticError):
    code = "INDEX_FORMAT"


class MalformedRowError(DiagnosticError):
    code = "MALFORMED_ROW"


class InvalidEnumError(DiagnosticError):
    code = "INVALID_ENUM"


class DuplicateIdError(DiagnosticError):
    code = "DUPLICATE_ID"


class IndexBuildError(DiagnosticError):
    """Aggregate of per-row failures collected during an index build."""

    code = "INDEX_BUILD_FAILED"

    def __init__(self, failures):
        self.failures = list(failures)  # (row_id, exception) pairs
        lines = ", ".join(f"{rid}: [{exc.code if isinstance(exc, DiagnosticError) else 'ERROR'}] {exc}"
                          for rid, exc in self.failures)
        super().__init__(f"{len(self.failures)} row(s) failed: {lines}")
