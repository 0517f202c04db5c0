"""Exception hierarchy shared by all modules.

DataError covers malformed inputs (corpus files, tree files, metric inputs);
ModelError covers model-level failures (bad serialized models, decode
failures, degenerate training states). The CLI maps these onto exit codes.
"""


class ThairstError(Exception):
    """Base class for all toolkit errors."""


class UsageError(ThairstError):
    """Bad command-line usage or configuration."""


class DataError(ThairstError):
    """Malformed or inconsistent input data."""


class ParseError(DataError):
    """Corpus/config text that does not conform to the file format."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelError(ThairstError):
    """Invalid model state or serialized model document."""


class DecodeError(ModelError):
    """Viterbi decoding failed (e.g. a symbol no state can emit)."""
