"""Exception types shared across the package."""


class TermexError(Exception):
    """Base class for all termex-specific errors."""


class InputDataError(TermexError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyGazetteerError(TermexError):
    """Gazetteer source yielded zero usable entries."""


class DegenerateDatasetError(TermexError):
    """A class needed for balancing or training is empty."""


class RatioError(TermexError, ValueError):
    """Split ratios are non-positive or do not sum to one."""


class EmptyVocabularyError(TermexError):
    """No token survived the vocabulary frequency threshold."""


class ConfigError(TermexError, ValueError):
    """Invalid hyperparameter or run configuration."""


class DimensionMismatchError(TermexError, ValueError):
    """Vector or matrix dimensions do not agree."""


class LengthMismatchError(TermexError, ValueError):
    """Parallel sequences have different lengths."""


class ModelMismatchError(TermexError):
    """Models wired into a pipeline are incompatible with each other."""


class ModelFormatError(TermexError):
    """Model file has a bad magic, version, shape, or non-finite payload."""


class NonFiniteLossError(TermexError):
    """Training produced a NaN or infinite loss."""
