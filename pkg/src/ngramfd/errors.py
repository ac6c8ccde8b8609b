"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Unknown tokenizer, format, or otherwise invalid configuration."""


class UsageError(ValueError):
    """An API was called with arguments that violate its preconditions."""


class UndefinedFrequencyError(ValueError):
    """Text frequency requested for a text shorter than the n-gram order."""


class DataError(ValueError):
    """Malformed input data. Carries the file and line (or byte offset) at fault."""

    def __init__(self, message, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{':'.join(where)}: {message}"
        super().__init__(message)


class CompatibilityError(DataError):
    """A stored table was written with a different format version or tokenizer."""


class PairRejected(ValueError):
    """An (original, adversarial) pair cannot be analyzed at the requested order."""
