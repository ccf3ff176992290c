"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its contract."""


class ParseError(ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss or weights)."""


class ModelFormatError(ValueError):
    """Base class for model file problems."""


class CorruptModelError(ModelFormatError):
    pass


class DimensionMismatchError(ModelFormatError):
    pass


class VersionMismatchError(ModelFormatError):
    pass
