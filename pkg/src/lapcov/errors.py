"""Exception hierarchy shared across the package."""


class LcmError(Exception):
    """Base class for all lapcov errors."""


class InputError(LcmError, ValueError):
    """Invalid argument: wrong shape, non-finite values, violated precondition."""


class SizeError(LcmError):
    """A dense (quadratic-memory) path was asked to exceed the dense cap."""


class SingularityError(LcmError, ArithmeticError):
    """The bare Laplace kernel is singular (tied coordinates)."""


class DivergenceError(LcmError, ArithmeticError):
    """Optimization produced a non-finite loss."""

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"fit diverged at epoch {epoch}: loss={loss!r}")


class NumericalError(LcmError, ArithmeticError):
    """A dense factorization failed where it should not have."""


class FormatError(LcmError, ValueError):
    """Malformed file contents."""


class LengthError(FormatError):
    """Binary payload shorter or longer than its header promises."""

    def __init__(self, expected, actual, what="payload"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} length mismatch: expected {expected} bytes, got {actual}")


class DataError(FormatError):
    """Non-finite value in a data file."""


class ParseError(FormatError):
    """Unparsable CSV token or ragged CSV row."""

    def __init__(self, message, line, column=None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


class SchemaError(FormatError):
    """Model JSON does not match the expected schema."""


class VersionError(FormatError):
    """Model JSON has an unsupported version."""
