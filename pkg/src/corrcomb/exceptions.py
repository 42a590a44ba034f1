"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`CorrcombError`. Data problems (bad files, empty samples) derive
from :class:`DataError`, so the command line can map them to exit code 2.
"""


class CorrcombError(Exception):
    """Base class for all package errors."""


class ValidationError(CorrcombError):
    """Invalid arguments or configuration."""


class DataError(CorrcombError):
    """Input data cannot support the requested computation."""


class LengthMismatch(ValidationError):
    pass


class InvalidArity(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class EmptyIntersection(DataError):
    pass


class EmptyInput(DataError):
    pass


class SingularMoment(DataError):
    pass


class RankDeficient(DataError):
    pass


class InsufficientData(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class ZeroDenominator(DataError):
    pass


class NonStationary(ValidationError):
    pass


class NotSPD(DataError):
    pass


class ConstantSeries(DataError):
    pass


class MalformedHeader(DataError):
    pass


class DuplicateKey(DataError):
    pass


class UnparseableNumber(DataError):
    def __init__(self, row, column, text):
        super().__init__(f"row {row}, column {column!r}: cannot parse {text!r}")
        self.row = row
        self.column = column
        self.text = text
