"""Exception and warning types shared across the package."""


class TopsRecError(Exception):
    """Base class for all errors raised by this package."""


class DataValidationError(TopsRecError):
    """A raw input table violates the ingestion schema or an invariant."""


class MissingColumnError(DataValidationError):
    pass


class UnknownWellError(DataValidationError):
    pass


class DuplicatePickError(DataValidationError):
    pass


class DuplicateWellError(DataValidationError):
    pass


class NonFiniteValueError(DataValidationError):
    pass


class EmptyDatasetError(TopsRecError):
    pass


class IndexOutOfRangeError(TopsRecError, IndexError):
    pass


class EmptyInputError(TopsRecError):
    pass


class DegenerateExtentError(TopsRecError):
    pass


class InvalidPlanError(TopsRecError):
    pass


class DuplicateLocationError(TopsRecError):
    pass


class SingularSystemError(TopsRecError):
    pass


class KeyMismatchError(TopsRecError):
    pass


class SingularSystemWarning(UserWarning):
    """A normal-equation system was rank deficient and needed a fallback."""


class DataQualityWarning(UserWarning):
    """Suspicious but non-fatal content in an input table."""
