"""Exception types shared across the package."""


class HJPointsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidFieldError(HJPointsError):
    """A field parameter is malformed (even or composite modulus, bad precision)."""


class UnsupportedFieldError(HJPointsError):
    """The requested operation is not defined over the given field."""


class UndefinedClassError(HJPointsError):
    """Square class requested for zero."""


class ZeroValuationError(HJPointsError):
    """p-adic valuation requested for zero."""


class OddValuationError(HJPointsError):
    """A p-adic square root needs an even valuation."""


class NoSquareRootError(HJPointsError):
    """The element is not a square in the field."""


class DegenerateLineError(HJPointsError):
    """A line template without wildcard slots does not span a line."""


class ResourceLimitError(HJPointsError):
    """A configured search or memory budget was exceeded."""

    def __init__(self, message, n_reached=None):
        super().__init__(message)
        self.n_reached = n_reached


class FieldTooSmallError(HJPointsError):
    """No zero-sum-free weight vector of the requested length was found."""


class ExcludedParameterError(HJPointsError):
    """The parameter lies in the exclusion set of the weight vector."""


class FactorizationLimitError(HJPointsError):
    """Trial division left an unfactored cofactor."""


class SearchExhaustedError(HJPointsError):
    """A bounded scan ended without finding the required object."""
