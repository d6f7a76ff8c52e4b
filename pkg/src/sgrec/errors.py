"""Exception hierarchy shared by all sgrec modules."""


class SGRecError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(SGRecError, ValueError):
    """Arguments violate a documented precondition."""


class NumericalFailureError(SGRecError, ArithmeticError):
    """A non-finite value appeared while iterating.

    Attributes
    ----------
    iteration : int
        1-based index of the inner iteration that produced the value.
    label : str or None
        Class label of the sub-dictionary being solved, when known.
    """

    def __init__(self, message, iteration, label=None):
        super().__init__(message)
        self.iteration = iteration
        self.label = label


class EmptyDictionaryError(InvalidInputError):
    """Every atom was dropped during normalization."""


class EmptyClassError(InvalidInputError):
    """A class has no usable atoms (or no images)."""

    def __init__(self, label, message=None):
        super().__init__(message or f"class {label!r} is empty")
        self.label = label


class CorruptFileError(SGRecError):
    """A dictionary file is truncated or fails its magic/version/CRC checks."""


class IntegrityError(SGRecError):
    """A dictionary file decodes but its metadata is self-inconsistent."""
