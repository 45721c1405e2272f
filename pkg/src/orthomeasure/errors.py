"""Exception hierarchy shared by all modules."""


class OrthoMeasureError(Exception):
    """Base class for every error raised by the package."""


class StructuralError(OrthoMeasureError, ValueError):
    """Objects from different ambient spaces, overlapping parts, bad shapes."""


class DomainError(OrthoMeasureError, ValueError):
    """A value lies outside the domain an operation accepts."""


class PreconditionError(OrthoMeasureError, ValueError):
    pass


class InconsistentDensitiesError(OrthoMeasureError, ValueError):
    """The splitting system has no real solution for the given data."""


class NotAMeasureError(OrthoMeasureError, ValueError):
    """Density identity violated; the evaluator is not additive."""


class TableLookupError(OrthoMeasureError, LookupError):
    pass


class DirectionNotRegisteredError(OrthoMeasureError, LookupError):
    pass


class InputError(OrthoMeasureError, ValueError):
    """Malformed or schema-violating input file."""
