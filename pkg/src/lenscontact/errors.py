"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`LensContactError`, so callers (and the CLI) can catch one type.
"""


class LensContactError(Exception):
    pass


class InvalidLensError(LensContactError, ValueError):
    pass


class NotInOverlapError(LensContactError, ValueError):
    pass


class InvalidRotationError(LensContactError, ValueError):
    """p*phi0 + q <= 0, i.e. the second core period would not be positive."""


class InvalidProfileError(LensContactError, ValueError):
    pass


class ProfileConstructionError(LensContactError, RuntimeError):
    pass


class UnsupportedOrderError(LensContactError, ValueError):
    pass


class NotContactError(LensContactError, ValueError):
    pass


class NumericError(LensContactError, ArithmeticError):
    pass


class ModelViolationError(LensContactError, RuntimeError):
    """A computed quantity contradicts the K-contact model (e.g. the return
    map along a core is not a rotation)."""


class MetricGaugeError(LensContactError, ValueError):
    pass


class WrongClassError(LensContactError, ValueError):
    """Operation requested for the wrong regularity class."""


class InvalidDeformationError(LensContactError, ValueError):
    pass


class NotComparableError(LensContactError, ValueError):
    pass


class DeformationPipelineError(LensContactError, RuntimeError):
    pass


class SchemaError(LensContactError, ValueError):
    pass
