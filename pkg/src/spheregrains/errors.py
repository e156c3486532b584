"""Exception types raised by the library."""


class SphereGrainsError(Exception):
    """Base class for all library errors."""


class UnsupportedDimensionError(SphereGrainsError):
    pass


class UnsupportedGaugeError(SphereGrainsError):
    pass


class InsufficientMarginError(SphereGrainsError):
    """A contact query needed information outside the simulated region."""


class EmptyWindowError(SphereGrainsError):
    pass


class DivergentWeightError(SphereGrainsError):
    pass


class AssumptionViolatedError(SphereGrainsError):
    """The weight function does not satisfy the exponential integrability condition."""


class BoundsViolationError(SphereGrainsError):
    """A second-order empty space value left its analytic bounds."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
