"""Exception hierarchy shared by the cheegerlab modules."""


class CheegerLabError(Exception):
    """Base class for all library errors."""


class DomainError(CheegerLabError, ValueError):
    """A radius or point lies outside the domain of the object queried."""


class SpecError(CheegerLabError, ValueError):
    """Malformed user input (profile CSV, constellation file, mesh header)."""


class NumericalError(CheegerLabError, RuntimeError):
    """A quadrature, ODE or limit computation did not reach its tolerance."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class MeshError(CheegerLabError, ValueError):
    """Mesh is invalid, too coarse, or queried outside its valid range."""
