class InvalidInputError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


class InvalidWeightError(InvalidInputError):
    def __init__(self, message: str, minimum: float | None = None) -> None:
        super().__init__(message)
        self.minimum = minimum


class AliasingError(InvalidInputError):
    """Raised when a grid is too coarse to carry a Fourier series."""


class WeightSyntaxError(InvalidInputError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f'{message} (at position {position})')
        self.position = position


class PreconditionError(InvalidInputError):
    def __init__(self, message: str, measured: float | None = None) -> None:
        super().__init__(message)
        self.measured = measured


class GeometryError(InvalidInputError):
    """Raised for boundaries that are not star-shaped or polylines without area."""


class NumericalError(RuntimeError):
    """Raised when a numerical method fails on valid input."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f'{message} (last residual {residual:.3e})')
        self.residual = residual


class FactorizationError(NumericalError):
    """Raised when a matrix that must be positive definite or regular is not."""


class MeshQualityError(NumericalError):
    """Raised when a mesh contains degenerate triangles."""
