class FinslerForgeError(Exception):
    """Something failed inside finsler-forge."""


class InputError(FinslerForgeError):
    """The caller handed us something malformed (shape, kind, dimension)."""


class ConfigError(InputError):
    """A run configuration document could not be loaded or validated."""


class ExpressionParseError(InputError):
    """A coefficient expression could not be parsed."""

    def __init__(self, message: str, source: str, position: int) -> None:
        self.source: str = source
        self.position: int = position
        prefix: str = source[:position]
        self.line: int = prefix.count("\n") + 1
        self.column: int = position - (prefix.rfind("\n") + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column})")

    def caret(self) -> str:
        """Render the offending line with a caret under the error position.

        Returns:
            Two lines: the source line and the caret marker.
        """
        text: str = self.source.splitlines()[self.line - 1] if self.source else ""
        return f"{text}\n{' ' * (self.column - 1)}^"


class ModelError(FinslerForgeError):
    """The model does not satisfy the structural requirements of an operation."""


class ShapeError(ModelError):
    """The metric does not have the block shape the operation needs."""


class PreconditionError(ModelError):
    """A documented precondition of the operation does not hold."""


class DegeneracyError(ModelError):
    """A metric block or Hessian is degenerate."""


class SingularMatrixError(DegeneracyError):
    """A matrix is singular below the degeneracy threshold."""


class NumericError(FinslerForgeError):
    """A numerical procedure failed."""


class EvaluationError(NumericError):
    """A field produced a non-finite value or was evaluated outside its domain."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, best_estimate: float, error_estimate: float) -> None:
        self.best_estimate: float = best_estimate
        self.error_estimate: float = error_estimate
        super().__init__(message)


class SolverError(NumericError):
    """A PDE or linear solve did not converge or went unstable."""


class DispersionError(NumericError):
    """No frequency satisfies the soliton dispersion relation."""
