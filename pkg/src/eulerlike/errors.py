"""Exception hierarchy shared by all modules."""


class EulerLikeError(Exception):
    """Base class for every error raised by the package."""


class ParseError(EulerLikeError, ValueError):
    """Malformed expression source.  Carries a 1-based line and column."""

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class DomainGuardError(EulerLikeError, ArithmeticError):
    """Evaluation left the domain of a guarded operation (division, log, sqrt)."""


class JetOrderError(EulerLikeError):
    """More derivatives were requested than the jet data can supply."""


class FlowError(EulerLikeError):
    """Integration failed."""


class FlowEscapeError(FlowError):
    """A trajectory left the chart guard."""


class StepUnderflowError(FlowError):
    """The adaptive step size collapsed (stiff or singular field)."""


class PreconditionError(EulerLikeError):
    """An input violates the structural hypothesis of an operation."""


class NotEulerLikeError(PreconditionError):
    """The vector field is not Euler-like along the transversal."""


class TransversalityError(PreconditionError):
    """The submanifold or map is not transverse to the anchor."""


class ConvergenceError(EulerLikeError):
    """An iterative or extrapolation scheme failed to converge."""
