"""Exception types raised across the toolkit."""


class GLSMError(Exception):
    """Base class for all toolkit errors."""


class DegenerateScreen(GLSMError):
    """No nondegenerate complement of the radical could be selected."""


class SingularPairing(GLSMError):
    """The pairing matrix between candidate transversals and the radical is singular."""


class FrameSingular(GLSMError):
    """The concatenated decomposition frame is not invertible."""


class DimensionMismatch(GLSMError):
    pass


class RankDeficient(GLSMError):
    """The Jacobian of an immersion lost rank at the requested chart point."""


class SingularMetric(GLSMError):
    pass


class StepUnderflow(GLSMError):
    """A finite-difference stencil would leave the chart domain."""


class DomainError(GLSMError):
    """An expression was evaluated outside its domain (sqrt of a negative, division by zero)."""


class ClassMismatch(GLSMError):
    """A theorem verifier was invoked on an instance outside the theorem's class."""


class ParseError(GLSMError):
    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.message = message
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(GLSMError):
    """Configuration is syntactically valid but inconsistent.

    ``diagnostics`` holds one human-readable entry per problem, each naming the
    offending fields (and line numbers where known).
    """

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class NotFound(GLSMError):
    """The example search exhausted its budget.

    Carries the best residual seen and, when one was constructed, the closest
    candidate as a config text so it can be inspected or re-run.
    """

    def __init__(self, note: str, best_residual: float = float("inf"), best_config: str | None = None):
        self.note = note
        self.best_residual = best_residual
        self.best_config = best_config
        super().__init__(note)
