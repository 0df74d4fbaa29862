"""Exception hierarchy."""


class CSpencerError(Exception):
    pass


class DimensionError(CSpencerError, ValueError):
    """Operands have incompatible or unsupported sizes."""


class DomainError(CSpencerError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParseError(CSpencerError, ValueError):
    """Malformed matrix/vector file."""


class NotFoundError(CSpencerError):
    """A heuristic search exhausted its budget.

    ``best`` carries the best objective value reached.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class TheoremViolation(CSpencerError, AssertionError):
    """A numerical result contradicts a proved statement.

    This always indicates a bug in the implementation, never a discovery.
    """


class LemmaViolation(TheoremViolation):
    pass
