"""Exception types shared across the package."""


class WpgibbsError(Exception):
    pass


class InvalidSpecError(WpgibbsError, ValueError):
    """A beta/K* definition is structurally invalid."""


class DomainError(WpgibbsError, ValueError):
    """An argument lies outside the operation's domain."""


class UnboundedConjugateError(WpgibbsError, ArithmeticError):
    """The convex conjugate diverges on the search grid."""


class InvalidModeError(WpgibbsError, ValueError):
    """A composition mode was used with incompatible operands."""


class ValidityRangeError(WpgibbsError, ValueError):
    """A closed-form case-study formula was evaluated outside its range."""
