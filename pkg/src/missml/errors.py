class MissMLError(Exception):
    """Base class for library errors."""


class DomainError(MissMLError, ValueError):
    """Parameters outside the chart where a quantity is defined."""


class DegeneracyError(MissMLError, ArithmeticError):
    """A numerical quantity that must stay away from zero collapsed."""


class SolverError(MissMLError, RuntimeError):
    """Homotopy continuation could not produce a clean root set."""


class SizeError(MissMLError, ValueError):
    """Requested enumeration exceeds the configured size bound."""
