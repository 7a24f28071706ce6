"""Exception types shared across the package."""


class SymileError(Exception):
    """Base class for library-specific failures."""


class CapacityError(SymileError, ValueError):
    """A requested discrete joint would be too large to enumerate."""


class DegenerateInputError(SymileError, ValueError):
    """An input has no well-defined answer (e.g. normalizing a zero vector)."""


class NonFiniteError(SymileError, ValueError):
    """A numeric routine received or produced NaN/inf values."""


class SchemaError(SymileError, ValueError):
    """A config or file does not conform to its declared schema."""


class DivergenceError(SymileError, RuntimeError):
    """Training produced a non-finite loss."""
