"""Exception types shared across the package."""


class HamlearnError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(HamlearnError, ValueError):
    """Operands are defined on different qubit counts."""


class ParameterError(HamlearnError, ValueError):
    """A parameter is outside its documented range."""


class CapacityError(HamlearnError, ValueError):
    """A dense computation was requested above the qubit cap."""


class QueryWeightError(HamlearnError, ValueError):
    """A query Pauli exceeds the weight the dataset was built for."""


class GenerationError(HamlearnError, RuntimeError):
    """A random instance generator could not satisfy its constraints."""


class NumericalConsistencyError(HamlearnError, ArithmeticError):
    """A quantity that must be real/unitary failed its numerical check."""
