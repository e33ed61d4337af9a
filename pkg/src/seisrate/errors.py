"""Exception types shared across the package."""


class SeisrateError(Exception):
    """Base class for all package-specific errors."""


class InstanceFormatError(SeisrateError):
    """An instance file is malformed or violates a structural invariant."""


class CapacityLimitError(SeisrateError):
    """A problem exceeds an enumeration or constraint-generation cap."""


class InfeasibleProblemError(SeisrateError):
    """A power-allocation problem has no solution under the given caps."""


class DecompositionError(SeisrateError):
    """A time-sharing decomposition could not be completed."""
