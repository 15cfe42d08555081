"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Leg dimensions or leg partitions are inconsistent."""


class SupportError(ValueError):
    """A training sample has (numerically) zero model probability."""


class SymmetryError(ValueError):
    """A tensor violates the charge-conservation structure above tolerance."""


class DegenerateStateError(ValueError):
    """The state has zero norm or an all-zero conditional distribution."""


class CanonicalFormError(ValueError):
    """An operation required a canonical form the input does not have."""


class OracleBudgetError(RuntimeError):
    """Exhaustive enumeration would exceed the configured budget."""


class EmptySelectionError(RuntimeError):
    """A selection strategy removed every candidate from the population."""


class EncodingError(ValueError):
    """A binary matrix cannot be converted to an integer assignment."""
