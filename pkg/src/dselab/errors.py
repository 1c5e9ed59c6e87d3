"""Shared exception types.

Everything derives from ValueError so callers that only want "bad input"
semantics can catch one base class.
"""


class DimensionMismatchError(ValueError):
    """A lattice point, direction or strip has the wrong ambient dimension."""


class ForeignSetError(ValueError):
    """A measurable set was handed to a system it does not belong to."""


class PartitionError(ValueError):
    """Partition construction violated disjointness or full measure."""


class InfeasibleStripError(ValueError):
    """A strip window contains no lattice point (width below 1).

    ``m`` is the first-coordinate value (or window) that had no feasible
    integer point.
    """

    def __init__(self, message: str, m=None):
        super().__init__(message)
        self.m = m


class WidthTooSmallError(ValueError):
    """Strip width violates the decomposition precondition.

    ``min_width`` is the exclusive lower bound the width must exceed.
    """

    def __init__(self, message: str, min_width=None):
        super().__init__(message)
        self.min_width = min_width


class RefinementError(ValueError):
    """A partition list that was declared increasing is not a refinement chain."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or is internally inconsistent."""
