"""Exception types shared across the package."""


class RecotreeError(Exception):
    """Base class for all errors raised by this package."""


class GraphConnectivityError(RecotreeError):
    """The input graph (or a required subgraph) is not connected."""


class InvalidTreeError(RecotreeError):
    """An edge set that was required to be a spanning tree is not one."""


class IllegalMoveError(RecotreeError):
    """An edge exchange would not produce a spanning tree."""


class InvalidParameterError(RecotreeError):
    """A numeric parameter is outside its documented range."""


class InstanceFormatError(RecotreeError):
    """An instance file failed validation; the message carries the position."""


class SolverInvariantError(RecotreeError):
    """An internal invariant of the primal-dual solver was violated.

    This indicates a defect, not a property of the input.
    """


class OracleCapExceeded(RecotreeError):
    """A brute-force computation would exceed its configured work cap."""


class UnboundedProgramError(RecotreeError):
    """A linear program that should be bounded is not (defect guard)."""
