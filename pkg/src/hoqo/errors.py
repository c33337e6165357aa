"""Exception hierarchy shared by every hoqo module.

All library errors derive from :class:`HoqoError` so callers (and the CLI)
can catch one type and map it to an exit code.
"""


class HoqoError(Exception):
    """Base class for all errors raised by hoqo."""


class DuplicateLabel(HoqoError):
    """Two wires in one wire list carry the same label."""


class UnknownLabel(HoqoError):
    """A label was requested that is not attached to the matrix."""


class BadDimension(HoqoError):
    """A dimension is non-positive or does not match the data."""


class DimensionMismatch(HoqoError):
    """Two objects disagree on the dimension of a shared wire or space."""


class LabelMismatch(HoqoError):
    """Wire labels of two operands do not line up as the operation requires."""


class TripleLabel(HoqoError):
    """A label occurs in three or more operands of a multi-link."""


class IncompatibleLabels(HoqoError):
    """Projector label sets overlap or do not cover the declared wires."""


class InvalidChannel(HoqoError):
    """The supplied Choi matrix is not a CPTP map within tolerance."""


class InvalidComb(HoqoError):
    """The supplied Choi matrix violates the comb hierarchy."""


class NumericalRankFailure(HoqoError):
    """A pseudo-inverse cutoff falls inside an ambiguous eigenvalue band."""


class ConventionViolation(HoqoError):
    """An input breaks a convention the quantity is defined under."""


class OddPartition(HoqoError):
    """A half-time bipartition was requested for an odd number of teeth."""


class ZeroProbabilityOutcome(HoqoError):
    """An outcome has vanishing weight and cannot be conditioned on."""


class NoExactDesign(HoqoError):
    """No registered unitary design has high enough degree for the request."""


class SolverFailure(HoqoError):
    """The conic solver did not return an optimal or near-optimal point."""


class DimensionTooLarge(HoqoError):
    """The requested problem exceeds the supported size."""


class OutOfDomain(HoqoError):
    """A closed-form expression was evaluated outside its domain."""


class SchemaError(HoqoError):
    """A matrix file does not match the interchange schema.

    Attributes:
        pointer: JSON pointer to the offending element ("" for the root).
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class NonRealValue(HoqoError):
    """A quantity expected to be real carries a significant imaginary part."""
