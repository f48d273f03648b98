"""Exception hierarchy shared by all modules."""


class ReebMapperError(Exception):
    """Base class for every error raised by this package."""


class MeshFormatError(ReebMapperError):
    """The mesh file could not be parsed."""


class ValidationError(ReebMapperError):
    """Input parsed but violates a structural invariant."""


class CoverError(ReebMapperError):
    """Invalid cover parameters or an operation needing a uniform cover."""


class DimensionError(ReebMapperError):
    """Operation requires a different range dimension."""


class ContainmentError(ReebMapperError):
    """A region inclusion required by an induced map does not hold."""


class WellDefinednessError(ReebMapperError):
    """An induced map sends one component to several targets.

    Always an implementation bug; never downgrade this to a warning.
    """


class OrderingError(ReebMapperError):
    """Cover intervals do not overlap consecutively."""


class SizeLimitError(ReebMapperError):
    """Input too large for a brute-force routine."""


class VerificationError(ReebMapperError):
    """A certificate failed to verify."""
