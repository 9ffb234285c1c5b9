"""Exception types raised by the loia package."""


class LoiaError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LoiaError, ValueError):
    """An argument is outside the supported range."""


class SingularityError(LoiaError, ArithmeticError):
    """A channel or derived matrix that must be inverted is (near) singular."""


class DegeneracyError(LoiaError, ArithmeticError):
    """The closed-form construction produced rank-deficient precoders."""


class AlignmentError(LoiaError):
    """Alignment residuals are too large to build receive filters."""


class ProtocolError(LoiaError):
    """A protocol step read a matrix its node does not know."""

    def __init__(self, node, step, label):
        self.node = node
        self.step = step
        self.label = label
        super().__init__(f"{node} cannot read {label!r} at step {step!r}: not in its knowledge set")
