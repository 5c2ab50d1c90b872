"""Exception hierarchy shared by all netheat modules."""


class NetheatError(Exception):
    """Base class for all netheat errors."""


class InputError(NetheatError):
    """Invalid user input (graph definition, config, file format)."""


class NumericalError(NetheatError):
    """A numerical procedure could not meet its contract."""


class DisconnectedGraph(InputError):
    pass


class SelfLoop(InputError):
    pass


class NonPositiveWeight(InputError):
    pass


class BrokenChain(InputError):
    pass


class PointNotOnPath(InputError):
    pass


class IncompatibleMesh(InputError):
    pass


class NonFiniteData(InputError):
    pass


class NonPositiveTime(InputError):
    pass


class VertexPoint(InputError):
    pass


class TruncationUnreachable(NumericalError):
    pass


class QuadratureBreakdown(NumericalError):
    pass


class PicardDiverged(NumericalError):
    """Fixed-point sweep failed to contract on the current time window."""

    def __init__(self, message, window=None, increments=None):
        super().__init__(message)
        self.window = window
        self.increments = increments or []


class SingularSystem(NumericalError):
    pass


class NegativeDensity(NumericalError):
    pass
