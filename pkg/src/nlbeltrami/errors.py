"""Exception types raised across the package."""


class BeltramiError(Exception):
    """Base class for all package errors."""


class InvalidParameter(BeltramiError, ValueError):
    pass


class NonFiniteValue(BeltramiError, ValueError):
    pass


class SingularPoint(BeltramiError, ValueError):
    pass


class AnchorViolation(BeltramiError, ValueError):
    """Anchor constraints are not Lipschitz with the declared constant."""

    def __init__(self, message, ratio=None, pair=None):
        super().__init__(message)
        self.ratio = ratio
        self.pair = pair


class NoConvergence(BeltramiError, RuntimeError):
    def __init__(self, message, iterations=None, contraction_ratio=None, tag=None):
        super().__init__(message)
        self.iterations = iterations
        self.contraction_ratio = contraction_ratio
        self.tag = tag


class DegenerateJacobian(BeltramiError, ValueError):
    pass


class ZeroOnTrace(BeltramiError, ValueError):
    pass


class AliasingError(BeltramiError, ValueError):
    def __init__(self, message, max_step=None):
        super().__init__(message)
        self.max_step = max_step
