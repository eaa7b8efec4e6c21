"""Exception hierarchy shared by every pframe module."""


class PFrameError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(PFrameError, ValueError):
    pass


class NonpositiveMass(PFrameError, ValueError):
    pass


class EmptySupport(PFrameError, ValueError):
    pass


class NormalizationError(PFrameError, ValueError):
    """Masses sum too far from 1 to be renormalized silently."""


class LengthMismatch(PFrameError, ValueError):
    pass


class NoConvergence(PFrameError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularMatrix(PFrameError, ValueError):
    def __init__(self, message, lambda_min):
        super().__init__(message)
        self.lambda_min = lambda_min


class NotAFrame(PFrameError, ValueError):
    pass


class MarginalMismatch(PFrameError, ValueError):
    pass


class NumericalInstability(PFrameError, RuntimeError):
    pass


class NotADualWitness(PFrameError, ValueError):
    pass


class AutoRequiresZeroLambdas(PFrameError, ValueError):
    pass


class HypothesisViolated(PFrameError, ValueError):
    """A user-supplied premise constant is smaller than the optimal one."""


class DigestMismatch(PFrameError, ValueError):
    pass


class PremiseNotSatisfied(PFrameError, ValueError):
    pass


class UnknownTheorem(PFrameError, ValueError):
    pass


class ParseError(PFrameError, ValueError):
    pass
