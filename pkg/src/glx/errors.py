"""Exception hierarchy shared by all glx modules."""


class GlxError(Exception):
    """Base class for all library errors."""


class MathError(GlxError):
    """A mathematical precondition or check failed."""


class InputError(GlxError):
    """Malformed or inconsistent input data."""


# hilbert
class NotSelfAdjoint(MathError):
    pass


class DomainError(MathError):
    pass


class DegenerateNorm(MathError):
    pass


# graph
class InvalidGraph(InputError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class IsolatedVertex(MathError):
    pass


# abvp
class DirichletSpectrumHit(MathError):
    pass


class NotSplit(MathError):
    pass


class SpectrumHit(MathError):
    pass


class SingularDtN(MathError):
    pass


# coupling
class BlueprintInvalid(InputError):
    pass


class NotRegular(MathError):
    pass


class FibreMismatch(InputError):
    pass


# qgraph
class DirichletPole(MathError):
    def __init__(self, message, n=None, kappa=None):
        super().__init__(message)
        self.n = n
        self.kappa = kappa


class MuOutOfRange(MathError):
    pass


class MeshTooCoarse(MathError):
    pass


# quasi-iso
class ZeroNotSimple(MathError):
    pass


class BdMapEstimateFails(MathError):
    def __init__(self, message, a=None):
        super().__init__(message)
        self.a = a


class HypothesisFails(MathError):
    pass


class SmallnessFails(MathError):
    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured
