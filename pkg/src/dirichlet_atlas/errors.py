"""Exception types raised across the package."""


class AtlasError(Exception):
    """Base class for all errors raised by dirichlet_atlas."""


# series evaluation
class UnknownFamily(AtlasError, ValueError):
    pass


class InvalidSpec(AtlasError, ValueError):
    pass


class EvaluationAtPole(AtlasError, ValueError):
    pass


class ContinuationUnavailable(AtlasError, ValueError):
    pass


class ToleranceUnreachable(AtlasError, RuntimeError):
    pass


class CircleHitsPole(AtlasError, ValueError):
    pass


class PrefixTooShort(AtlasError, ValueError):
    pass


class BoundDoesNotClose(AtlasError, RuntimeError):
    pass


class NotMultiplicative(AtlasError, ValueError):
    pass


class FactorVanishes(AtlasError, ArithmeticError):
    pass


# tracing / zeros
class ResolutionInsufficient(AtlasError, RuntimeError):
    pass


class BoundaryTooCloseToZero(AtlasError, RuntimeError):
    pass


class PhaseJump(AtlasError, RuntimeError):
    pass


class NewtonStall(AtlasError, RuntimeError):
    pass


class OrderExceedsTwo(AtlasError, RuntimeError):
    """A zero of order >= 3 was certified: numerical breakdown or a counterexample."""


class AmbiguousOrder(AtlasError, RuntimeError):
    pass


class ComponentTrackingLoss(AtlasError, RuntimeError):
    pass


class DerivativeZeroNotFound(AtlasError, RuntimeError):
    pass


# domains / involution
class BoundaryAssemblyFailure(AtlasError, RuntimeError):
    pass


class DegenerateConfiguration(AtlasError, RuntimeError):
    pass


class IncompleteStrip(AtlasError, ValueError):
    pass


class BranchPointOnPath(AtlasError, RuntimeError):
    pass


class PairingPreconditionFailed(AtlasError, ValueError):
    pass


class InjectivityRadiusNotFound(AtlasError, RuntimeError):
    pass


class UnitCircleCollision(AtlasError, ArithmeticError):
    pass


class MissingLayer(AtlasError, KeyError):
    pass
