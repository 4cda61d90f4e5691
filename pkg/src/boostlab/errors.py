"""
Exceptions raised by boostlab.
"""


class BoostlabError(Exception):
    """Base class for domain failures, reported by the command line with exit code 3."""


# Chart and state errors
class OriginSingularity(BoostlabError, ValueError):
    """The polar chart is undefined at r = 0."""


class NonpositiveRadius(BoostlabError, ValueError):
    pass


# Model construction
class InvalidMassRatio(BoostlabError, ValueError):
    """Mass ratio outside (0, 1/2]."""


class RadiusTooSmall(BoostlabError, ValueError):
    pass


class BadRadii(BoostlabError, ValueError):
    """Truncation radius R2 not strictly larger than R1."""


class OutOfRange(BoostlabError, ValueError):
    pass


class EnergyBelowThreshold(BoostlabError, ValueError):
    pass


class EmptyFiber(BoostlabError, ValueError):
    """No point of the cotangent fiber lies on the energy level."""


# Sampling
class EmptySample(BoostlabError):
    """No admissible points were found on the constraint set."""


# Integration
class OriginApproach(BoostlabError, RuntimeError):
    pass


class StepFailure(BoostlabError, RuntimeError):
    pass


class NoChordFound(BoostlabError):
    pass
