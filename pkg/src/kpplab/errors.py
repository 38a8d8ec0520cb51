"""Exception hierarchy shared by every solver in the package.

Everything derives from KppLabError so callers can catch the whole family.
The split mirrors how the CLI reports failures: violated mathematical
hypotheses versus solvers that gave up versus bad configuration.
"""


class KppLabError(Exception):
    """Base class for all errors raised by kpplab."""


class HypothesisViolation(KppLabError):
    """Input data violates a structural hypothesis of the requested operation.

    Examples: interaction matrix not essentially nonnegative or reducible,
    competition that does not vanish at the origin, a subcritical Perron root
    where a positive one is required.
    """


class NoConvergence(KppLabError):
    """An iterative solver exhausted its budget without meeting tolerance."""


class SamplingInconclusive(KppLabError):
    """A sampled supremum failed to stabilize between refinement levels."""


class PositivityBreach(KppLabError):
    """A simulated field left the nonnegative cone beyond roundoff slack."""


class StabilityBudgetExceeded(KppLabError):
    """Requested time step violates the explicit-reaction stability budget."""


class InsufficientSamples(KppLabError):
    """Not enough usable samples remain after burn-in to fit a speed."""


class SpeedBelowCritical(KppLabError):
    """A wave construction was requested at a speed below the minimal one."""


class BracketingViolation(KppLabError):
    """A computed profile escaped its certified lower/upper envelope."""


class FrontAtBoundary(KppLabError):
    """The simulated front reached the edge of the computational domain."""


class ConfigError(KppLabError):
    """Malformed, incomplete, or unrecognized configuration input."""
