"""Exception types shared across the package."""


class ParadynError(Exception):
    """Base class for all package errors."""


class BranchLost(ParadynError):
    """Newton continuation diverged after maximal path refinement."""


class SingularValueOnPath(ParadynError):
    """A continuation path violates the singular-value clearance."""


class NotParabolic(ParadynError):
    """The given point is not a fixed point of multiplier one."""


class DegenerateSeries(ParadynError):
    """No nonzero higher Taylor coefficient found within probe order."""


class InequalityViolated(ParadynError):
    """A sampled sector inequality failed; carries a witness point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class OutOfChart(ParadynError):
    """Point lies outside the validated Fatou chart domain."""


class NoConvergence(ParadynError):
    """Abel-residual stagnated above tolerance."""


class BoundViolated(ParadynError):
    """A derivative bound failed; carries a witness point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class OrbitLeftSector(ParadynError):
    """Orbit exited the repelling sector; carries the exit index."""

    def __init__(self, message, exit_index=None):
        super().__init__(message)
        self.exit_index = exit_index


class AtParabolic(ParadynError):
    """Density query at a parabolic point (infinite density)."""


class OutsideComparisonRegion(ParadynError):
    """Comparison density requested outside its validity region."""


class UnsupportedMap(ParadynError):
    """Singular orbit structure not classifiable by the implemented analysis."""


class UnboundedPostsingular(ParadynError):
    """Sampled singular orbits exit every tested disc."""


class MarginTooSmall(ParadynError):
    """Disjoint-type containment check failed its safety margin."""


class DepthInsufficient(ParadynError):
    """Ray endpoint failed forward certification at the requested potential."""


class NonAdmissible(ParadynError):
    """Map is not in a supported exponential family for ray tracing."""


class OrbitHitsPartitionBoundary(ParadynError):
    """An orbit point is within tolerance of a partition boundary."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigError(ParadynError):
    """Invalid experiment configuration."""
